"""Alignment-based scoring in the correct / delete / insert accounting.

Gold and hypothesis symbol sequences are aligned by minimal edit distance
(unit costs).  ``correct`` counts aligned equal pairs, ``delete`` is every
gold item without an equal partner, ``insert`` every hypothesis item
without one — so a substitution increments both ``delete`` and ``insert``.
Among cost-optimal alignments the one with the most matches is used, which
makes the counts deterministic.

Percentages are computed from the integer counts with exact rational
arithmetic and rounded half-up at the requested precision; no floating
accumulation is involved.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class EvalCounts:
    total: int
    correct: int
    delete: int
    insert: int

    def __post_init__(self):
        if min(self.total, self.correct, self.delete, self.insert) < 0:
            raise ValidationError("negative count")
        if self.correct + self.delete != self.total:
            raise ValidationError(
                f"correct ({self.correct}) + delete ({self.delete}) != total ({self.total})"
            )

    def __add__(self, other: "EvalCounts") -> "EvalCounts":
        return EvalCounts(
            self.total + other.total,
            self.correct + other.correct,
            self.delete + other.delete,
            self.insert + other.insert,
        )

    @classmethod
    def zero(cls) -> "EvalCounts":
        return cls(0, 0, 0, 0)


def align_and_count(gold, hyp) -> EvalCounts:
    """Count correct/delete/insert under a max-match minimal-edit alignment."""
    gold = list(gold)
    hyp = list(hyp)
    n, m = len(gold), len(hyp)
    # DP value: (edit cost, -matches); lexicographic minimum maximizes
    # matches among cost-optimal alignments.
    previous = [(j, 0) for j in range(m + 1)]
    for i in range(1, n + 1):
        current = [(i, 0)]
        gi = gold[i - 1]
        for j in range(1, m + 1):
            cost_del, match_del = previous[j]
            cost_ins, match_ins = current[j - 1]
            cost_diag, match_diag = previous[j - 1]
            if gi == hyp[j - 1]:
                diag = (cost_diag, match_diag - 1)
            else:
                diag = (cost_diag + 1, match_diag)
            current.append(min(diag, (cost_del + 1, match_del), (cost_ins + 1, match_ins)))
        previous = current
    matches = -previous[m][1]
    return EvalCounts(total=n, correct=matches, delete=n - matches, insert=m - matches)


def format_percent(numerator: int, denominator: int, decimals: int = 2) -> str:
    """Exact half-up percentage rendering from integer counts."""
    if denominator <= 0:
        return "-"
    scale = 10 ** decimals
    scaled = 100 * scale * numerator
    quotient, remainder = divmod(scaled, denominator)
    if 2 * remainder >= denominator:
        quotient += 1
    whole, frac = divmod(quotient, scale)
    if decimals == 0:
        return f"{whole}%"
    return f"{whole}.{frac:0{decimals}d}%"


def counts_table(rows, decimals: int = 2) -> str:
    """Text table in the total | correct | delete | insert layout.

    ``rows`` is an iterable of (label, EvalCounts).
    """
    lines = ["unit\ttotal\tcorrect\tdelete\tinsert"]
    for label, c in rows:
        lines.append(
            f"{label}\t{c.total}"
            f"\t{c.correct} ({format_percent(c.correct, c.total, decimals)})"
            f"\t{c.delete} ({format_percent(c.delete, c.total, decimals)})"
            f"\t{c.insert}"
        )
    return "\n".join(lines)


def counts_json(rows) -> dict:
    return {
        label: {"total": c.total, "correct": c.correct, "delete": c.delete, "insert": c.insert}
        for label, c in rows
    }
