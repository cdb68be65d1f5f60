"""Tabular co-analysis: combine spotted morphemes into legal eojeol sequences.

Every admitted candidate is enrolled as a singleton analysis in the
triangular chart cell addressed by its (start, end) span.  Cells are then
filled bottom-up over span length, CYK style: two analyses combine iff
they are adjacent and the junction passes *both* the morpheme-connectivity
check (POS tag pair, with hierarchical fallback) and the
phoneme-connectivity check (edge sound classes).  An analysis' score is
the exact sum of its members' Viterbi scores; there is no separate
language-model weighting.

The top-level ``analyze`` returns the ranked full-span analyses, falling
back to the best partial cover (fewest gapped positions, then highest
score) when nothing spans the whole eonjeol.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .decoder import CandidateLattice, MorphemeCandidate, ObservationSeq, ViterbiDecoder
from .errors import NoAnalysis
from .lexicon import MorphConnectivity, PhonConnectivity, TagSet

GAP_MARK = "?"
NO_ANALYSIS_MARK = "<no-analysis>"


class Analysis:
    """An ordered, connectivity-checked morpheme sequence over one span.

    The score is always accumulated left-to-right over the members, so the
    same morpheme sequence has the bit-identical score no matter which
    chart splits produced it.
    """

    __slots__ = ("morphemes", "log_score", "key", "_renders")

    def __init__(self, morphemes):
        self.morphemes = tuple(morphemes)
        score = 0.0
        for m in self.morphemes:
            score += m.log_score
        self.log_score = score
        # Candidates within one pipeline share entry objects, so identity
        # is a sound (and fast) stand-in for record equality here.
        self.key = tuple((id(m.entry), m.start, m.end) for m in self.morphemes)
        self._renders = {}

    @property
    def start(self) -> int:
        return self.morphemes[0].start

    @property
    def end(self) -> int:
        return self.morphemes[-1].end

    @property
    def boundary_tags(self) -> tuple[str, str]:
        return (self.morphemes[0].entry.left_pos, self.morphemes[-1].entry.right_pos)

    def __repr__(self):
        spans = "+".join(f"{m.entry.orth}({m.start},{m.end})" for m in self.morphemes)
        return f"Analysis({spans}, {self.log_score:.4f})"


class TriangularTable:
    """Chart cells keyed by 1-based inclusive (start, end) spans."""

    def __init__(self, length: int):
        self.length = length
        self.cells = {}

    def add(self, analysis: Analysis) -> bool:
        cell = self.cells.setdefault((analysis.start, analysis.end), {})
        if analysis.key in cell:
            return False
        cell[analysis.key] = analysis
        return True

    def cell(self, start: int, end: int) -> list[Analysis]:
        return list(self.cells.get((start, end), {}).values())

    def is_empty(self) -> bool:
        return not self.cells

    def __iter__(self):
        return iter(sorted(self.cells))


def enroll(lattice: CandidateLattice) -> TriangularTable:
    """Seed the chart: one singleton analysis per lattice candidate."""
    table = TriangularTable(lattice.length)
    for candidate in lattice.candidates():
        table.add(Analysis((candidate,)))
    return table


def render_morphemes(entries, tags: TagSet, surface: bool = False) -> str:
    """Join morpheme entries with '+', inserting a space at eojeol boundaries.

    A boundary falls after a morpheme whose right tag is a word-final
    class when the next morpheme's left tag is not a suffixal class.
    Underlying orthographic forms are used unless ``surface`` is set.
    """
    parts = []
    for i, entry in enumerate(entries):
        parts.append(entry.surface if surface else entry.orth)
        if i + 1 < len(entries):
            left_final = tags.is_final(entry.right_pos)
            right_suffix = tags.is_suffix(entries[i + 1].left_pos)
            parts.append(" " if left_final and not right_suffix else "+")
    return "".join(parts)


def render_analysis(analysis: Analysis, tags: TagSet, surface: bool = False) -> str:
    cached = analysis._renders.get(surface)
    if cached is None:
        cached = render_morphemes([m.entry for m in analysis.morphemes], tags, surface)
        analysis._renders[surface] = cached
    return cached


def _ranked(analyses, tags: TagSet) -> list[Analysis]:
    return sorted(
        analyses,
        key=lambda a: (-a.log_score, len(a.morphemes), render_analysis(a, tags), a.key),
    )


def combine(table: TriangularTable, morph: MorphConnectivity, phon: PhonConnectivity,
            tags: TagSet, cap: int | None = 16) -> TriangularTable:
    """Fill the chart bottom-up over span length (in place).

    ``cap`` bounds each cell to its best analyses after that cell's span
    length is finished (ties broken toward fewer morphemes, then
    lexicographic rendering); ``None`` keeps everything.
    """
    n = table.length
    junction_ok = {}
    by_last = {}   # finalized cell span -> {id(entry): (entry, [analyses])}
    by_first = {}

    def joinable(last, first) -> bool:
        key = (id(last), id(first))
        verdict = junction_ok.get(key)
        if verdict is None:
            verdict = (morph.allowed(last.right_pos, first.left_pos, tags)
                       and phon.allowed(last.right_phon, first.left_phon))
            junction_ok[key] = verdict
        return verdict

    def finalize(start, end):
        cell = table.cells.get((start, end))
        if not cell:
            return
        if cap is not None and len(cell) > cap:
            best = _ranked(cell.values(), tags)[:cap]
            cell = {a.key: a for a in best}
            table.cells[(start, end)] = cell
        lasts, firsts = {}, {}
        for analysis in cell.values():
            last = analysis.morphemes[-1].entry
            first = analysis.morphemes[0].entry
            lasts.setdefault(id(last), (last, []))[1].append(analysis)
            firsts.setdefault(id(first), (first, []))[1].append(analysis)
        by_last[(start, end)] = lasts
        by_first[(start, end)] = firsts

    for start in range(1, n + 1):
        finalize(start, start)

    for span in range(2, n + 1):
        for start in range(1, n - span + 2):
            end = start + span - 1
            pairs = []
            for split in range(start, end):
                lefts = by_last.get((start, split))
                rights = by_first.get((split + 1, end))
                if not lefts or not rights:
                    continue
                for l_entry, l_list in lefts.values():
                    for r_entry, r_list in rights.values():
                        if joinable(l_entry, r_entry):
                            for left in l_list:
                                score = left.log_score
                                for right in r_list:
                                    pairs.append((score + right.log_score, left, right))
            if pairs:
                if cap is None:
                    for _, left, right in pairs:
                        table.add(Analysis(left.morphemes + right.morphemes))
                else:
                    # Construct best-first; once the cell holds `cap` distinct
                    # analyses, anything scoring strictly below its cap-th
                    # best can never enter, so stop there.
                    pairs.sort(key=lambda p: -p[0])
                    cell = table.cells.get((start, end), {})
                    heap = heapq.nlargest(cap, (a.log_score for a in cell.values()))[::-1]
                    heapq.heapify(heap)
                    for score, left, right in pairs:
                        if len(heap) >= cap and score < heap[0]:
                            break
                        if table.add(Analysis(left.morphemes + right.morphemes)):
                            if len(heap) >= cap:
                                heapq.heappushpop(heap, score)
                            else:
                                heapq.heappush(heap, score)
            finalize(start, end)
    return table


@dataclass(frozen=True)
class EojeolOutput:
    """One ranked analysis of one eonjeol, rendered for downstream use."""

    rendering: str
    log_score: float
    span: tuple[int, int]
    analysis: Analysis | None = None
    gaps: int = 0

    def morpheme_tokens(self) -> list[str]:
        return [tok for part in self.rendering.split() for tok in part.split("+")]


def analyze(obs: ObservationSeq, decoder: ViterbiDecoder, morph: MorphConnectivity,
            phon: PhonConnectivity, tags: TagSet, cap: int | None = 16,
            topk: int = 1, surface: bool = False) -> list[EojeolOutput]:
    """Decode, enroll, combine; return ranked full-span outputs.

    When no analysis covers the whole eonjeol, the single best partial
    cover is returned instead (minimum gapped positions, then maximum
    score), with each gap run rendered as ``?``.  Raises ``NoAnalysis``
    only when the chart is entirely empty.
    """
    lattice = decoder.decode(obs)
    table = combine(enroll(lattice), morph, phon, tags, cap)
    if table.is_empty():
        raise NoAnalysis(f"no morpheme spotted in {' '.join(obs.symbols)!r}")
    n = table.length
    full = table.cell(1, n)
    if full:
        ranked = _ranked(full, tags)[: max(1, topk)]
        return [
            EojeolOutput(render_analysis(a, tags, surface), a.log_score, (1, n), a)
            for a in ranked
        ]
    return [_best_cover(table, tags, surface)]


def _best_cover(table: TriangularTable, tags: TagSet, surface: bool) -> EojeolOutput:
    """Minimum-gap, then maximum-score chain of non-overlapping analyses."""
    n = table.length
    # value per prefix length: (gapped positions, -score); None = unset
    best = [None] * (n + 1)
    back = [None] * (n + 1)  # (prev_index, analysis | None)
    best[0] = (0, 0.0)
    for end in range(1, n + 1):
        gaps, neg = best[end - 1]
        candidate = (gaps + 1, neg)
        best[end] = candidate
        back[end] = (end - 1, None)
        for start in range(1, end + 1):
            for analysis in _ranked(table.cell(start, end), tags):
                prev = best[start - 1]
                value = (prev[0], prev[1] - analysis.log_score)
                if value < best[end]:
                    best[end] = value
                    back[end] = (start - 1, analysis)
    parts = []
    score = 0.0
    cursor = n
    pending_gap = False
    while cursor > 0:
        prev, analysis = back[cursor]
        if analysis is None:
            pending_gap = True
        else:
            if pending_gap:
                parts.append(GAP_MARK)
                pending_gap = False
            parts.append(render_analysis(analysis, tags, surface))
            score += analysis.log_score
        cursor = prev
    if pending_gap:
        parts.append(GAP_MARK)
    parts.reverse()
    return EojeolOutput(" ".join(parts), score, (1, n), None, gaps=best[n][0])


def format_output_lines(outputs, verbose: bool = False) -> list[str]:
    """``rank<TAB>rendering<TAB>log_score`` lines, one per ranked output."""
    lines = []
    for rank, out in enumerate(outputs, start=1):
        fields = [str(rank), out.rendering, f"{out.log_score:.6f}"]
        if verbose and out.analysis is not None:
            for m in out.analysis.morphemes:
                fields.append(
                    f"{m.entry.orth}[{m.start},{m.end}]{m.entry.left_pos}:{m.entry.right_pos}"
                )
        lines.append("\t".join(fields))
    return lines
