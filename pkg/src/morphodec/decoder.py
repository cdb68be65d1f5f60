"""Time-synchronous Viterbi morpheme spotting over noisy diphone streams.

A separate search is launched from every observation position (any
position may start a morpheme).  At each step a path either self-loops
(consuming one observation in place, which absorbs insertions and
frame-mode repeats) or advances to a trie child.  Entering a root child
carries no transition cost; every later move is priced by the index's
transition model and every consumed observation by its emission model.
Whenever a path sits on a state with terminal entries, one candidate per
entry is emitted for the covered span, subject only to pruning: this is
exhaustive spotting, not single-best decoding.

Deletions are not modeled (no skip transitions); a deleted diphone shows
up as a penalized or failed candidate and the chart's alternative
segmentations compensate.

All launches for one sequence run as a single (state x start) dynamic
program per time step, which keeps the per-step work in a few vectorized
operations.  Scores stay in the log domain throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyObservation, InventoryMiss
from .trie_hmm import ROOT, HmmParams, TrieHmmIndex, emission_match

_BIG = np.iinfo(np.int64).max // 4
_FLOOR_SLACK = 1e-9


@dataclass(frozen=True)
class ObservationSeq:
    """One eonjeol's worth of recognized diphone symbols (1-based positions)."""

    symbols: tuple[str, ...]
    source_tag: str = ""

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class MorphemeCandidate:
    """A spotted morpheme hypothesis covering observations start..end."""

    entry: object
    start: int
    end: int
    log_score: float
    mismatches: int

    @property
    def length(self) -> int:
        return self.end - self.start + 1


class CandidateLattice:
    """Span-indexed candidate sets for one observation sequence."""

    def __init__(self, length: int):
        self.length = length
        self.by_span = {}

    def add(self, candidate: MorphemeCandidate):
        cell = self.by_span.setdefault((candidate.start, candidate.end), {})
        key = candidate.entry
        known = cell.get(key)
        if known is None or candidate.log_score > known.log_score:
            cell[key] = candidate

    def candidates(self):
        out = []
        for span in sorted(self.by_span):
            cell = self.by_span[span]
            out.extend(sorted(cell.values(),
                              key=lambda c: (c.entry.orth, -c.log_score, c.mismatches, c.entry.key())))
        return out

    def __len__(self) -> int:
        return sum(len(cell) for cell in self.by_span.values())

    def dump_lines(self):
        """``start<TAB>end<TAB>orth<TAB>log_score<TAB>mismatches`` lines."""
        return [
            f"{c.start}\t{c.end}\t{c.entry.orth}\t{c.log_score:.6f}\t{c.mismatches}"
            for c in self.candidates()
        ]


@dataclass(frozen=True)
class PruneConfig:
    """Candidate admission rule.

    A candidate over ``L`` observations is admitted iff its mismatch count
    is at most ``max(min_mismatch_allowance, ceil(mismatch_fraction * L))``
    and its log score clears a floor.  With ``per_symbol_floor`` set the
    floor is ``L * per_symbol_floor``; left unset it defaults to the score
    of a worst-transition path carrying exactly the allowed mismatch count,
    so by default the two criteria agree.  ``enabled=False`` admits
    everything (used by the oracle-equivalence tests).
    """

    enabled: bool = True
    min_mismatch_allowance: int = 1
    mismatch_fraction: float = 0.34
    per_symbol_floor: float | None = None

    def allowance(self, path_len: int) -> int:
        return max(self.min_mismatch_allowance, int(math.ceil(self.mismatch_fraction * path_len)))


def prune_check(path_len: int, log_score: float, mismatches: int, cfg: PruneConfig,
                *, log_beta: float | None = None, log_miss: float | None = None,
                worst_step: float | None = None) -> bool:
    """Scalar admission test; the decoder applies the same rule vectorized.

    The keyword context (match/miss emission log-probabilities and the
    worst per-step transition in the index) is needed to evaluate the
    default floor; without it only an explicit ``per_symbol_floor`` can be
    checked and the floor criterion is otherwise waived.
    """
    if not cfg.enabled:
        return True
    allowed = cfg.allowance(path_len)
    if mismatches > allowed:
        return False
    if cfg.per_symbol_floor is not None:
        return log_score >= path_len * cfg.per_symbol_floor - _FLOOR_SLACK
    if log_beta is None or log_miss is None or worst_step is None:
        return True
    floor = ((path_len - allowed) * log_beta + allowed * log_miss
             + (path_len - 1) * worst_step)
    return log_score >= floor - _FLOOR_SLACK


class ViterbiDecoder:
    """Reusable decoder: compiles an index + parameters into flat arrays."""

    def __init__(self, index: TrieHmmIndex, params: HmmParams | None = None,
                 prune: PruneConfig | None = None):
        self.index = index
        self.params = params or HmmParams(m=len(index.inventory))
        self.prune = prune or PruneConfig()
        self._compile()

    def _compile(self):
        states = self.index.states
        params = self.params
        self._n = len(states)
        self._log_alpha = math.log(params.alpha)
        self._log_beta = math.log(params.beta)
        self._log_miss = math.log(params.miss)

        src, dst = [], []
        logp = []
        for state in states:
            if state.id == ROOT or not state.children:
                continue
            step = math.log((1.0 - params.alpha) / len(state.children))
            for child in state.children:
                src.append(state.id)
                dst.append(child)
                logp.append(step)
        self._edge_src = np.asarray(src, dtype=np.intp)
        self._edge_dst = np.asarray(dst, dtype=np.intp)
        self._edge_logp = np.asarray(logp, dtype=np.float64)
        self._worst_step = min([self._log_alpha] + logp) if logp else self._log_alpha

        self._init_ids = np.asarray(self.index.root.children, dtype=np.intp)
        terminals = self.index.terminal_states()
        self._term_ids = np.asarray([s.id for s in terminals], dtype=np.intp)
        self._term_entries = [tuple(s.terminals) for s in terminals]
        self._match_cache = {}

    def _match_vector(self, symbol: str) -> np.ndarray:
        vec = self._match_cache.get(symbol)
        if vec is None:
            vec = np.zeros(self._n, dtype=bool)
            for state in self.index.states:
                if state.id != ROOT and emission_match(self.index, state, symbol):
                    vec[state.id] = True
            self._match_cache[symbol] = vec
        return vec

    def decode(self, obs: ObservationSeq) -> CandidateLattice:
        symbols = obs.symbols
        if len(symbols) == 0:
            raise EmptyObservation("cannot decode an empty observation sequence")
        for symbol in symbols:
            if symbol not in self.index.inventory:
                raise InventoryMiss(f"observation symbol {symbol!r} is not in the inventory")

        n, L = self._n, len(symbols)
        score = np.full((n, L), -np.inf)
        mism = np.zeros((n, L), dtype=np.int64)
        lattice = CandidateLattice(L)
        e_src, e_dst, e_logp = self._edge_src, self._edge_dst, self._edge_logp

        for t, symbol in enumerate(symbols):
            match = self._match_vector(symbol)
            emit = np.where(match, self._log_beta, self._log_miss)
            miss_inc = (~match).astype(np.int64)
            if t > 0:
                prev = score[:, :t]
                m_prev = mism[:, :t]
                self_cand = prev + self._log_alpha
                best = self_cand.copy()
                if e_src.size:
                    np.maximum.at(best, e_dst, prev[e_src] + e_logp[:, None])
                m_best = np.where(self_cand == best, m_prev, _BIG)
                if e_src.size:
                    vals = prev[e_src] + e_logp[:, None]
                    cand = np.where(vals == best[e_dst], m_prev[e_src], _BIG)
                    np.minimum.at(m_best, e_dst, cand)
                score[:, :t] = best + emit[:, None]
                mism[:, :t] = m_best + miss_inc[:, None]
            score[self._init_ids, t] = emit[self._init_ids]
            mism[self._init_ids, t] = miss_inc[self._init_ids]
            self._collect(lattice, score, mism, t)
        return lattice

    def _collect(self, lattice, score, mism, t):
        if self._term_ids.size == 0:
            return
        cols = t + 1
        term_scores = score[self._term_ids, :cols]
        term_mism = mism[self._term_ids, :cols]
        admitted = np.isfinite(term_scores)
        if self.prune.enabled:
            path_len = np.arange(t + 1, 0, -1, dtype=np.float64)  # start s -> t - s + 1
            allowed = np.maximum(self.prune.min_mismatch_allowance,
                                 np.ceil(self.prune.mismatch_fraction * path_len)).astype(np.int64)
            admitted &= term_mism <= allowed[None, :]
            if self.prune.per_symbol_floor is not None:
                floor = path_len * self.prune.per_symbol_floor
            else:
                floor = ((path_len - allowed) * self._log_beta + allowed * self._log_miss
                         + (path_len - 1) * self._worst_step)
            admitted &= term_scores >= floor[None, :] - _FLOOR_SLACK
        for row, col in zip(*np.nonzero(admitted)):
            for entry in self._term_entries[row]:
                lattice.add(MorphemeCandidate(
                    entry=entry,
                    start=int(col) + 1,
                    end=t + 1,
                    log_score=float(term_scores[row, col]),
                    mismatches=int(term_mism[row, col]),
                ))


def decode(obs: ObservationSeq, index: TrieHmmIndex, params: HmmParams | None = None,
           prune: PruneConfig | None = None) -> CandidateLattice:
    """One-shot decode; build a ViterbiDecoder for repeated use."""
    return ViterbiDecoder(index, params, prune).decode(obs)


def decode_exact(obs: ObservationSeq, index: TrieHmmIndex,
                 params: HmmParams | None = None) -> CandidateLattice:
    """Exact-trie-match baseline: no self-loops, no mismatch smoothing.

    Candidates are emitted only where the observations spell a header (or
    junction + header) verbatim; scores use the same emission/transition
    model so they are comparable with the smoothed decoder's clean paths.
    """
    symbols = obs.symbols
    if len(symbols) == 0:
        raise EmptyObservation("cannot decode an empty observation sequence")
    for symbol in symbols:
        if symbol not in index.inventory:
            raise InventoryMiss(f"observation symbol {symbol!r} is not in the inventory")
    params = params or HmmParams(m=len(index.inventory))
    log_beta = math.log(params.beta)
    lattice = CandidateLattice(len(symbols))
    for start in range(len(symbols)):
        frontier = []
        for cid in index.root.children:
            child = index.state(cid)
            if emission_match(index, child, symbols[start]):
                frontier.append((child, log_beta))
        t = start
        while frontier:
            for node, acc in frontier:
                for entry in node.terminals:
                    lattice.add(MorphemeCandidate(entry, start + 1, t + 1, acc, 0))
            t += 1
            if t >= len(symbols):
                break
            nxt = []
            for node, acc in frontier:
                if not node.children:
                    continue
                step = math.log((1.0 - params.alpha) / len(node.children))
                for cid in node.children:
                    child = index.state(cid)
                    if emission_match(index, child, symbols[t]):
                        nxt.append((child, acc + step + log_beta))
            frontier = nxt
    return lattice


def read_observation_file(path) -> list[ObservationSeq]:
    """One eonjeol per line, diphone symbols space-separated; '#' comments."""
    sequences = []
    with open(path, encoding="utf-8") as handle:
        for raw in handle:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            sequences.append(ObservationSeq(tuple(line.split())))
    return sequences


def format_observation_lines(sequences, header: str | None = None) -> list[str]:
    lines = []
    if header:
        lines.append(f"# {header}")
    lines.extend(" ".join(seq.symbols) for seq in sequences)
    return lines
