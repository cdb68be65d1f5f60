"""scikit-learn style estimators wrapping the decoding pipeline.

``fit`` takes a :class:`~morphodec.assets.LanguagePack` (the lexicon data
play the role of training data: the trie HMM index is compiled from them),
after which ``transform``/``predict`` map batches of observation sequences
to lattices or analyzed renderings.  Hyperparameters (``alpha``, ``beta``,
pruning, beam cap) live in ``__init__`` so ``get_params``/``set_params``
and grid sweeps work like for any other estimator.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .analyzer import NO_ANALYSIS_MARK, analyze
from .assets import LanguagePack
from .decoder import ObservationSeq, PruneConfig, ViterbiDecoder
from .errors import MorphodecError, NoAnalysis
from .evaluation import EvalCounts, align_and_count
from .trie_hmm import HmmParams


def as_observation(item) -> ObservationSeq:
    """Accept an ObservationSeq, an iterable of symbols, or a spaced string."""
    if isinstance(item, ObservationSeq):
        return item
    if isinstance(item, str):
        return ObservationSeq(tuple(item.split()))
    return ObservationSeq(tuple(item))


def check_observations(X) -> list[ObservationSeq]:
    """Validate a batch of observation sequences (shape only; symbols are
    checked against the inventory during decoding)."""
    if isinstance(X, (str, ObservationSeq)):
        raise MorphodecError("expected a batch of observation sequences, got a single one")
    sequences = [as_observation(item) for item in X]
    for i, seq in enumerate(sequences):
        if len(seq) == 0:
            raise MorphodecError(f"observation sequence {i} is empty")
        if not all(isinstance(s, str) and s for s in seq.symbols):
            raise MorphodecError(f"observation sequence {i} has non-string symbols")
    return sequences


def _check_pack(X) -> LanguagePack:
    if not isinstance(X, LanguagePack):
        raise MorphodecError(
            f"fit expects a LanguagePack, got {type(X).__name__}; "
            "use LanguagePack.bundled() or LanguagePack.load(dir)"
        )
    return X


class TrieViterbiDecoder(BaseEstimator):
    """Morpheme spotter: fit on a language pack, transform streams to lattices."""

    def __init__(self, alpha=0.8, beta=0.9, normalize_emissions=False, prune=True,
                 min_mismatch_allowance=1, mismatch_fraction=0.34, per_symbol_floor=None):
        self.alpha = alpha
        self.beta = beta
        self.normalize_emissions = normalize_emissions
        self.prune = prune
        self.min_mismatch_allowance = min_mismatch_allowance
        self.mismatch_fraction = mismatch_fraction
        self.per_symbol_floor = per_symbol_floor

    def _params(self, pack: LanguagePack):
        hmm = HmmParams(alpha=self.alpha, beta=self.beta, m=len(pack.inventory),
                        normalize_emissions=self.normalize_emissions)
        prune = PruneConfig(enabled=self.prune,
                            min_mismatch_allowance=self.min_mismatch_allowance,
                            mismatch_fraction=self.mismatch_fraction,
                            per_symbol_floor=self.per_symbol_floor)
        return hmm, prune

    def fit(self, X, y=None):
        pack = _check_pack(X)
        hmm, prune = self._params(pack)
        self.pack_ = pack
        self.decoder_ = ViterbiDecoder(pack.index, hmm, prune)
        self.n_states_ = len(pack.index)
        return self

    def transform(self, X):
        check_is_fitted(self, "decoder_")
        return [self.decoder_.decode(obs) for obs in check_observations(X)]


class EonjeolAnalyzer(TrieViterbiDecoder):
    """Full pipeline: noisy diphone streams in, analyzed eojeol strings out.

    ``predict`` returns the top rendering per sequence (``<no-analysis>``
    when nothing was spotted at all); ``transform`` returns the ranked
    outputs.  ``score`` is the morpheme-level correct rate against gold
    renderings, which makes the analyzer sweepable with model-selection
    tooling.
    """

    def __init__(self, alpha=0.8, beta=0.9, normalize_emissions=False, prune=True,
                 min_mismatch_allowance=1, mismatch_fraction=0.34, per_symbol_floor=None,
                 cap=16, topk=1, surface=False):
        super().__init__(alpha=alpha, beta=beta, normalize_emissions=normalize_emissions,
                         prune=prune, min_mismatch_allowance=min_mismatch_allowance,
                         mismatch_fraction=mismatch_fraction, per_symbol_floor=per_symbol_floor)
        self.cap = cap
        self.topk = topk
        self.surface = surface

    def transform(self, X):
        check_is_fitted(self, "decoder_")
        pack = self.pack_
        results = []
        for obs in check_observations(X):
            try:
                outs = analyze(obs, self.decoder_, pack.morph, pack.phon, pack.tags,
                               cap=self.cap, topk=self.topk, surface=self.surface)
            except NoAnalysis:
                outs = []
            results.append(outs)
        return results

    def predict(self, X):
        return [outs[0].rendering if outs else NO_ANALYSIS_MARK for outs in self.transform(X)]

    def score(self, X, y) -> float:
        """Morpheme-level correct rate of top-1 renderings against gold."""
        gold = list(y)
        hyp = self.predict(X)
        if len(gold) != len(hyp):
            raise MorphodecError(f"{len(hyp)} predictions for {len(gold)} gold renderings")
        counts = EvalCounts.zero()
        for g, h in zip(gold, hyp):
            counts = counts + align_and_count(_tokens(g), _tokens(h))
        return counts.correct / counts.total if counts.total else 0.0


def _tokens(rendering: str) -> list[str]:
    return [tok for part in rendering.split() for tok in part.split("+")]
