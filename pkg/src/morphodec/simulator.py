"""Seedable noise channel standing in for the acoustic front end.

Generates noisy diphone observation streams from ground-truth utterances
with independent deletion, substitution, and insertion processes, plus a
frame-mode expander that repeats each symbol a few times the way a
sliding-window spotter does.  Everything is deterministic under its seed.

The ``paper-fig10`` preset reproduces the measured error profile of the
reference recognizer this engine was calibrated against: a 6.4% combined
deletion+substitution rate (split evenly between the two processes) and
38.6 insertions per 100 reference symbols.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .analyzer import render_morphemes
from .decoder import ObservationSeq
from .errors import EmptyResult, ValidationError
from .phonology import KIND_C2C1, DiphoneInventory, PhonemeTable, text_to_diphones

CONFUSION_MODES = ("uniform", "same_vowel_group")


@dataclass(frozen=True)
class NoiseConfig:
    """Channel parameters; the seed fully determines the output."""

    del_rate: float = 0.0
    sub_rate: float = 0.0
    ins_rate: float = 0.0
    confusion_mode: str = "uniform"
    seed: int = 0

    def __post_init__(self):
        for name in ("del_rate", "sub_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must be in [0,1], got {value}")
        if self.ins_rate < 0.0:
            raise ValidationError(f"ins_rate must be >= 0, got {self.ins_rate}")
        if self.confusion_mode not in CONFUSION_MODES:
            raise ValidationError(f"confusion_mode must be one of {CONFUSION_MODES}")

    def scaled(self, factor: float) -> "NoiseConfig":
        """Scale all three rates by ``factor`` (probabilities capped at 1)."""
        return replace(
            self,
            del_rate=min(1.0, self.del_rate * factor),
            sub_rate=min(1.0, self.sub_rate * factor),
            ins_rate=self.ins_rate * factor,
        )

    def describe(self) -> str:
        return (f"del={self.del_rate:g} sub={self.sub_rate:g} ins={self.ins_rate:g} "
                f"confusion={self.confusion_mode} seed={self.seed}")


# Split the combined 6.4% deletion-class rate evenly: 3.2% true deletions,
# and a substitution rate on survivors chosen so the combined event rate
# over reference symbols is exactly 6.4%.
_FIG10_DEL = 0.032
PRESETS = {
    "clean": NoiseConfig(),
    "paper-fig10": NoiseConfig(
        del_rate=_FIG10_DEL,
        sub_rate=_FIG10_DEL / (1.0 - _FIG10_DEL),
        ins_rate=0.386,
    ),
}


def noise_preset(name: str, seed: int = 0) -> NoiseConfig:
    try:
        preset = PRESETS[name]
    except KeyError:
        raise ValidationError(f"unknown noise preset {name!r} (have {sorted(PRESETS)})") from None
    return replace(preset, seed=seed)


@dataclass(frozen=True)
class GoldRecord:
    """Ground-truth bookkeeping for one eonjeol."""

    text: str                      # syllabified Yale surface text
    reference: tuple[str, ...]     # its deterministic diphone transcription
    rendering: str                 # orthographic morphemes, '+'-joined

    def morpheme_tokens(self) -> list[str]:
        return [tok for part in self.rendering.split() for tok in part.split("+")]


def gold_record(text: str, rendering: str, table: PhonemeTable,
                inventory: DiphoneInventory) -> GoldRecord:
    return GoldRecord(text, tuple(text_to_diphones(text, table, inventory)), rendering)


class NoiseChannel:
    """Precompiled corruption channel over one inventory."""

    def __init__(self, inventory: DiphoneInventory, cfg: NoiseConfig):
        self.inventory = inventory
        self.cfg = cfg
        self.symbols = list(inventory.symbols)
        self._groups = {}
        if cfg.confusion_mode == "same_vowel_group":
            for diphone in inventory:
                key = "cc" if diphone.kind == KIND_C2C1 else _vowel_of(diphone)
                self._groups.setdefault(key, []).append(diphone.symbol)

    def corrupt(self, gold: GoldRecord, seed: int | None = None):
        """Return (observation, stats); raises EmptyResult on an empty stream.

        Per reference symbol, in fixed draw order: delete with del_rate;
        otherwise substitute with sub_rate; then insert random symbols
        after the slot, geometrically with mean ins_rate per slot.
        """
        cfg = self.cfg
        rng = random.Random(cfg.seed if seed is None else seed)
        slot_p = cfg.ins_rate / (1.0 + cfg.ins_rate) if cfg.ins_rate > 0 else 0.0
        out = []
        stats = {"kept": 0, "deleted": 0, "substituted": 0, "inserted": 0}
        for symbol in gold.reference:
            if rng.random() < cfg.del_rate:
                stats["deleted"] += 1
            elif rng.random() < cfg.sub_rate:
                out.append(self._substitute(rng, symbol))
                stats["substituted"] += 1
            else:
                out.append(symbol)
                stats["kept"] += 1
            while slot_p and rng.random() < slot_p:
                out.append(rng.choice(self.symbols))
                stats["inserted"] += 1
        if not out:
            raise EmptyResult(f"noise channel deleted all of {gold.text!r} (seed {cfg.seed})")
        tag = f"seed={cfg.seed if seed is None else seed} {cfg.describe()}"
        return ObservationSeq(tuple(out), source_tag=tag), stats

    def _substitute(self, rng, symbol: str) -> str:
        if self.cfg.confusion_mode == "same_vowel_group":
            diphone = self.inventory.lookup(symbol)
            key = "cc" if diphone.kind == KIND_C2C1 else _vowel_of(diphone)
            pool = [s for s in self._groups.get(key, []) if s != symbol]
            if pool:
                return rng.choice(pool)
        while True:
            pick = rng.choice(self.symbols)
            if pick != symbol:
                return pick


def _vowel_of(diphone) -> str:
    for part in (diphone.left, diphone.right):
        if part is not None and part.is_vowel:
            return part.symbol
    raise ValidationError(f"diphone {diphone.symbol!r} has no vowel and is not C2C1")


def corrupt(gold: GoldRecord, cfg: NoiseConfig, inventory: DiphoneInventory) -> ObservationSeq:
    obs, _ = NoiseChannel(inventory, cfg).corrupt(gold)
    return obs


def derive_seed(seed: int, record_index: int) -> int:
    return seed ^ record_index


def corrupt_corpus(records, cfg: NoiseConfig, inventory: DiphoneInventory) -> list[ObservationSeq]:
    """Corrupt every record with a per-record derived seed (seed xor index)."""
    channel = NoiseChannel(inventory, cfg)
    return [channel.corrupt(rec, derive_seed(cfg.seed, i))[0] for i, rec in enumerate(records)]


def frame_expand(obs: ObservationSeq, min_rep: int, max_rep: int, seed: int) -> ObservationSeq:
    """Repeat each symbol r times, r uniform in [min_rep, max_rep] under seed."""
    if min_rep < 1 or max_rep < min_rep:
        raise ValidationError(f"bad repetition range [{min_rep}, {max_rep}]")
    rng = random.Random(seed)
    out = []
    for symbol in obs.symbols:
        out.extend([symbol] * rng.randint(min_rep, max_rep))
    tag = f"{obs.source_tag} frame=[{min_rep},{max_rep}]x{seed}".strip()
    return ObservationSeq(tuple(out), source_tag=tag)


def read_corpus_lines(lines, table: PhonemeTable, inventory: DiphoneInventory,
                      source="<corpus>") -> list[GoldRecord]:
    """Parse ``eonjeol_text<TAB>gold_rendering`` records."""
    records = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].rstrip("\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ValidationError(f"{source}:{lineno}: expected 2 tab-separated fields")
        records.append(gold_record(fields[0], fields[1], table, inventory))
    return records


def read_corpus_file(path, table, inventory) -> list[GoldRecord]:
    with open(path, encoding="utf-8") as handle:
        return read_corpus_lines(handle, table, inventory, source=str(path))


def corpus_lines(records) -> list[str]:
    return [f"{r.text}\t{r.rendering}" for r in records]


def sample_gold_records(pack, count: int, seed: int, min_morphemes: int = 1,
                        max_morphemes: int = 4) -> list[GoldRecord]:
    """Sample legal morpheme chains from a language pack.

    Chains respect both connectivity matrices, only end on a word-final
    right tag, and are textually joinable: a following morpheme either
    starts with a consonant or is a coda-attaching form landing on an open
    syllable.
    """
    rng = random.Random(seed)
    entries = list(pack.entries)
    starters = [e for e in entries
                if not pack.tags.is_suffix(e.left_pos) and not e.coda_only]
    if not starters:
        raise ValidationError("lexicon has no chain-initial entries")
    records = []
    attempts = 0
    while len(records) < count:
        attempts += 1
        if attempts > count * 200:
            raise ValidationError("corpus sampling keeps failing; check the matrices")
        target = rng.randint(min_morphemes, max_morphemes)
        chain = [rng.choice(starters)]
        while True:
            last = chain[-1]
            done = pack.tags.is_final(last.right_pos)
            if done and len(chain) >= target:
                break
            nexts = [e for e in entries if _chain_ok(last, e, pack)]
            if not nexts:
                if done:
                    break
                chain = None
                break
            chain.append(rng.choice(nexts))
            if len(chain) >= max_morphemes * 2:
                chain = None
                break
        if chain is None:
            continue
        text = _join_surfaces(chain)
        rendering = render_morphemes([e for e in chain], pack.tags)
        records.append(gold_record(text, rendering, pack.table, pack.inventory))
    return records


def _chain_ok(last, nxt, pack) -> bool:
    if not pack.morph.allowed(last.right_pos, nxt.left_pos, pack.tags):
        return False
    if not pack.phon.allowed(last.right_phon, nxt.left_phon):
        return False
    if nxt.coda_only:
        # a coda-attaching morpheme needs an open syllable to land on
        return pack.table.lookup(last.right_phon.surface).is_vowel
    # a regular follower must start with a consonant so '-' joining needs
    # no resyllabification
    return not pack.table.lookup(nxt.left_phon.surface).is_vowel


def _join_surfaces(chain) -> str:
    text = chain[0].surface
    for entry in chain[1:]:
        if entry.coda_only:
            text += entry.surface
        else:
            text += "-" + entry.surface
    return text
