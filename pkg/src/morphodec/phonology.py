"""Phoneme and diphone domain: Yale-romanized Korean sound units.

The sound system is pure data.  A phoneme table lists position-specific
units (vowel nuclei, syllable-initial consonants, syllable-final
consonants) and a diphone inventory lists every legal unit pair the
recognizer front end can emit.  Both ship as versioned text assets so the
engine can be pointed at another agglutinative language by swapping files.

Diphones come in four kinds:

* ``V``    a lone vowel nucleus,
* ``C1V``  syllable-initial consonant plus vowel,
* ``VC2``  vowel plus syllable-final consonant,
* ``C2C1`` syllable-final consonant plus the next syllable's initial
  consonant; the final consonant must be sonorant (nasal or liquid).

Text is converted deterministically: longest-match tokenization into
phonemes, ``-`` closes a syllable, then each syllable emits its C1V (or V)
and VC2 diphones, with a C2C1 junction diphone inserted between syllables
whenever a sonorant coda meets a following onset.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .errors import InventoryMiss, MalformedSyllable, ParseError, UnknownSymbol, ValidationError

VOWEL = "vowel"
CONSONANT = "consonant"

KIND_V = "V"
KIND_C1V = "C1V"
KIND_VC2 = "VC2"
KIND_C2C1 = "C2C1"
DIPHONE_KINDS = (KIND_V, KIND_C1V, KIND_VC2, KIND_C2C1)


@dataclass(frozen=True)
class Phoneme:
    """One Yale-romanized sound unit.

    ``sonorant`` is only meaningful for consonants (nasals, liquids,
    glides); vowel sonority is not represented by this flag.
    """

    symbol: str
    klass: str
    sonorant: bool = False

    @property
    def is_vowel(self) -> bool:
        return self.klass == VOWEL


@dataclass(frozen=True)
class Syllable:
    """Onset / nucleus / coda decomposition of one syllable segment."""

    nucleus: Phoneme
    onset: Phoneme | None = None
    coda: Phoneme | None = None

    def __post_init__(self):
        if not self.nucleus.is_vowel:
            raise ValidationError(f"syllable nucleus {self.nucleus.symbol!r} is not a vowel")
        for part in (self.onset, self.coda):
            if part is not None and part.is_vowel:
                raise ValidationError(f"syllable margin {part.symbol!r} is not a consonant")


@dataclass(frozen=True)
class Diphone:
    """A typed phoneme pair (or lone vowel) observation symbol."""

    kind: str
    left: Phoneme | None
    right: Phoneme | None

    def __post_init__(self):
        if self.kind not in DIPHONE_KINDS:
            raise ValidationError(f"unknown diphone kind {self.kind!r}")
        shapes = {
            KIND_V: (None, VOWEL),
            KIND_C1V: (CONSONANT, VOWEL),
            KIND_VC2: (VOWEL, CONSONANT),
            KIND_C2C1: (CONSONANT, CONSONANT),
        }
        want_left, want_right = shapes[self.kind]
        for phoneme, want, side in ((self.left, want_left, "left"), (self.right, want_right, "right")):
            if want is None:
                if phoneme is not None:
                    raise ValidationError(f"{self.kind} diphone must have an empty {side} phoneme")
            elif phoneme is None or phoneme.klass != want:
                raise ValidationError(f"{self.kind} diphone needs a {want} on the {side}")
        if self.kind == KIND_C2C1 and not self.left.sonorant:
            raise ValidationError(
                f"C2C1 diphone {self.symbol!r}: final consonant {self.left.symbol!r} is not sonorant"
            )

    @property
    def symbol(self) -> str:
        left = self.left.symbol if self.left is not None else ""
        right = self.right.symbol if self.right is not None else ""
        return left + right


class PhonemeTable:
    """The closed phoneme table plus which symbols may fill which syllable slot.

    The asset counts position-specific units, so a consonant that occurs
    both syllable-initially and syllable-finally contributes two units
    under one symbol.
    """

    def __init__(self, phonemes, onsets, codas, unit_count):
        self.phonemes = dict(phonemes)
        self.onsets = frozenset(onsets)
        self.codas = frozenset(codas)
        self.unit_count = unit_count
        self._by_length = sorted({len(s) for s in self.phonemes}, reverse=True)

    def __contains__(self, symbol) -> bool:
        return symbol in self.phonemes

    def __len__(self) -> int:
        return self.unit_count

    def lookup(self, symbol: str) -> Phoneme:
        try:
            return self.phonemes[symbol]
        except KeyError:
            raise UnknownSymbol(f"unknown phoneme symbol {symbol!r}") from None

    @property
    def vowels(self):
        return sorted(s for s, p in self.phonemes.items() if p.is_vowel)

    @classmethod
    def from_lines(cls, lines, source="<phonemes>"):
        """Parse ``symbol<TAB>klass<TAB>role<TAB>sonorant`` records.

        Roles are ``nucleus``, ``onset`` or ``coda``; a symbol may appear
        once per role and every appearance must agree on class and
        sonorancy.
        """
        phonemes = {}
        roles = {}
        unit_count = 0
        for lineno, raw in enumerate(lines, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise ParseError(f"expected 4 tab-separated fields, got {len(fields)}", source, lineno)
            symbol, klass, role, son = fields
            if klass not in (VOWEL, CONSONANT):
                raise ParseError(f"bad class {klass!r}", source, lineno)
            if role not in ("nucleus", "onset", "coda"):
                raise ParseError(f"bad role {role!r}", source, lineno)
            if son not in ("0", "1"):
                raise ParseError(f"bad sonorant flag {son!r}", source, lineno)
            if "-" in symbol or not symbol:
                raise ParseError(f"bad symbol {symbol!r}", source, lineno)
            phoneme = Phoneme(symbol, klass, son == "1")
            if symbol in phonemes and phonemes[symbol] != phoneme:
                raise ParseError(f"symbol {symbol!r} redeclared with different properties", source, lineno)
            if role in roles.setdefault(symbol, set()):
                raise ParseError(f"symbol {symbol!r} declared twice for role {role}", source, lineno)
            if (klass == VOWEL) != (role == "nucleus"):
                raise ParseError(f"class {klass} incompatible with role {role}", source, lineno)
            phonemes[symbol] = phoneme
            roles[symbol].add(role)
            unit_count += 1
        onsets = {s for s, r in roles.items() if "onset" in r}
        codas = {s for s, r in roles.items() if "coda" in r}
        return cls(phonemes, onsets, codas, unit_count)

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as handle:
            return cls.from_lines(handle, source=str(path))


class DiphoneInventory:
    """The closed diphone set, keyed by canonical symbol."""

    def __init__(self, diphones):
        self.by_symbol = {}
        for diphone in diphones:
            if diphone.symbol in self.by_symbol:
                raise ValidationError(f"duplicate diphone symbol {diphone.symbol!r}")
            self.by_symbol[diphone.symbol] = diphone
        self.symbols = sorted(self.by_symbol)

    def __contains__(self, symbol) -> bool:
        return symbol in self.by_symbol

    def __len__(self) -> int:
        return len(self.by_symbol)

    def __iter__(self):
        for symbol in self.symbols:
            yield self.by_symbol[symbol]

    def lookup(self, symbol: str) -> Diphone:
        try:
            return self.by_symbol[symbol]
        except KeyError:
            raise InventoryMiss(f"diphone {symbol!r} is not in the inventory") from None

    @property
    def counts(self) -> dict:
        tally = {kind: 0 for kind in DIPHONE_KINDS}
        for diphone in self.by_symbol.values():
            tally[diphone.kind] += 1
        return tally

    @classmethod
    def from_lines(cls, lines, table: PhonemeTable, source="<diphones>"):
        """Parse ``symbol<TAB>kind<TAB>left<TAB>right`` records ('-' = absent)."""
        diphones = []
        for lineno, raw in enumerate(lines, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise ParseError(f"expected 4 tab-separated fields, got {len(fields)}", source, lineno)
            symbol, kind, left, right = fields
            try:
                left_p = None if left == "-" else table.lookup(left)
                right_p = None if right == "-" else table.lookup(right)
                diphone = Diphone(kind, left_p, right_p)
            except (UnknownSymbol, ValidationError) as exc:
                raise ParseError(str(exc), source, lineno) from exc
            if diphone.symbol != symbol:
                raise ParseError(f"symbol {symbol!r} does not match parts {diphone.symbol!r}", source, lineno)
            diphones.append(diphone)
        return cls(diphones)

    @classmethod
    def from_file(cls, path, table: PhonemeTable):
        with open(path, encoding="utf-8") as handle:
            return cls.from_lines(handle, table, source=str(path))


def tokenize_yale(text: str, table: PhonemeTable) -> list[Syllable]:
    """Split Yale-romanized text into syllables.

    ``-`` closes a syllable.  Within a segment, phonemes are recognized by
    longest match (so ``ss`` beats ``s`` and ``wu`` beats ``u``) and
    assigned onset/nucleus/coda by position around the unique vowel.
    """
    syllables = []
    for segment in text.strip().split("-"):
        if not segment:
            raise MalformedSyllable(f"empty syllable segment in {text!r}")
        phonemes = _tokenize_segment(segment, table)
        vowel_positions = [i for i, p in enumerate(phonemes) if p.is_vowel]
        if len(vowel_positions) != 1:
            raise MalformedSyllable(
                f"syllable {segment!r} has {len(vowel_positions)} vowels, expected exactly one"
            )
        at = vowel_positions[0]
        before, after = phonemes[:at], phonemes[at + 1 :]
        if len(before) > 1 or len(after) > 1:
            raise MalformedSyllable(f"syllable {segment!r} has a consonant cluster")
        syllables.append(
            Syllable(
                nucleus=phonemes[at],
                onset=before[0] if before else None,
                coda=after[0] if after else None,
            )
        )
    return syllables


def _tokenize_segment(segment: str, table: PhonemeTable) -> list[Phoneme]:
    phonemes = []
    pos = 0
    while pos < len(segment):
        for length in table._by_length:
            candidate = segment[pos : pos + length]
            if len(candidate) == length and candidate in table:
                phonemes.append(table.lookup(candidate))
                pos += length
                break
        else:
            raise UnknownSymbol(f"cannot tokenize {segment!r} at position {pos} ({segment[pos:]!r})")
    return phonemes


def diphonize(syllables, inventory: DiphoneInventory) -> list[Diphone]:
    """Convert a syllable sequence to its reference diphone sequence.

    Per syllable: C1V when an onset is present, V otherwise, then VC2 when
    a coda is present.  Between syllables a C2C1 diphone is emitted iff the
    first syllable ends in a sonorant coda and the next one has an onset.
    """
    out = []
    for i, syllable in enumerate(syllables):
        if syllable.onset is not None:
            out.append(_require(inventory, syllable.onset.symbol + syllable.nucleus.symbol))
        else:
            out.append(_require(inventory, syllable.nucleus.symbol))
        if syllable.coda is not None:
            out.append(_require(inventory, syllable.nucleus.symbol + syllable.coda.symbol))
            following = syllables[i + 1] if i + 1 < len(syllables) else None
            if syllable.coda.sonorant and following is not None and following.onset is not None:
                out.append(_require(inventory, syllable.coda.symbol + following.onset.symbol))
    return out


def _require(inventory, symbol):
    return inventory.lookup(symbol)


def diphone_class(symbol: str, inventory: DiphoneInventory) -> Diphone:
    """Return the typed diphone for a canonical symbol (inverse of rendering)."""
    return inventory.lookup(symbol)


def text_to_diphones(text: str, table: PhonemeTable, inventory: DiphoneInventory) -> list[str]:
    """Tokenize + diphonize in one step, returning canonical symbols."""
    return [d.symbol for d in diphonize(tokenize_yale(text, table), inventory)]


def _read_asset(name):
    return resources.files("morphodec.data").joinpath(name).read_text(encoding="utf-8").splitlines()


def load_default_table() -> PhonemeTable:
    """Load the bundled Korean phoneme table."""
    return PhonemeTable.from_lines(_read_asset("phonemes.tsv"), source="phonemes.tsv")


def load_default_inventory(table: PhonemeTable | None = None) -> DiphoneInventory:
    """Load the bundled Korean diphone inventory."""
    if table is None:
        table = load_default_table()
    return DiphoneInventory.from_lines(_read_asset("diphones.tsv"), table, source="diphones.tsv")


def full_inventory(table: PhonemeTable) -> DiphoneInventory:
    """Generate the complete inventory implied by a phoneme table's roles.

    Every vowel is a V diphone, every onset+vowel a C1V, every
    vowel+coda a VC2, and every sonorant-coda+onset pair a C2C1.
    """
    diphones = []
    vowels = [table.lookup(s) for s in table.vowels]
    onsets = [table.lookup(s) for s in sorted(table.onsets)]
    codas = [table.lookup(s) for s in sorted(table.codas)]
    for v in vowels:
        diphones.append(Diphone(KIND_V, None, v))
    for c in onsets:
        for v in vowels:
            diphones.append(Diphone(KIND_C1V, c, v))
    for v in vowels:
        for c in codas:
            diphones.append(Diphone(KIND_VC2, v, c))
    for c2 in codas:
        if not c2.sonorant:
            continue
        for c1 in onsets:
            diphones.append(Diphone(KIND_C2C1, c2, c1))
    return DiphoneInventory(diphones)
