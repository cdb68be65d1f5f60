"""Phonetic-surface-form lexicon and the two junction-legality matrices.

Each lexicon record pairs one *phonetic* surface form of a morpheme with
its underlying orthographic spelling, part-of-speech tags for both ends,
and sound-change classes for both edge phonemes.  Conjugated and
phonologically changed variants are separate records, so sound rules are
plain data: the record for surface ``sswu`` / underlying ``swu`` carries
the left class ``s>ss``, and the phoneme matrix says that class is only
legal after an ``l``-final morpheme.

Morpheme order legality lives in a tag-pair matrix consulted with
hierarchical fallback (a pair is allowed when any ancestor-generalized
pair is allowed, with explicit records winning most-specific-first).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import InventoryMiss, MalformedSyllable, ParseError, UnknownSymbol, ValidationError
from .phonology import DiphoneInventory, PhonemeTable, diphonize, tokenize_yale


@dataclass(frozen=True)
class PosTag:
    name: str
    parent: str | None = None
    final: bool = False   # may end an eojeol
    suffix: bool = False  # may never start one


class TagSet:
    """Hierarchically organized part-of-speech tags."""

    def __init__(self, tags):
        self.tags = {}
        for tag in tags:
            if tag.name in self.tags:
                raise ValidationError(f"duplicate tag {tag.name!r}")
            self.tags[tag.name] = tag
        for tag in self.tags.values():
            if tag.parent is not None and tag.parent not in self.tags:
                raise ValidationError(f"tag {tag.name!r} has unknown parent {tag.parent!r}")
        self._ancestry = {}
        self._final = {}
        self._suffix = {}
        for name in self.tags:
            chain = self._walk(name)  # raises on cycles
            self._ancestry[name] = chain
            self._final[name] = any(self.tags[t].final for t in chain)
            self._suffix[name] = any(self.tags[t].suffix for t in chain)

    def _walk(self, name):
        chain = []
        seen = set()
        cursor = name
        while cursor is not None:
            if cursor in seen:
                raise ValidationError(f"tag hierarchy cycle at {cursor!r}")
            if cursor not in self.tags:
                raise ValidationError(f"unknown tag {cursor!r}")
            seen.add(cursor)
            chain.append(cursor)
            cursor = self.tags[cursor].parent
        return tuple(chain)

    def __contains__(self, name) -> bool:
        return name in self.tags

    def __iter__(self):
        return iter(sorted(self.tags))

    def ancestry(self, name: str) -> tuple[str, ...]:
        """The tag itself first, then each parent up to the root."""
        try:
            return self._ancestry[name]
        except KeyError:
            raise ValidationError(f"unknown tag {name!r}") from None

    def is_final(self, name: str) -> bool:
        try:
            return self._final[name]
        except KeyError:
            raise ValidationError(f"unknown tag {name!r}") from None

    def is_suffix(self, name: str) -> bool:
        try:
            return self._suffix[name]
        except KeyError:
            raise ValidationError(f"unknown tag {name!r}") from None

    @classmethod
    def from_lines(cls, lines, source="<tags>"):
        """Parse ``name<TAB>parent?<TAB>flags?`` records (flags: final, suffix)."""
        tags = []
        for lineno, raw in enumerate(lines, start=1):
            line = raw.split("#", 1)[0].rstrip()
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) > 3:
                raise ParseError(f"expected at most 3 fields, got {len(fields)}", source, lineno)
            name = fields[0].strip()
            parent = fields[1].strip() if len(fields) > 1 and fields[1].strip() else None
            flags = set()
            if len(fields) > 2 and fields[2].strip():
                flags = {f.strip() for f in fields[2].split(",")}
                unknown = flags - {"final", "suffix"}
                if unknown:
                    raise ParseError(f"unknown flags {sorted(unknown)}", source, lineno)
            tags.append(PosTag(name, parent, "final" in flags, "suffix" in flags))
        return cls(tags)

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as handle:
            return cls.from_lines(handle, source=str(path))


@dataclass(frozen=True)
class PhonClass:
    """An edge phoneme and the sound change (if any) this surface form shows.

    ``phoneme`` is the underlying sound; ``change`` is the surface sound it
    turned into, or ``None`` when unchanged.
    """

    phoneme: str
    change: str | None = None

    def render(self) -> str:
        if self.change is None:
            return f"{self.phoneme}:none"
        return f"{self.phoneme}>{self.change}"

    @property
    def surface(self) -> str:
        return self.change if self.change is not None else self.phoneme

    @classmethod
    def parse(cls, text: str) -> "PhonClass":
        if ">" in text:
            phoneme, change = text.split(">", 1)
            if not phoneme or not change:
                raise ValidationError(f"bad phoneme class {text!r}")
            return cls(phoneme, change)
        if text.endswith(":none"):
            phoneme = text[: -len(":none")]
            if not phoneme:
                raise ValidationError(f"bad phoneme class {text!r}")
            return cls(phoneme, None)
        raise ValidationError(f"bad phoneme class {text!r} (want 'p:none' or 'p>q')")


@dataclass(frozen=True)
class LexiconEntry:
    """One phonetic surface form of one morpheme (or enrolled idiom)."""

    surface: str
    orth: str
    left_pos: str
    right_pos: str
    left_phon: PhonClass
    right_phon: PhonClass
    idiom: bool = False
    header: tuple[str, ...] | None = field(default=None, compare=False)
    coda_only: bool = field(default=False, compare=False)

    def key(self):
        return (self.surface, self.orth, self.left_pos, self.right_pos,
                self.left_phon.render(), self.right_phon.render())

    def render_line(self) -> str:
        fields = [self.surface, self.orth, self.left_pos, self.right_pos,
                  self.left_phon.render(), self.right_phon.render()]
        if self.idiom:
            fields.append("IDIOM")
        return "\t".join(fields)


def _edge_phonemes(surface: str, table: PhonemeTable):
    """First and last phoneme symbols of a surface form.

    Vowel-less single-consonant forms (coda-attaching morphemes such as
    the ending ``l``) are legal; anything else must syllabify.
    """
    body = surface.replace("-", "")
    if body in table and not table.lookup(body).is_vowel:
        if surface != body:
            raise MalformedSyllable(f"stray '-' in single-consonant form {surface!r}")
        if body not in table.codas:
            raise MalformedSyllable(
                f"single-consonant form {surface!r} cannot attach as a syllable coda"
            )
        return body, body, True
    syllables = tokenize_yale(surface, table)
    first = syllables[0].onset or syllables[0].nucleus
    last = syllables[-1].coda or syllables[-1].nucleus
    return first.symbol, last.symbol, False


def load_lexicon(lines, tags: TagSet, table: PhonemeTable, source="<lexicon>") -> list[LexiconEntry]:
    """Parse and validate lexicon records.

    Format: ``surface<TAB>orth<TAB>left_pos<TAB>right_pos<TAB>left_phon<TAB>right_phon[<TAB>IDIOM]``.
    Rejects duplicate (surface, orth) pairs, unknown tags, tag mismatches on
    non-idioms, and edge phoneme classes whose surface sound does not match
    the actual first/last phoneme of the surface form.
    """
    entries = []
    seen = set()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) not in (6, 7):
            raise ParseError(f"expected 6 or 7 tab-separated fields, got {len(fields)}", source, lineno)
        if len(fields) == 7 and fields[6] != "IDIOM":
            raise ParseError(f"seventh field must be 'IDIOM', got {fields[6]!r}", source, lineno)
        try:
            entry = LexiconEntry(
                surface=fields[0],
                orth=fields[1],
                left_pos=fields[2],
                right_pos=fields[3],
                left_phon=PhonClass.parse(fields[4]),
                right_phon=PhonClass.parse(fields[5]),
                idiom=len(fields) == 7,
            )
            _validate_entry(entry, tags, table)
        except (ValidationError, UnknownSymbol, MalformedSyllable) as exc:
            raise ValidationError(f"{source}:{lineno}: {exc}") from exc
        if (entry.surface, entry.orth) in seen:
            raise ValidationError(f"{source}:{lineno}: duplicate record ({entry.surface}, {entry.orth})")
        seen.add((entry.surface, entry.orth))
        entries.append(entry)
    return entries


def _validate_entry(entry: LexiconEntry, tags: TagSet, table: PhonemeTable):
    for tag in (entry.left_pos, entry.right_pos):
        if tag not in tags:
            raise ValidationError(f"unknown tag {tag!r} in entry {entry.surface!r}")
    if not entry.idiom and entry.left_pos != entry.right_pos:
        raise ValidationError(
            f"entry {entry.surface!r}: left/right tags differ ({entry.left_pos}/{entry.right_pos}) "
            "but the entry is not an idiom"
        )
    first, last, _ = _edge_phonemes(entry.surface, table)
    if entry.left_phon.surface != first:
        raise ValidationError(
            f"entry {entry.surface!r}: left class {entry.left_phon.render()} does not surface "
            f"as the first phoneme {first!r}"
        )
    if entry.right_phon.surface != last:
        raise ValidationError(
            f"entry {entry.surface!r}: right class {entry.right_phon.render()} does not surface "
            f"as the last phoneme {last!r}"
        )
    for side in (entry.left_phon, entry.right_phon):
        for symbol in (side.phoneme, side.change):
            if symbol is not None and symbol not in table:
                raise ValidationError(f"entry {entry.surface!r}: unknown phoneme {symbol!r} in class")


def load_lexicon_file(path, tags: TagSet, table: PhonemeTable) -> list[LexiconEntry]:
    with open(path, encoding="utf-8") as handle:
        return load_lexicon(handle, tags, table, source=str(path))


def serialize_lexicon(entries) -> str:
    """Canonical text rendering: records sorted by key, one per line."""
    return "\n".join(e.render_line() for e in sorted(entries, key=LexiconEntry.key)) + "\n"


def compile_headers(entries, table: PhonemeTable, inventory: DiphoneInventory) -> list[LexiconEntry]:
    """Fill each entry's diphone transcription header.

    Normal surface forms go through tokenize + diphonize.  A vowel-less
    single-consonant form compiles to a one-symbol header carrying the bare
    consonant; the decoder matches it against the coda slot of VC2 / C2C1
    observations.
    """
    compiled = []
    for entry in entries:
        try:
            _, _, coda_only = _edge_phonemes(entry.surface, table)
            if coda_only:
                header = (entry.surface,)
            else:
                header = tuple(d.symbol for d in diphonize(tokenize_yale(entry.surface, table), inventory))
        except (UnknownSymbol, MalformedSyllable, InventoryMiss) as exc:
            raise type(exc)(f"entry ({entry.surface}, {entry.orth}): {exc}") from exc
        compiled.append(replace(entry, header=header, coda_only=coda_only))
    return compiled


class _RuleMatrix:
    """Shared allow/deny record logic: most specific match wins, deny beats
    allow on ties, and loading rejects nothing (conflicts surface as deny)."""

    def __init__(self, records):
        # records: list of (left_key, right_key, allow)
        self.records = {}
        self._memo = {}
        for left, right, allow in records:
            if (left, right) in self.records and self.records[(left, right)] != allow:
                raise ValidationError(f"conflicting records for ({left}, {right})")
            self.records[(left, right)] = allow

    def _decide(self, candidates, default):
        """candidates: iterable of ((left, right), specificity) most→least."""
        best = None
        for pair, rank in candidates:
            if pair in self.records:
                verdict = (rank, self.records[pair])
                if best is None or rank > best[0] or (rank == best[0] and not verdict[1]):
                    best = verdict
        if best is None:
            return default
        return best[1]


class MorphConnectivity(_RuleMatrix):
    """Legal morpheme combinations as (right tag of left, left tag of right) pairs."""

    def allowed(self, left_tag: str, right_tag: str, tags: TagSet) -> bool:
        memo_key = (id(tags), left_tag, right_tag)
        cached = self._memo.get(memo_key)
        if cached is not None:
            return cached
        candidates = []
        for i, lt in enumerate(tags.ancestry(left_tag)):
            for j, rt in enumerate(tags.ancestry(right_tag)):
                candidates.append(((lt, rt), -(i + j)))
        verdict = self._decide(candidates, default=False)
        self._memo[memo_key] = verdict
        return verdict

    @classmethod
    def from_lines(cls, lines, tags: TagSet, source="<morph-matrix>"):
        records = []
        for lineno, raw in enumerate(lines, start=1):
            fields = _matrix_fields(raw, source, lineno)
            if fields is None:
                continue
            left, right, allow = fields
            for tag in (left, right):
                if tag not in tags:
                    raise ParseError(f"unknown tag {tag!r}", source, lineno)
            records.append((left, right, allow))
        try:
            return cls(records)
        except ValidationError as exc:
            raise ParseError(str(exc), source) from exc

    @classmethod
    def from_file(cls, path, tags: TagSet):
        with open(path, encoding="utf-8") as handle:
            return cls.from_lines(handle, tags, source=str(path))


class PhonConnectivity(_RuleMatrix):
    """Legal sound combinations at morpheme junctions.

    Keys are rendered phoneme classes (``l:none``, ``s>ss``) or ``*``.
    Junctions where both sides are unchanged are allowed by default; every
    other combination needs an explicit allow record.
    """

    def allowed(self, left: PhonClass, right: PhonClass) -> bool:
        memo_key = (left.phoneme, left.change, right.phoneme, right.change)
        cached = self._memo.get(memo_key)
        if cached is not None:
            return cached
        lk, rk = left.render(), right.render()
        candidates = [
            ((lk, rk), 2),
            ((lk, "*"), 1),
            (("*", rk), 1),
            (("*", "*"), 0),
        ]
        default = left.change is None and right.change is None
        verdict = self._decide(candidates, default=default)
        self._memo[memo_key] = verdict
        return verdict

    @classmethod
    def from_lines(cls, lines, table: PhonemeTable, source="<phon-matrix>"):
        records = []
        for lineno, raw in enumerate(lines, start=1):
            fields = _matrix_fields(raw, source, lineno)
            if fields is None:
                continue
            left, right, allow = fields
            for side in (left, right):
                if side == "*":
                    continue
                try:
                    klass = PhonClass.parse(side)
                except ValidationError as exc:
                    raise ParseError(str(exc), source, lineno) from exc
                for symbol in (klass.phoneme, klass.change):
                    if symbol is not None and symbol not in table:
                        raise ParseError(f"unknown phoneme {symbol!r}", source, lineno)
            records.append((left, right, allow))
        try:
            return cls(records)
        except ValidationError as exc:
            raise ParseError(str(exc), source) from exc

    @classmethod
    def from_file(cls, path, table: PhonemeTable):
        with open(path, encoding="utf-8") as handle:
            return cls.from_lines(handle, table, source=str(path))


def _matrix_fields(raw, source, lineno):
    line = raw.split("#", 1)[0].rstrip()
    if not line.strip():
        return None
    fields = line.split("\t")
    if len(fields) != 3:
        raise ParseError(f"expected 3 tab-separated fields, got {len(fields)}", source, lineno)
    left, right, verdict = (f.strip() for f in fields)
    if verdict not in ("allow", "deny"):
        raise ParseError(f"verdict must be allow|deny, got {verdict!r}", source, lineno)
    return left, right, verdict == "allow"


def morph_connect_allowed(left: LexiconEntry, right: LexiconEntry,
                          matrix: MorphConnectivity, tags: TagSet) -> bool:
    """May ``right`` follow ``left``?  Consults (left.right_pos, right.left_pos)."""
    return matrix.allowed(left.right_pos, right.left_pos, tags)


def phon_connect_allowed(left: LexiconEntry, right: LexiconEntry,
                         matrix: PhonConnectivity) -> bool:
    """Is the sound junction between ``left`` and ``right`` legal?"""
    return matrix.allowed(left.right_phon, right.left_phon)
