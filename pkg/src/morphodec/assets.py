"""Loading and bundling of language assets.

A language pack is everything the engine needs for one language: phoneme
table, diphone inventory, tag set, lexicon (compiled to diphone headers),
the two connectivity matrices, and the prebuilt trie HMM index.  The
bundled pack is a desk-scale Korean instance; all of it is plain text, so
another agglutinative language is a directory of the same six files.
"""

from __future__ import annotations

import pickle
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ValidationError
from .lexicon import (MorphConnectivity, PhonConnectivity, TagSet,
                      compile_headers, load_lexicon)
from .phonology import DiphoneInventory, PhonemeTable
from .trie_hmm import TrieHmmIndex, build_index

PACK_FILES = {
    "phonemes": "phonemes.tsv",
    "diphones": "diphones.tsv",
    "tags": "tags.tsv",
    "lexicon": "lexicon.tsv",
    "morph_matrix": "morph_matrix.tsv",
    "phon_matrix": "phon_matrix.tsv",
}
CORPUS_FILE = "corpus.tsv"
MANIFEST_FILE = "corpus_manifest.tsv"
_PACK_FORMAT = 1


@dataclass
class LanguagePack:
    table: PhonemeTable
    inventory: DiphoneInventory
    tags: TagSet
    entries: tuple
    morph: MorphConnectivity
    phon: PhonConnectivity
    index: TrieHmmIndex

    @classmethod
    def from_sources(cls, sources: dict) -> "LanguagePack":
        """Build a pack from a mapping of role -> lines iterable."""
        table = PhonemeTable.from_lines(sources["phonemes"], source="phonemes")
        inventory = DiphoneInventory.from_lines(sources["diphones"], table, source="diphones")
        tags = TagSet.from_lines(sources["tags"], source="tags")
        entries = compile_headers(
            load_lexicon(sources["lexicon"], tags, table, source="lexicon"),
            table, inventory,
        )
        morph = MorphConnectivity.from_lines(sources["morph_matrix"], tags, source="morph_matrix")
        phon = PhonConnectivity.from_lines(sources["phon_matrix"], table, source="phon_matrix")
        index = build_index(entries, inventory)
        return cls(table, inventory, tags, index.entries, morph, phon, index)

    @classmethod
    def load(cls, directory, overrides: dict | None = None) -> "LanguagePack":
        """Load a pack from a directory of asset files (names in PACK_FILES).

        ``overrides`` maps roles to explicit file paths that win over the
        directory layout.
        """
        directory = Path(directory)
        overrides = overrides or {}
        sources = {}
        for role, name in PACK_FILES.items():
            path = Path(overrides.get(role, directory / name))
            sources[role] = path.read_text(encoding="utf-8").splitlines()
        return cls.from_sources(sources)

    @classmethod
    def bundled(cls) -> "LanguagePack":
        """Load the Korean pack shipped inside the package."""
        sources = {
            role: _read_asset(name).splitlines() for role, name in PACK_FILES.items()
        }
        return cls.from_sources(sources)


def _read_asset(name: str) -> str:
    return resources.files("morphodec.data").joinpath(name).read_text(encoding="utf-8")


def bundled_corpus_text() -> str:
    return _read_asset(CORPUS_FILE)


def bundled_manifest_text() -> str:
    return _read_asset(MANIFEST_FILE)


def save_pack(pack: LanguagePack, path) -> None:
    """Persist a compiled pack (internal, versioned cache format)."""
    payload = {"format": _PACK_FORMAT, "pack": pack}
    with open(path, "wb") as handle:
        pickle.dump(payload, handle, protocol=pickle.HIGHEST_PROTOCOL)


def load_pack(path) -> LanguagePack:
    with open(path, "rb") as handle:
        payload = pickle.load(handle)
    if not isinstance(payload, dict) or payload.get("format") != _PACK_FORMAT:
        raise ValidationError(f"{path}: not a compiled pack (or unsupported format)")
    return payload["pack"]
