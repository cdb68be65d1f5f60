"""Morpheme-level decoding of noisy diphone observation streams.

The engine recovers morphologically analyzed eojeol sequences from the
symbol streams of a sub-word speech recognizer: trie-structured HMM
Viterbi spotting over a phonetic-surface-form lexicon, tightly coupled
with tabular morphological and phonological co-analysis.  A desk-scale
Korean language pack is bundled; every language-specific table is data.
"""

from .analyzer import Analysis, EojeolOutput, TriangularTable, analyze, combine, enroll
from .assets import LanguagePack
from .decoder import (CandidateLattice, MorphemeCandidate, ObservationSeq,
                      PruneConfig, ViterbiDecoder, decode, decode_exact, prune_check)
from .errors import (EmptyObservation, EmptyResult, InventoryMiss, MalformedSyllable,
                     MorphodecError, NoAnalysis, ParseError, UnknownSymbol, ValidationError)
from .estimators import EonjeolAnalyzer, TrieViterbiDecoder
from .evaluation import EvalCounts, align_and_count, format_percent
from .lexicon import (LexiconEntry, MorphConnectivity, PhonClass, PhonConnectivity,
                      PosTag, TagSet, compile_headers, load_lexicon,
                      morph_connect_allowed, phon_connect_allowed, serialize_lexicon)
from .phonology import (Diphone, DiphoneInventory, Phoneme, PhonemeTable, Syllable,
                        diphone_class, diphonize, text_to_diphones, tokenize_yale)
from .simulator import (GoldRecord, NoiseChannel, NoiseConfig, corrupt, corrupt_corpus,
                        frame_expand, noise_preset, sample_gold_records)
from .trie_hmm import (HmmParams, TrieHmmIndex, TrieState, build_index,
                       emission_prob, to_dot, transition_prob)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
