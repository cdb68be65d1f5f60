"""Exception hierarchy shared by all morphodec modules."""


class MorphodecError(Exception):
    """Base class for all errors raised by this package."""


class UnknownSymbol(MorphodecError):
    """Text could not be decomposed into known phoneme symbols."""


class MalformedSyllable(MorphodecError):
    """A syllable segment has no vowel, several vowels, or a consonant cluster."""


class InventoryMiss(MorphodecError):
    """A constructed or referenced diphone is absent from the inventory."""


class ParseError(MorphodecError):
    """A data file line could not be parsed.

    Carries the source name and 1-based line number when known.
    """

    def __init__(self, message, source=None, line=None):
        self.source = source
        self.line = line
        prefix = ""
        if source is not None:
            prefix += str(source)
        if line is not None:
            prefix += f":{line}"
        if prefix:
            message = f"{prefix}: {message}"
        super().__init__(message)


class ValidationError(MorphodecError):
    """A loaded record violates an invariant (which one is in the message)."""


class EmptyObservation(MorphodecError):
    """An observation sequence with zero symbols was passed to the decoder."""


class EmptyResult(MorphodecError):
    """The noise channel deleted every symbol of an utterance."""


class NoAnalysis(MorphodecError):
    """The triangular chart is entirely empty: not a single morpheme was spotted."""
