"""Exception hierarchy.

Every error the library raises derives from :class:`GlyphnetError`; the
subclasses are grouped by whether they signal bad input data
(:class:`FormatError`) or bad arguments (:class:`ConfigError`).
"""


class GlyphnetError(Exception):
    pass


class FormatError(GlyphnetError, ValueError):
    """Input data is malformed or inconsistent."""


class ConfigError(GlyphnetError, ValueError):
    """An argument or configuration value is out of range."""


class EmptyImage(FormatError):
    pass


class IndivisibleSize(ConfigError):
    pass


class CellCountMismatch(FormatError):
    pass


class DimensionMismatch(FormatError):
    pass


class EmptyDataset(FormatError):
    pass


class InvalidEpsilon(ConfigError):
    pass


class UnknownLetter(ConfigError):
    pass


class MissingLetter(FormatError):
    pass


class WrongRowCount(FormatError):
    pass


class MalformedHeader(FormatError):
    pass


class TruncatedData(FormatError):
    pass


class UnsupportedMaxval(FormatError):
    pass


class RaggedRows(FormatError):
    pass


class InvalidCharacter(FormatError):
    pass


class EmptyInput(FormatError):
    pass


class BadMagic(FormatError):
    pass


class ShapeMismatch(FormatError):
    pass


class NonFiniteValue(FormatError):
    pass


class WrongArity(FormatError):
    pass


class InvalidBit(FormatError):
    pass


class InvalidLabel(FormatError):
    pass
