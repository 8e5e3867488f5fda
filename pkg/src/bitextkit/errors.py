"""Exception hierarchy shared across the toolkit."""


class BitextkitError(Exception):
    """Base class for all toolkit errors."""


class ZeroVector(BitextkitError):
    """A vector with (numerically) zero norm where a direction is required."""


class DimensionMismatch(BitextkitError):
    """Operands have incompatible embedding dimensions."""


class RowCountMismatch(BitextkitError):
    """Row-aligned matrices have different numbers of rows."""


class DegenerateInput(BitextkitError):
    """Input whose Gram matrix is identically zero."""


class EmptyText(BitextkitError):
    """A text argument is empty (after trimming)."""


class NoProfiles(BitextkitError):
    """Language identification requested without enough language profiles."""


class TransportError(BitextkitError):
    """Network-level failure talking to a remote provider (after retries)."""


class ProviderError(BitextkitError):
    """Remote provider returned an error response or unusable payload."""


class NoRuleApplicable(BitextkitError):
    """The offline meaning-flip transform found no edit site in the input."""


class EmptyAfterCleaning(BitextkitError):
    """Document body is empty once markup, URLs and metadata are stripped."""


class TooFewPairs(BitextkitError):
    """Not enough sentence pairs for the requested operation."""


class SchemaError(BitextkitError):
    """A structured input file has wrong columns, fields or enum values."""


class ConsistencyError(BitextkitError):
    """A structured input file is schema-valid but internally inconsistent."""


class MalformedTemplate(BitextkitError):
    """A label template does not contain the placeholder exactly once."""


class UnknownLanguage(BitextkitError):
    """A language code is not present in the data it is resolved against."""


class MismatchedReports(BitextkitError):
    """Two alignment reports cover different languages or variants."""


class ParseError(BitextkitError):
    """A config file could not be parsed."""


class ValidationError(BitextkitError):
    """A config value is outside its allowed range."""
