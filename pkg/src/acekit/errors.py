"""Exception hierarchy shared by all acekit modules.

Two families matter to callers: :class:`DataError` covers inputs that are
malformed or incompatible with the requested operation, and
:class:`NumericalError` covers inputs that are structurally fine but
numerically degenerate. The CLI maps them to exit codes 3 and 4.
"""


class AceError(Exception):
    """Base class for every error raised by acekit."""

    exit_code = 1


class DataError(AceError):
    """Invalid or incompatible input data."""

    exit_code = 3


class NumericalError(AceError):
    """Numerically degenerate input or failed computation."""

    exit_code = 4


# --- matrix construction -------------------------------------------------

class NonFiniteValue(DataError):
    """A NaN or infinity was found where only finite values are allowed."""


class DimensionMismatch(DataError):
    """Shapes or row counts do not line up."""


# --- svd engine -----------------------------------------------------------

class DimensionTooLarge(DataError):
    """Matrix exceeds the exact-decomposition size limit."""


class InvalidRank(DataError):
    """Requested rank is outside the valid range."""


class InvalidFactors(DataError):
    """SVD factors do not satisfy the preconditions of an operation."""


# --- transforms -----------------------------------------------------------

class NegativeInput(DataError):
    """A value that must be non-negative (or positive) is not."""


class InvalidLambda(DataError):
    """Regularization weight outside the range the operation supports."""


class RankExceeded(DataError):
    """Requested output dimension exceeds the available rank."""


class TooLarge(DataError):
    """Dense operator requested above the small-instance guard."""


class DegenerateScale(NumericalError):
    """Global standard deviation is zero; no scale can be recovered."""


class SingularSystem(NumericalError):
    """A linear solve failed; signals numerical corruption."""


class DegenerateInput(NumericalError):
    """Input carries no usable variance (zero spectrum or zero rank)."""


# --- diagnostics ----------------------------------------------------------

class ZeroVector(NumericalError):
    """A sampled row has (numerically) zero norm; cosine is undefined."""


class InvalidK(DataError):
    """Neighborhood size out of range."""


class RankTooLow(DataError):
    """Input rank is below what the operation requires."""


# --- synthetic generators ---------------------------------------------------

class InvalidSpec(DataError):
    """Synthetic-data specification is inconsistent."""


# --- file I/O ---------------------------------------------------------------

class BadMagic(DataError):
    """File header is not a valid EMB1 header."""


class TruncatedFile(DataError):
    """File length disagrees with its header (or the file is empty)."""


class RaggedCsv(DataError):
    """CSV rows have inconsistent widths."""


class CsvParseError(DataError):
    """A CSV field could not be parsed as a number."""


class NonRepresentable(DataError):
    """Value cannot be stored in the requested on-disk precision."""


class IoFailure(DataError):
    """Underlying filesystem operation failed."""
