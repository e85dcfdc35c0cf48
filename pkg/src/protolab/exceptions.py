"""protolab exceptions."""


class ProtolabError(Exception):
    """Base exception for protolab."""


# --- numeric core ---------------------------------------------------------

class ZeroNormError(ProtolabError):
    """Raised when a vector with (near) zero norm is normalized."""


class ShapeMismatchError(ProtolabError):
    """Raised when tensors, parameter sets or batches disagree on shape or names."""


class NonFiniteError(ProtolabError):
    """Raised when a NaN or Inf appears where finite values are required."""


# --- environments ---------------------------------------------------------

class UnknownDomainError(ProtolabError):
    """Raised when a domain name is not in the registry."""


class OutOfBoundsError(ProtolabError):
    """Raised when an action leaves the [-1, 1] box."""


class NotResetError(ProtolabError):
    """Raised when an environment is used before reset (or after its episode ended)."""


# --- data buffers and files ----------------------------------------------

class CapacityExceededError(ProtolabError):
    """Raised when more frames are requested than a buffer can hold."""


class InsufficientDataError(ProtolabError):
    """Raised when a buffer holds too little data for the requested operation."""


class BufferFormatError(ProtolabError):
    """Raised when a buffer or checkpoint file cannot be decoded."""


class BadMagicError(BufferFormatError):
    """Raised when a file does not start with the expected magic bytes."""


class TruncatedFileError(BadMagicError):
    """Raised when a file ends before its declared payload."""


class VersionMismatchError(BufferFormatError):
    """Raised when a file was written with an unsupported format version."""


class StorageIOError(ProtolabError):
    """Raised when a buffer, checkpoint or CSV cannot be read or written."""


# --- assignment targets and losses ---------------------------------------

class NotNormalizedError(ProtolabError):
    """Raised when score inputs are not unit vectors."""


class ScoreOverflowError(ProtolabError):
    """Raised when exp(C / epsilon) would overflow."""


class NonPositiveError(ProtolabError):
    """Raised when row/column normalization receives a non-positive entry."""


class PadTooLargeError(ProtolabError):
    """Raised when the random-shift pad is not smaller than the image."""


class DegenerateDenominatorError(ProtolabError):
    """Raised when the intrinsic loss denominator gets too close to zero."""


# --- exploration reward ---------------------------------------------------

class EmptyBatchError(ProtolabError):
    """Raised when a projection-set update receives no candidates."""


class InsufficientNeighborsError(ProtolabError):
    """Raised when the projection set holds fewer than k usable neighbours."""


# --- diagnostics ----------------------------------------------------------

class TooFewPrototypesError(ProtolabError):
    """Raised when coverage is asked for k >= number of prototypes."""


class RankDeficientError(ProtolabError):
    """Raised when the embedding covariance has fewer directions than requested."""


# --- orchestration --------------------------------------------------------

class ConfigInvalidError(ProtolabError):
    """Raised when a run configuration fails validation.

    All problems are collected before raising; ``errors`` holds one message per problem.
    """

    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__(f"Configuration invalid: {'; '.join(errors)}")


class PhaseError(ProtolabError):
    """Raised when a pipeline phase fails; wraps the original error."""

    def __init__(self, phase: str, cause: Exception):
        self.phase = phase
        self.cause = cause
        super().__init__(f"[{phase}] {type(cause).__name__}: {cause}")
