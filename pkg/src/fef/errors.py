"""Exception hierarchy shared across the toolkit.

Every error raised by fef code subclasses FefError so callers can catch
everything with one handler; EndpointError is kept distinct because the
CLI maps it to a different exit code than input/config errors.
"""


class FefError(Exception):
    """Base class for all fef errors."""


# --- input / decoding ---------------------------------------------------

class EmptyInput(FefError):
    """No frames, no records, or an otherwise empty required input."""


class DimensionMismatch(FefError):
    """Images that must share dimensions do not."""


class DecodeFailure(FefError):
    """External frame decoder exited nonzero or produced nothing."""


class SchemaError(FefError):
    """A structured input file violates its declared schema."""

    def __init__(self, message: str, json_path: str = "$"):
        super().__init__(f"{json_path}: {message}")
        self.json_path = json_path


class RangeError(FefError):
    """A numeric field is outside its documented range."""


class ArityError(FefError):
    """A sequence argument has the wrong length."""


# --- geometry / image regions -------------------------------------------

class DegenerateBox(FefError):
    """A box collapsed to zero area after rounding or clamping."""


class EmptyRegion(FefError):
    """An image region is empty or too small for the requested metric."""


class MissingLandmark(FefError):
    """A required facial keypoint is absent."""


class ZeroRegion(FefError):
    """A region has zero area, so a coverage ratio is undefined."""


class NoFaceDetected(FefError):
    """No frame in the analysed clips carries a tracked face."""


class NoPairs(FefError):
    """No consecutive-frame pairs are available for scoring."""


# --- serialization -------------------------------------------------------

class SerializationError(FefError):
    """Evidence contains a value that cannot be canonically serialized."""


# --- inference endpoint ---------------------------------------------------

class EndpointError(FefError):
    """Transport-level failure talking to the inference endpoint."""


class MissingTagError(FefError):
    """Endpoint output lacks a required tagged span."""

    def __init__(self, tag: str, raw_response: str):
        super().__init__(f"no <{tag}> span in endpoint output")
        self.tag = tag
        self.raw_response = raw_response


class LabelParseError(FefError):
    """An answer span could not be mapped to a real/fake label."""

    def __init__(self, message: str, raw_response: str = ""):
        super().__init__(message)
        self.raw_response = raw_response


class PreconditionError(FefError):
    """A caller-supplied value violates an operation precondition."""


# --- objectives ------------------------------------------------------------

class DomainError(FefError):
    """A probability is outside the domain of the requested loss."""


class DivergentSupport(FefError):
    """KL divergence is undefined: q vanishes where p has mass."""


# --- dataset construction ---------------------------------------------------

class TemplateError(FefError):
    """No prompt template exists for a forgery type."""


# --- evaluation --------------------------------------------------------------

class DegenerateClasses(FefError):
    """AUC needs at least one record of each class."""


class CorpusTooSmall(FefError):
    """Corpus-level text metrics need at least two pairs."""


class ZeroVector(FefError):
    """Cosine similarity is undefined for a zero-norm vector."""
