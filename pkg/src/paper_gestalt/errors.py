"""Exception taxonomy shared by all pipeline stages.

Every error raised by this package derives from PaperGestaltError so the
CLI can map domain failures to a single exit code.
"""


class PaperGestaltError(Exception):
    """Base class for all domain errors."""


# --- acquisition ---------------------------------------------------------

class NoSuchProceedings(PaperGestaltError):
    """Requested (venue, year, track) does not exist in the catalog."""


class NetworkUnavailable(PaperGestaltError):
    """A URL had to be fetched but the network is down and no cache entry exists."""


# --- PDF handling --------------------------------------------------------

class CorruptPdf(PaperGestaltError):
    """File is not parseable as a PDF (or uses features we cannot read)."""


class RasterizationFailure(PaperGestaltError):
    """A page failed to rasterize; the whole record is aborted."""


class TooFewPages(PaperGestaltError):
    """PDF has fewer pages than the minimum the rendering contract requires."""


# --- dataset assembly ----------------------------------------------------

class DuplicateRecordId(PaperGestaltError):
    """Two records with the same id were offered to a manifest."""


class EmptyInput(PaperGestaltError):
    """An operation that needs at least one element got none."""


class ManifestImageMissing(PaperGestaltError):
    """A manifest record points at a gestalt image that is not on disk."""


# --- model ---------------------------------------------------------------

class EmptyClass(PaperGestaltError):
    """A class has zero training examples; weights/training are undefined."""


class PretrainedWeightsUnavailable(PaperGestaltError):
    """Backbone weights were requested but could not be loaded or fetched."""


class DimensionMismatch(PaperGestaltError):
    """Array/image dimensions disagree with what the operation requires."""


# --- evaluation ----------------------------------------------------------

class LengthMismatch(PaperGestaltError):
    """Paired lists (predictions, labels) have different lengths."""


class SingleClassInput(PaperGestaltError):
    """A trade-off curve needs both classes present in the labels."""


class NoFeasiblePoint(PaperGestaltError):
    """No operating point satisfies the requested constraint."""


class CountMismatch(PaperGestaltError):
    """Workload counts are inconsistent (good + bad != submissions)."""
