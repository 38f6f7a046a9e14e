"""Exception hierarchy shared by all sceneedit modules."""


class SceneEditError(Exception):
    """Base class for every error raised by this package."""


# --- mesh I/O ---------------------------------------------------------------

class ParseError(SceneEditError):
    """A mesh file was malformed for its declared format."""


class UnsupportedFormat(SceneEditError):
    """The requested mesh format is not one of obj/ply/gltf."""


class IoError(SceneEditError):
    """Filesystem-level failure while reading or writing an artifact."""


class DegenerateGeometry(SceneEditError):
    """Geometry cannot support the requested computation (e.g. only
    zero-area faces are incident to a vertex)."""


class InvalidScale(SceneEditError):
    """A transform carries a non-positive uniform scale."""


# --- prompt handling --------------------------------------------------------

class AmbiguousPrompt(SceneEditError):
    """The rule-based parser could not match the prompt to any edit pattern."""


class BackendError(SceneEditError):
    """A remote client (LLM, generator, detector, ...) failed; callers may
    retry with an offline backend."""


class SchemaViolation(SceneEditError):
    """A remote client returned a structure that does not deserialize to the
    expected schema, even after one reparse retry."""


class InvalidTask(SceneEditError):
    """An EditTask violates its invariants; the message names the one that
    failed."""


# --- asset acquisition ------------------------------------------------------

class AllBackendsFailed(SceneEditError):
    """Every configured asset source failed; per-source causes are listed."""

    def __init__(self, causes: dict):
        self.causes = dict(causes)
        detail = "; ".join(f"{src}: {err}" for src, err in self.causes.items())
        super().__init__(f"all asset sources failed ({detail})")


# --- grounding --------------------------------------------------------------

class NotFound(SceneEditError):
    """No scene instance matched the query above the confidence threshold."""


class EmptySelection(SceneEditError):
    """A submesh extraction was asked for zero vertices."""


# --- scaling ----------------------------------------------------------------

class NoValidImages(SceneEditError):
    """No sampled image contained detections for both objects."""


class UnknownCategory(SceneEditError):
    """The prior table has no width entry for a requested category."""


class ImageBackendError(BackendError):
    """The image synthesis client failed."""


# --- placement --------------------------------------------------------------

class NoSupportSurface(SceneEditError):
    """Up-vertex filtering or clustering left no usable support surface."""


class ClusterTooSmall(SceneEditError):
    """A support cluster spans fewer cells than the filter side at level 0."""


class NoFeasibleLocation(SceneEditError):
    """No support cluster yielded a surviving occupied cell at any level."""


# --- editing ----------------------------------------------------------------

class UnknownTag(SceneEditError):
    """The session registry has no object under the given tag."""


class SessionBusy(SceneEditError):
    """Another writer currently holds the session; retry later."""


class EmptyHistory(SceneEditError):
    """Undo was requested but the session history is empty."""
