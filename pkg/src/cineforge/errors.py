"""Exception hierarchy shared across the engine.

Every error raised by this package derives from CineforgeError so callers
can catch one base type at pipeline boundaries. Validation failures also
derive from ValueError to stay friendly to generic callers.
"""

from __future__ import annotations


class CineforgeError(Exception):
    """Base class for all errors raised by cineforge."""


class InvalidInputError(CineforgeError, ValueError):
    """A precondition on an operation's inputs was violated."""


class ConfigValidationError(InvalidInputError):
    """A render configuration field failed validation.

    Carries the offending field name and, when the field has a closed
    domain, the allowed values.
    """

    def __init__(self, field: str, message: str, allowed: tuple | None = None):
        self.field = field
        self.allowed = tuple(allowed) if allowed is not None else None
        detail = f"{field}: {message}"
        if self.allowed is not None:
            detail += f" (allowed: {', '.join(str(v) for v in self.allowed)})"
        super().__init__(detail)


class GenerationError(CineforgeError):
    """A generator backend failed to produce its artifact.

    stage identifies the pipeline stage ("keyframes", "storyboard",
    "voiceover", ...); scene_index is set when the failure is scoped to a
    single scene.
    """

    def __init__(self, message: str, stage: str = "generation",
                 scene_index: int | None = None):
        self.stage = stage
        self.scene_index = scene_index
        super().__init__(message)


class BackendProtocolError(GenerationError):
    """A remote backend answered with a malformed or unexpected payload."""


class UnknownMoodError(CineforgeError, KeyError):
    """Requested music mood is not present in the catalog."""


class MusicFetchError(CineforgeError):
    """A catalog entry resolved but its audio could not be retrieved."""


class EncodeError(CineforgeError):
    """The external encoder was invoked and exited with a failure.

    Carries the exit code and the tail of the encoder's stderr for
    diagnostics.
    """

    def __init__(self, message: str, exit_code: int | None = None,
                 stderr_tail: str = ""):
        self.exit_code = exit_code
        self.stderr_tail = stderr_tail
        super().__init__(message)
