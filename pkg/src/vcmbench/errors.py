"""Exception hierarchy shared across the toolkit."""


class VcmbenchError(Exception):
    """Base class for all toolkit errors."""


class ImageFormatError(VcmbenchError):
    """A file could not be parsed as a supported image container."""


class BitstreamError(VcmbenchError):
    """A builtin-codec bitstream is malformed, truncated, or corrupt."""


class CodecRunError(VcmbenchError):
    """An external codec invocation failed.

    Carries enough context to debug the failing command.
    """

    def __init__(self, message, *, codec=None, quality=None, stderr=None):
        super().__init__(message)
        self.codec = codec
        self.quality = quality
        self.stderr = stderr

    def __str__(self):
        base = super().__str__()
        parts = []
        if self.codec is not None:
            parts.append(f"codec={self.codec}")
        if self.quality is not None:
            parts.append(f"q={self.quality}")
        prefix = f"[{', '.join(parts)}] " if parts else ""
        suffix = f"\nstderr:\n{self.stderr}" if self.stderr else ""
        return f"{prefix}{base}{suffix}"


class ConfigError(VcmbenchError):
    """An experiment configuration is invalid or inconsistent."""


class CurveError(VcmbenchError):
    """A rate-quality curve violates the requirements of an operation."""


class SweepAbortedError(VcmbenchError):
    """A sweep exceeded its failure budget and was aborted."""
