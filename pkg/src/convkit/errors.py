"""Exception types shared across convkit.

Built-in ``IndexError`` is reused for out-of-range tensor coordinates and
``OSError`` for filesystem failures; everything domain-specific derives from
:class:`ConvKitError` so callers can catch the whole family at once.
"""


class ConvKitError(Exception):
    """Base class for all convkit errors."""


class InvalidShape(ConvKitError):
    """Tensor dimensions are malformed (zero, negative, or inconsistent)."""


class FormatError(ConvKitError):
    """A tensor file is not in the expected binary format."""


class ParseError(ConvKitError):
    """A config file line could not be parsed; carries the line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class InvalidConfig(ConvKitError):
    """A convolution config violates an invariant; carries the field name."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class UnsupportedFilter(ConvKitError):
    """Filter geometry outside the supported set (e.g. even side lengths)."""


class Unsupported(ConvKitError):
    """Requested operation is outside the supported envelope (e.g. stride > 1)."""


class ShapeMismatch(ConvKitError):
    """Operands do not agree with each other or with the config."""


class InvalidPlan(ConvKitError):
    """A launch plan is inconsistent with the config or device limits."""


class WorkspaceExceeded(ConvKitError):
    """Temporary buffer requirement is above the workspace limit."""

    def __init__(self, required: int, limit: int):
        super().__init__(
            f"workspace of {required} bytes exceeds limit of {limit} bytes"
        )
        self.required = required
        self.limit = limit
