"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ValidationError (and subclasses) -> 2,
NumericError -> 3, anything else -> 1.
"""


class MeshflowError(Exception):
    pass


class ValidationError(MeshflowError):
    """Bad input: violated precondition, malformed value, out-of-range index."""


class ParseError(ValidationError):
    """Malformed input file. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateInputError(ValidationError):
    """Geometry with no usable extent/area/faces."""


class NumericError(MeshflowError):
    """Non-finite values or divergence during training/sampling."""


class ReconstructionFailure(MeshflowError):
    """Decoded mesh fully degenerate. Carries the partial output."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class GenerationFailure(MeshflowError):
    """Generated tokens decoded to a degenerate mesh. Carries the raw tokens."""

    def __init__(self, message, tokens=None):
        super().__init__(message)
        self.tokens = tokens
