"""Exception hierarchy shared by all fpdsynth modules."""


class FpdError(Exception):
    """Base class for every error raised by fpdsynth."""


class InvalidSpecError(FpdError, ValueError):
    """A design specification or operation argument is out of its domain."""


class DomainError(InvalidSpecError):
    """A numeric argument lies outside the domain of a mapping."""


class InvalidInputError(FpdError, ValueError):
    """Input data (sweeps, files) does not satisfy an operation's preconditions."""


class NetlistError(FpdError, ValueError):
    """Netlist syntax or semantic error.

    ``line`` and ``column`` are 1-based and ``None`` when the error is not
    tied to a source position (for example a connectivity failure).
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{loc}: {message}"
        super().__init__(message)


class SingularSystemError(FpdError, ArithmeticError):
    """A per-frequency linear system could not be solved."""

    def __init__(self, message, frequency=None):
        self.frequency = frequency
        super().__init__(message)


class ExtractionError(FpdError):
    """Coupling/quality-factor extraction found no usable resonance signature."""


class FileFormatError(FpdError, ValueError):
    """Malformed Touchstone, CSV or plan file."""
