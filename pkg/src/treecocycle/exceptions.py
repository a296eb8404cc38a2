"""Exception hierarchy shared by every module."""


class TreeCocycleError(Exception):
    """Base class for all errors raised by treecocycle."""


class AddressError(TreeCocycleError, ValueError):
    """Malformed vertex address (bad path, bad text form)."""


class ParameterError(TreeCocycleError, ValueError):
    """Invalid numeric parameter or mismatched tree parameters."""


class DomainError(TreeCocycleError, ValueError):
    """Argument lies outside the domain an operation was built for."""


class ReliabilityError(DomainError):
    """Truncation is too coarse to honour the requested tolerance."""

    def __init__(self, message, required_radius):
        super().__init__(f"{message} (required radius: {required_radius})")
        self.required_radius = required_radius


class ResourceError(TreeCocycleError):
    """The requested computation exceeds the configured truncation budget."""

    def __init__(self, message, required_radius=None):
        if required_radius is not None:
            message = f"{message} (required radius: {required_radius})"
        super().__init__(message)
        self.required_radius = required_radius


class ValidationError(TreeCocycleError, ValueError):
    """Input data violates a structural invariant (symmetry, zero diagonal, range)."""


class PreconditionError(TreeCocycleError, ValueError):
    """An operation's precondition failed; ``report`` carries the evidence."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class KernelParseError(TreeCocycleError, ValueError):
    """Kernel file could not be parsed."""

    def __init__(self, message, line=None, column=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column
