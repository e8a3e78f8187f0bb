"""Exception hierarchy shared by all qdevices modules."""


class QDevicesError(Exception):
    """Base class for all library errors."""


class ShapeError(QDevicesError, ValueError):
    """Matrix/vector dimensions are inconsistent with the requested operation."""


class DomainError(QDevicesError, ValueError):
    """A scalar or combinatorial parameter is outside its admissible range."""


class SizeCapError(DomainError):
    """A dense construction would exceed the documented dimension cap."""


class InvariantError(QDevicesError, ValueError):
    """An input violates a structural invariant (positivity, trace, unit diagonal, ...)."""


class NotCPError(InvariantError):
    """An operator claimed to be a Choi matrix has a significantly negative eigenvalue."""


class ContractError(QDevicesError, ValueError):
    """A precondition of an operation (e.g. trace preservation) does not hold."""


class TheoremScopeError(QDevicesError, ValueError):
    """The requested decision falls outside the theorem-backed cases this library implements."""


class DecompositionError(QDevicesError, RuntimeError):
    """An iterative decomposition failed to converge; the result would be unsound."""
