"""Exception hierarchy shared by all gp2d modules."""


class Gp2dError(Exception):
    """Base class for all gp2d errors."""


class ConfigError(Gp2dError):
    """Invalid or unknown configuration input."""


class QuadratureError(Gp2dError):
    """A quadrature produced a non-finite or non-converged result."""


class SolverError(Gp2dError):
    """An ODE / eigenvalue / root solver failed to converge."""


class ConsistencyError(Gp2dError):
    """An internal mathematical invariant was violated."""


class SizeError(Gp2dError):
    """A basis or matrix exceeds the configured size cap."""
