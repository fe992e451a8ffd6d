"""Exception types shared across the package."""


class PgmError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PgmError):
    """Invalid run configuration (bad flags, config file, or ranges)."""


class NumericalError(PgmError):
    """A numerical procedure failed to produce a trustworthy result."""


class SeriesDegreeError(PgmError, IndexError):
    """Requested a coefficient beyond the truncation degree of a series."""


class QuadratureConvergenceError(NumericalError):
    """Doubling the quadrature grid did not stabilize the integral."""


class EigenSolveError(NumericalError):
    """The symmetric eigensolver did not converge."""


class OracleMismatchError(PgmError):
    """Independently computed matrix elements disagree beyond tolerance."""
