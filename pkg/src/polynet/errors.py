"""Exception hierarchy shared by the library and the command-line front end."""


class PolynetError(Exception):
    """Base class for all library errors."""


class DimensionError(PolynetError, ValueError):
    """Point or coefficient dimensions do not match."""


class BasisOverflowError(PolynetError, OverflowError):
    """A monomial basis size exceeds the exact 64-bit integer range."""


class LPIterationError(PolynetError, ArithmeticError):
    """The simplex method hit its iteration cap and no exact fallback applied."""


class EigenConvergenceError(PolynetError, ArithmeticError):
    """Jacobi sweeps did not converge within the iteration cap."""


class NotPSDError(PolynetError, ValueError):
    """A moment matrix has an eigenvalue below the PSD tolerance."""


class InfeasibleError(PolynetError, ArithmeticError):
    """A feasibility problem that should be solvable was found infeasible."""


class CapabilityError(PolynetError):
    """A request falls outside the configured exact regime (size caps)."""


class DegenerateInputError(PolynetError, ValueError):
    """An operation is undefined for the given degenerate input."""
