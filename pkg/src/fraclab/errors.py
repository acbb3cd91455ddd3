"""Exception types shared across the package."""


class FraclabError(Exception):
    """Base class for all package-specific errors."""


class OrderError(FraclabError, ValueError):
    """A fractional order is outside the admissible range for an operator."""


class ParameterError(FraclabError, ValueError):
    """A parameter block violates an ordering or range constraint."""


class SingularityError(FraclabError, ValueError):
    """A closed-form evaluation would hit a nonintegrable singularity."""


class HypothesisError(FraclabError, ValueError):
    """An input violates the hypotheses an identity or bound requires."""


class GridGeometryError(FraclabError, ValueError):
    """Grids are incompatible, or a support does not fit inside the box."""


class NumericsError(FraclabError, RuntimeError):
    """A quadrature or time step produced non-finite or unstable values."""


class NoInteriorMinimumError(ParameterError):
    """The horizon-optimizing bound has no interior minimum for these
    parameters, so the threshold formula degenerates."""
