"""Exception types raised across the package."""


class RBFError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(RBFError, ValueError):
    """A kernel, configuration or operation parameter is outside its domain."""


class DomainError(RBFError, ValueError):
    """An argument lies outside the domain of the operation (e.g. r < 0)."""


class GeometryError(RBFError, ValueError):
    """Invalid point set: duplicates, points outside the domain, too few points."""


class UnisolvencyError(RBFError):
    """The centers are not unisolvent for the required polynomial space."""


class ConditioningError(RBFError):
    """A linear solve failed or its residual check did not pass."""

    def __init__(self, message, condition_estimate=None):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class NumericalPDError(RBFError):
    """A quadratic form that must be nonnegative came out clearly negative."""


class StencilError(RBFError):
    """A local polynomial reproduction stencil is not unisolvent."""


class QuadratureError(RBFError):
    """A quadrature did not reach the requested accuracy."""


class ResolutionError(RBFError, ValueError):
    """An evaluation grid is too coarse for the requested derivative order."""


class SmoothnessError(RBFError, ValueError):
    """A bump function is not smooth enough for the requested operator."""


class InsufficientDataError(RBFError, ValueError):
    """Too few usable data points for a rate fit."""


class BudgetError(RBFError):
    """A configured resource budget (points, grid nodes, runtime) was exceeded."""


class ConfigError(RBFError, ValueError):
    """An experiment configuration is malformed or inadmissible."""
