"""Exception types raised across the package."""


class ElasticAvgError(Exception):
    """Base class for all package errors."""


class ParseError(ElasticAvgError, ValueError):
    pass


class DatasetError(ElasticAvgError, ValueError):
    """Empty or otherwise unusable collection of series."""


class DimensionError(ElasticAvgError, ValueError):
    pass


class ParameterError(ElasticAvgError, ValueError):
    pass


class NumericalUnderflowError(ElasticAvgError, ArithmeticError):
    """A kernel value or alignment mass vanished in double precision."""


class DegenerateDistributionError(ElasticAvgError, ArithmeticError):
    pass


class CoverageError(ElasticAvgError, ArithmeticError):
    """An output timestamp of a pairwise average received no alignment mass."""


class BudgetError(ElasticAvgError, ValueError):
    pass


class InfeasibleError(ElasticAvgError, ValueError):
    """Leave-one-out tuning is impossible for the given training set."""
