"""Exception taxonomy.

The CLI maps these onto process exit codes: invalid chain data or model
files exit with 2, numerical solver failures with 3, violated statistical
preconditions with 4.
"""


class QscertError(Exception):
    """Base class for package-specific errors."""


class ModelError(QscertError):
    """Invalid chain data or model file (CLI exit code 2)."""


class SolverError(QscertError):
    """A numerical routine failed or a residual check did not pass (exit 3)."""


class StatsError(QscertError):
    """A statistical precondition is violated (exit 4)."""


# -- model construction / parsing ------------------------------------------

class DimensionMismatch(ModelError):
    pass


class NegativeRate(ModelError):
    pass


class RowSumViolation(ModelError):
    pass


class NegativeEntry(ModelError):
    pass


class SchemaError(ModelError):
    pass


class SizeGuard(ModelError):
    pass


class NotIrreducible(ModelError):
    pass


# -- numerical analysis ------------------------------------------------------

class PerronFailure(SolverError):
    pass


class SolverDivergence(SolverError):
    pass


class PerronMismatch(SolverError):
    pass


class NonStochastic(SolverError):
    pass


class NotSymmetric(SolverError):
    pass


class NotReversible(SolverError):
    pass


class NoPathToAbsorption(SolverError):
    pass


class OptimizerStall(SolverError):
    pass


class CertificationFailure(SolverError):
    pass


class BoundaryDefect(SolverError):
    pass


class NegativeTime(SolverError):
    pass


class TotalMassUnderflow(SolverError):
    pass


class ReferenceZero(SolverError):
    pass


# -- statistics --------------------------------------------------------------

class TooFewSurvivors(StatsError):
    pass
