"""Exception hierarchy.

Every error raised by the library derives from :class:`CostcapError`, so the
CLI can map families of failures onto exit codes without enumerating them.
"""


class CostcapError(Exception):
    """Base class for all library errors."""


class ConfigError(CostcapError, ValueError):
    """Malformed user input (spec files, CLI arguments)."""


class DomainError(CostcapError, ValueError):
    """Argument outside the mathematical domain of a function."""


class BadPmf(DomainError):
    """Probabilities negative or not summing to one."""


class StepMismatch(DomainError):
    """Lattice distributions with different steps were combined."""


class UndefinedDensity(DomainError):
    """Information density with a positive numerator and a null denominator."""


# numeric budget exhaustion (CLI exit 3)
class BudgetError(CostcapError):
    """A compute budget was exhausted."""


class NonConvergence(BudgetError):
    """Iterative solver ran out of iterations before reaching tolerance."""


class BudgetExceeded(BudgetError):
    """Support size or enumeration count exceeded the configured budget."""


class SeriesBudget(BudgetError):
    """A series expansion needed more terms than allowed."""


# infeasibility (CLI exit 4)
class Infeasible(CostcapError):
    """No admissible object exists for the requested parameters."""


class InfeasibleCost(Infeasible):
    """Cost level below the cheapest input letter."""


class InfeasibleType(Infeasible):
    """No n-type satisfies the cost constraint."""


class InfeasibleDistortion(Infeasible):
    """Distortion level outside the open interval (d_min, d_max)."""


class NoPositiveSolution(Infeasible):
    """The Gaussian approximation has no nonnegative root."""
