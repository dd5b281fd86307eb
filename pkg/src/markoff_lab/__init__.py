"""Computational laboratory for the Markoff-type surfaces x^2 + y^2 + z^2 - xyz = a.

Submodules:

    arith     factorization and multiplicative functions
    expsums   exact complete exponential sums via point counting
    singular  singular-series approximants and local factors
    markoff   admissibility, Vieta descent and integral point search
    density   smooth weights and real densities
    variance  weighted representation counts and the approximate variance
    delta     delta-method kernel and quadratic-form main terms
    census    sweep over |a| <= A and the ``census`` command line tool
"""

__version__ = "0.1.0"


class BudgetExceeded(RuntimeError):
    """Raised when an enumeration would exceed the configured work budget."""
