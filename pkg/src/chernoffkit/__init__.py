"""Grid-based Chernoff approximation of convex monotone semigroups."""

__version__ = "0.1.0"

from chernoffkit.grid import (  # noqa: E402
    CompactWindow,
    Grid1d,
    GridFunction,
    WeightKappa,
    kappa_norm,
    sample_function,
)
from chernoffkit.operators import SchemeStep, generator_of  # noqa: E402
from chernoffkit.semigroup import chernoff_evolve, make_schedule  # noqa: E402

__all__ = [
    "__version__",
    "CompactWindow",
    "Grid1d",
    "GridFunction",
    "WeightKappa",
    "kappa_norm",
    "sample_function",
    "SchemeStep",
    "generator_of",
    "chernoff_evolve",
    "make_schedule",
]
