"""Schmidt vectors of bipartite mixed states via the majorization lattice."""

from .ensemble import OptimizerConfig
from .majorization import ProbVector, builtin_f, is_majorized, lattice_supremum
from .quantum import DensityMatrix, PureState
from .schmidt import (
    SchmidtResult,
    convex_roof,
    monotone_nu,
    schmidt_rank,
    schmidt_vector,
    top_monotone,
)
from .states import make_isotropic, make_max_entangled, make_separable

__version__ = "0.1.0"

__all__ = [
    "DensityMatrix",
    "OptimizerConfig",
    "ProbVector",
    "PureState",
    "SchmidtResult",
    "builtin_f",
    "convex_roof",
    "is_majorized",
    "lattice_supremum",
    "make_isotropic",
    "make_max_entangled",
    "make_separable",
    "monotone_nu",
    "schmidt_rank",
    "schmidt_vector",
    "top_monotone",
]
