"""Dyadic grid laboratory for entropy-bump maximal operators and sparse
commutator inequalities on [0,1)."""

from ._kernels import BACKEND, HAS_NUMBA
from .grid import (
    CellSet,
    DyadicCube,
    GridFunction,
    constant_function,
    cube_average,
    enumerate_cubes,
    grid_function,
    indicator_function,
    level_set,
    weighted_measure,
)
from .orlicz import (
    ToleranceConfig,
    YoungFunction,
    entropy_integral,
    indicator_norm,
    luxemburg_norm,
    young_eval,
    young_inverse,
)
from .maximal import (
    EntropyProfile,
    EpsilonFunction,
    dyadic_maximal,
    entropy_density,
    entropy_density_maximal,
    entropy_maximal,
    epsilon_series,
    orlicz_maximal,
)
from .bmo import BmoSymbol, dyadic_bmo_norm, generate_symbol, oscillation_exp_norm, oscillation_level_measure
from .sparse import (
    CarlesonFamily,
    SignPattern,
    build_sparse_from_function,
    carleson_constant,
    carleson_family,
    exceptional_sets,
    iterated_commutator,
    martingale_transform,
    pointwise_domination_check,
    sparse_commutator_apply,
    stopping_decomposition,
    stratify,
)

__version__ = "0.1.0"
