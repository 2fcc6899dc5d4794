"""Radial continuous valuations on star bodies.

Star bodies are sampled radial functions on sphere grids; theta-type
valuations are evaluated by quadrature; the Jordan decomposition
``V = V+ - V-`` is computed from the running maximum of theta and checked
against a direct search over ``0 <= g <= f``.
"""

from .errors import (
    BudgetExceeded,
    DomainError,
    GridMismatch,
    InvalidArgument,
    NotAStarSet,
    StarvalError,
    UnboundedBody,
    UnsupportedOperation,
)
from .kernels import BACKEND
from .sphere_grid import SphereGrid, integrate, make_circle_grid, make_latlong_grid, make_mc_grid
from .star_body import (
    BodyGenerator,
    RadialFunction,
    intersection,
    radial_from_membership,
    radial_metric,
    radial_sum,
    rotate,
    rotate_sampled,
    rotation_2d,
    sample,
    union,
)
from .theta import ThetaCurve, decompose_theta, eval_theta, running_max
from .valuation import (
    BlackboxValuation,
    ThetaValuation,
    check_bounded_on_bounded,
    check_continuity,
    check_rotational_invariance,
    evaluate,
    extract_theta,
    valuation_residual,
)
from .jordan import (
    DecompositionReport,
    LadderSearchResult,
    oracle_agreement,
    split_valuation,
    sup_search_decompose,
    verify_decomposition,
)
from .cover_tools import (
    BandSpec,
    NodeSet,
    band_bump,
    distance_to_set,
    outer_band,
    partition_of_unity,
    rim_decay_profile,
    split_function,
)

__version__ = "0.1.0"
