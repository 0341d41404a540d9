"""Canonical heights on the boundary of the ample cone of Wehler surfaces.

The package computes, for a (2, 2, 2) surface in P1 x P1 x P1 over Q
with Picard rank 3, the canonical height of a rational point in any
boundary direction of the ample cone: irrational rays through the
reflection-group coding of the hyperbolic boundary circle, rational
(cusp) rays through the parabolic height pairing of the corresponding
genus-one fibration, and the expanded/contracted rays of hyperbolic
automorphisms through power limits.  On top of the heights sit the orbit
invariants: star sets, total heights, and invariance reports.

The hot kernel (exact Vieta steps on projective coordinates) has a
compiled and a pure-Python implementation; `kernel_backend()` reports
which one is active, selectable via the K3H_KERNEL environment variable.
"""

from ._kernel import BACKEND as _KERNEL_BACKEND
from .cache import OrbitCache
from .defaults import (
    DEFAULT_SEED,
    default_periodic_point,
    default_point,
    default_surface,
)
from .errors import (
    DegenerateFiber,
    InputError,
    K3HeightsError,
    NoIntegralFixedNullVector,
    NonConvergence,
    NonParabolicInput,
    NotIsometry,
    VerificationFailure,
)
from .heights import (
    HeightValue,
    canonical_boundary_height,
    eta_h_telescoped,
    finite_fiber_order,
    hyperbolic_canonical_height,
    rational_boundary_height,
    vcan_pairing,
)
from .hyperbolic import (
    BoundaryPoint,
    CodedRay,
    GeneratorWord,
    angle_of,
    angular_distance,
    code_boundary_ray,
    diagonalize_form,
    exact_ray,
    from_diag,
    horoball_depth,
    hyp_distance,
    null_ray,
    op_norm,
    reduce_to_chamber,
    to_diag,
)
from .invariants import (
    InvarianceReport,
    StarSample,
    TotalHeightResult,
    invariance_report,
    radius_jump_profile,
    star_set,
    star_volume,
    total_height,
    write_star_csv,
)
from .lattice import (
    FiniteOrder,
    GramLattice,
    Hyperbolic,
    Isometry,
    Parabolic,
    classify_isometry,
    exp_parabolic,
    is_isometry,
    ns_norm_sq,
    parabolic_xi,
    parse_word,
    reduce_word,
    reduced_words,
    wehler_lattice,
    word_matrix,
    word_str,
)
from .wehler import (
    OrbitResult,
    ProjPoint,
    SurfacePoint,
    WehlerSurface,
    basis_height,
    origin_point,
    orbit_states,
    random_surface,
)

__version__ = "0.1.0"


def kernel_backend() -> str:
    """Name of the active Vieta kernel: "compiled" or "pure"."""
    return _KERNEL_BACKEND
