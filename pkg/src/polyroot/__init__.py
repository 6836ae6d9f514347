"""Univariate polynomial root-finding toolkit.

Subdivision with power-sum root counting, proximity and radii estimation,
cluster deflation with verified factors, real-segment solving through the
circle lift, and Ehrlich/secular simultaneous iterations, over dense or
black-box (evaluation-only) polynomials.
"""

from .polycore import (
    Annulus,
    BlackBoxPoly,
    Disc,
    NonFiniteEvaluationError,
    Poly,
    ZeroPolynomialError,
    blackbox_from_poly,
    dft,
    eval_at_roots_of_unity,
    eval_horner,
    iterated_square,
    load_coefficients,
    mandelbrot,
    mandelbrot_map,
    norm,
    reverse,
    save_coefficients,
    shift_scale,
    trailing_coeffs_blackbox,
)
from .radii import (
    AnnuliCover,
    RadiusBracket,
    annuli_cover,
    cauchy_inclusion_radius,
    dandelin_squaring,
    r1_coefficient_bounds,
    turan_r1,
)
from .powersums import (
    ContourRootError,
    PowerSumEstimate,
    coeffs_to_power_sums,
    power_sums_circle,
    power_sums_disc,
    power_sums_to_coeffs_newton,
    power_sums_to_coeffs_schonhage,
)
from .counting import (
    CountResult,
    ExclusionVerdict,
    UndecidedCountError,
    count_roots,
    estimate_isolation,
    exclusion_test,
    max_distance,
    proximity,
)
from .deflation import (
    Deflation,
    SplitState,
    deflate_evalinterp,
    deflate_laser,
    deflate_powersum,
    deflation_policy,
    divide,
    make_split,
    refine_factorization,
    verify_by_roots,
    verify_modular,
)

from .subdivision import (
    Component,
    NewtonResult,
    RootApprox,
    RootReport,
    SolverConfig,
    Square,
    initial_square,
    newton_accelerate,
    root_radius_upper,
    skip_exclusion,
    solve,
    subdivide_step,
)
from .ehrlich import (
    SimState,
    ehrlich_step,
    initialize,
    secular_step,
    solve_all,
    wild_cap,
)

from .realroots import (
    SegmentIsolationError,
    SegmentProblem,
    circle_factor,
    lift_to_circle,
    solve_segment,
    zhukovsky,
    zhukovsky_inverse,
)

__version__ = "0.1.0"
