"""Deflation routes (power sums, evaluation/interpolation, Taylor section),
factor verification, division backends, and Newton refinement of splittings."""

import math

import numpy as np
import pytest

from polyroot.deflation import (
    Deflation,
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
from polyroot.oracles import build_from_roots, expand_family, long_division
from polyroot.polycore import Poly, blackbox_from_poly, mandelbrot_map, norm
from polyroot.radii import cauchy_inclusion_radius

EPS = 1e-12
COEFF_TOL = 1e-8


def _wild_tame(w, dg, seed):
    """Constructed p = f*g: w wild roots inside D(0,1/2), dg tame roots just
    outside D(0,2).  The tame moduli stay in [2.02, 2.1]: the power-sum route
    loses ~2w*log2(maxtame) bits to cancellation, and wider tame rings push
    the recovered coefficients past the 1e-8 contract."""
    rng = np.random.default_rng(seed)
    rf = rng.uniform(0.05, 0.5, w) * np.exp(2j * np.pi * rng.uniform(0, 1, w))
    rg = rng.uniform(2.02, 2.1, dg) * np.exp(2j * np.pi * rng.uniform(0, 1, dg))
    return build_from_roots(rf), build_from_roots(rg), rf, rg


# ------------------------------------------------------------ deflate_powersum

def test_powersum_recovers_small_factor():
    # wild {0.1, 0.2}, tame {5}: factor x^2 - 0.3x + 0.02
    p = build_from_roots([0.1, 0.2, 5.0])
    defl = deflate_powersum(p, [5.0], 2)
    assert defl.method == "powersum"
    assert np.max(np.abs(defl.factor.coeffs - np.array([0.02, -0.3, 1.0]))) <= COEFF_TOL
    assert defl.residual <= EPS
    assert defl.verified == "unverified"


def test_powersum_b_loss_closed_form():
    """b_loss is the worst log2 |s_h| / |s_h,wild| over h = 1..2w.  For wild
    {0.1, 0.2} against tame {5} the max sits at h = 4."""
    p = build_from_roots([0.1, 0.2, 5.0])
    defl = deflate_powersum(p, [5.0], 2)
    want = math.log2((0.1**4 + 0.2**4 + 5.0**4) / (0.1**4 + 0.2**4))
    assert abs(defl.b_loss - want) <= 1e-9


def test_powersum_full_degree_is_monic_p():
    p = build_from_roots([0.3, -0.4])
    defl = deflate_powersum(p, [], 2)
    assert np.max(np.abs(defl.factor.coeffs - p.monic().coeffs)) <= EPS
    assert defl.b_loss == 0.0


def test_powersum_pure_power():
    defl = deflate_powersum(Poly([0.0, 0.0, 0.0, 1.0]), [0.0], 2)
    assert np.max(np.abs(defl.factor.coeffs - np.array([0.0, 0.0, 1.0]))) <= EPS


def test_powersum_blackbox_matches_dense():
    # black-box route estimates the full power sums on a wide enclosing disc
    p = build_from_roots([0.1, 0.2, 5.0])
    defl = deflate_powersum(blackbox_from_poly(p), [5.0], 2)
    assert np.max(np.abs(defl.factor.coeffs - np.array([0.02, -0.3, 1.0]))) <= COEFF_TOL
    assert defl.residual is None


def test_powersum_cancellation_raises():
    """One tame root at 4.6e15 against a wild root at 1: s_1 cancels
    4.6e15/1 = 2^52.03 > the 52-bit budget.  Coefficients are exact in
    binary64 (integers below 2^53), so the raise is deterministic."""
    t = 4.6e15
    p = Poly([t, -(t + 1.0), 1.0])
    with pytest.raises(ArithmeticError, match="cancellation"):
        deflate_powersum(p, [t], 1)


def test_powersum_validates_inputs():
    p = build_from_roots([0.1, 0.2, 5.0])
    with pytest.raises(ValueError):
        deflate_powersum(p, [5.0], 0)
    with pytest.raises(ValueError):
        deflate_powersum(p, [5.0], 3)  # tame count != d - w


# ---------------------------------------------------------- deflate_evalinterp

def test_evalinterp_exact_linear():
    p = build_from_roots([0.25, 4.0])
    defl = deflate_evalinterp(p, [4.0], 1)
    assert defl.method == "evalinterp"
    assert np.max(np.abs(defl.factor.coeffs - np.array([-0.25, 1.0]))) <= EPS
    assert defl.residual <= EPS


def test_evalinterp_matches_quadratic_cofactor():
    """Degree-4 composition-family polynomial x^4 + 2x^3 + x^2 + x: with the
    root 0 and the real cubic root tame, the remaining quadratic is
    x^2 + (2+r)x - 1/r for the cubic root r (bisection oracle)."""
    p3 = expand_family("mandelbrot-map", 3)
    assert np.max(np.abs(p3.coeffs - np.array([0.0, 1.0, 1.0, 2.0, 1.0]))) == 0.0

    def cubic(x):
        return ((x + 2.0) * x + 1.0) * x + 1.0

    lo, hi = -2.0, -1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cubic(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    r = 0.5 * (lo + hi)
    oracle = np.array([-1.0 / r, 2.0 + r, 1.0])
    defl = deflate_evalinterp(mandelbrot_map(3), [0.0, r], 2)
    assert np.max(np.abs(defl.factor.coeffs - oracle)) <= 1e-6
    assert defl.residual <= 1e-9


def test_evalinterp_round_trip_no_tame():
    p = build_from_roots([0.3 + 0.1j, -0.2, 0.45])
    defl = deflate_evalinterp(p, [], 3)
    assert np.max(np.abs(defl.factor.coeffs - p.monic().coeffs)) <= EPS


def test_evalinterp_retries_on_collision():
    # tame root at 1.0 sits exactly on the first sample grid; the rotated
    # retry must land the linear factor anyway
    p = build_from_roots([1.0, 0.5])
    defl = deflate_evalinterp(p, [1.0], 1)
    assert np.max(np.abs(defl.factor.coeffs - np.array([-0.5, 1.0]))) <= EPS


def test_evalinterp_double_collision_raises():
    # one tame root on each sample grid (original and rotated) exhausts the
    # single retry
    rot = np.exp(1j * np.pi / 6.0)
    p = build_from_roots([1.0, rot, 0.5])
    with pytest.raises(ArithmeticError, match="collide"):
        deflate_evalinterp(p, [1.0, rot], 1)


def test_evalinterp_validates_inputs():
    p = build_from_roots([0.25, 4.0])
    with pytest.raises(ValueError):
        deflate_evalinterp(p, [4.0], 1, R=0.0)
    with pytest.raises(ValueError):
        deflate_evalinterp(p, [], 1)  # tame count != d - w


# --------------------------------------------------------------- deflate_laser

def test_laser_section_at_zero():
    # x^2(x-1) mod x^3 = -x^2: the raw section, not normalized
    defl = deflate_laser(Poly([0.0, 0.0, -1.0, 1.0]), 0.0, w=2)
    assert defl.method == "laser"
    assert np.max(np.abs(defl.factor.coeffs - np.array([0.0, 0.0, -1.0]))) == 0.0
    assert defl.caveat is not None


def test_laser_infers_cluster_size():
    # (x-1)^2 at c=1: derivatives 0, 0, 2 -> w = 2, section is the whole p
    defl = deflate_laser(Poly([1.0, -2.0, 1.0]), 1.0)
    assert defl.factor.degree == 2
    assert np.max(np.abs(defl.factor.coeffs - np.array([1.0, -2.0, 1.0]))) <= EPS


def test_laser_no_cluster_raises():
    with pytest.raises(ArithmeticError, match="no cluster boundary"):
        deflate_laser(Poly([-1.0, 0.0, 1.0]), 5.0)


def test_laser_lower_bound_instance():
    """p = (x+rho)^3 * (1 + x + ... + x^7): the section at 0 misses the true
    cluster factor by exactly 3rho(1+rho)^2 in one-norm, which bounds w*rho
    from above, never below."""
    rho = 1e-3
    f = Poly([rho**3, 3.0 * rho**2, 3.0 * rho, 1.0])
    p = f * Poly(np.ones(8))
    defl = deflate_laser(p, 0.0, w=3)
    gap = norm(defl.factor - f, "one")
    closed = 3.0 * rho * (1.0 + rho) ** 2
    assert abs(gap - closed) <= 1e-12 * closed
    assert gap >= 3.0 * rho


def test_laser_blackbox_matches_dense():
    defl = deflate_laser(blackbox_from_poly(Poly([0.0, 0.0, -1.0, 1.0])), 0.0, w=2)
    assert np.max(np.abs(defl.factor.coeffs - np.array([0.0, 0.0, -1.0]))) <= 1e-6


def test_deflation_record_validates_tags():
    with pytest.raises(ValueError):
        Deflation(factor=Poly([-1.0, 1.0]), method="magic")
    with pytest.raises(ValueError):
        Deflation(factor=Poly([-1.0, 1.0]), method="laser", verified="sworn")
    with pytest.raises(ValueError):
        Deflation(factor=Poly([2.0]), method="laser")


# -------------------------------------------------------------- verify_by_roots

def test_verify_by_roots_accepts_true_factor():
    p = build_from_roots([0.25, 4.0])
    assert verify_by_roots(p, Poly([-0.25, 1.0]), 1e-6)
    assert verify_by_roots(p, p.monic(), 1e-6)


def test_verify_by_roots_rejects_wrong_factor():
    """At the wrong root 1/3 the inclusion radius is d|p/p'| = 22/129, far
    above any sane tolerance."""
    p = build_from_roots([0.25, 4.0])
    rho = cauchy_inclusion_radius(p, 1.0 / 3.0)
    assert abs(rho - 22.0 / 129.0) <= EPS
    assert not verify_by_roots(p, Poly([-1.0 / 3.0, 1.0]), 1e-6)


def test_verify_by_roots_degree_cap():
    big = np.zeros(66)
    big[0], big[65] = -1.0, 1.0
    with pytest.raises(ValueError):
        verify_by_roots(Poly(big), Poly(big))


# --------------------------------------------------------------- verify_modular

def test_verify_modular_hand_example():
    # p = x^2 + x - 2, factor x - 1: p mod x^2 = x - 2 and
    # (x-1)(x+2) mod x^2 = x - 2 agree exactly
    p = Poly([-2.0, 1.0, 1.0])
    assert verify_modular(p, Poly([-1.0, 1.0]))
    assert verify_modular(p, Poly([-1.0, 1.0]), moduli=[("xpow", 2)])


def test_verify_modular_rejects_wrong_factor():
    p = Poly([-2.0, 1.0, 1.0])
    assert not verify_modular(p, Poly([-1.1, 1.0]))
    # the wrap modulus sees the same 0.31 residual: (x-1.1)(x+2.1) differs
    # from p by 0.31 in the constant term
    assert not verify_modular(p, Poly([-1.1, 1.0]), moduli=[("one_minus_xpow", 2)])


def test_verify_modular_exact_product_passes_tight_threshold():
    """Quarter-integer coefficients keep the product and the division exact
    in binary64, so the residual is exactly zero and clears even the
    symbolic low-degree threshold."""
    rng = np.random.default_rng(17)
    f = Poly(np.concatenate([rng.integers(-4, 5, 4) / 4.0, [1.0]]))
    q = Poly(np.concatenate([rng.integers(-4, 5, 12) / 4.0, [1.0]]))
    p = f * q
    assert p.degree == 16
    assert verify_modular(p, f, moduli=[("xpow", 9)], eps=1e-8)
    assert verify_modular(p, f, eps=1e-8)


def test_verify_modular_inconclusive_is_distinct():
    with pytest.raises(ArithmeticError, match="inconclusive"):
        verify_modular(Poly([1.0, 0.0, 1.0]), Poly([0.0, 1.0]))


def test_verify_modular_reverse_side_reuses_quotient():
    """Regression: the reverse-side check must not re-divide the reversed
    inputs.  The reversed factor's roots are the reciprocals of the wild
    roots (moduli up to 20 here), and long division against them amplifies
    the factor's ~1e-9 coefficient error by orders of magnitude."""
    f, g, rf, rg = _wild_tame(2, 21, 11)
    p = f * g
    defl = deflate_powersum(p, list(rg), 2)
    assert verify_modular(p, defl.factor, eps=1e-6)


# ----------------------------------------------------------------------- divide

def test_divide_linear_divisor():
    p = Poly([-1.0, 0.0, 1.0])
    v = Poly([-1.0, 1.0])
    for method in ("coefficient", "evalinterp"):
        q, r = divide(p, v, method)
        assert np.max(np.abs(q.coeffs - np.array([1.0, 1.0]))) <= EPS
        assert norm(r, "one") <= EPS
    q, r = divide(p, v, "modreduce")
    assert q is None
    assert norm(r, "one") <= EPS


def test_divide_quadratic_divisor():
    # x^3 = x(x^2+1) - x
    p = Poly([0.0, 0.0, 0.0, 1.0])
    v = Poly([1.0, 0.0, 1.0])
    for method in ("coefficient", "evalinterp"):
        q, r = divide(p, v, method)
        assert np.max(np.abs(q.coeffs - np.array([0.0, 1.0]))) <= EPS
        assert np.max(np.abs(r.coeffs - np.array([0.0, -1.0]))) <= EPS
    q, r = divide(p, v, "modreduce")
    assert q is None
    assert np.max(np.abs(r.coeffs - np.array([0.0, -1.0]))) <= EPS
    # the point-set form of the same divisor
    q, r = divide(p, [1.0j, -1.0j], "modreduce")
    assert q is None
    assert np.max(np.abs(r.coeffs - np.array([0.0, -1.0]))) <= EPS


def test_divide_methods_agree_with_long_division():
    """Random dense degree 20 over a degree-6 divisor with roots in the
    0.2..0.8 ring, against the schoolbook oracle."""
    rng = np.random.default_rng(0xC0FFEE)
    vroots = rng.uniform(0.2, 0.8, 6) * np.exp(2j * np.pi * rng.uniform(0, 1, 6))
    v = build_from_roots(vroots)
    p = Poly(rng.standard_normal(21) + 1j * rng.standard_normal(21))
    q0, r0 = long_division(p, v)
    for method in ("coefficient", "evalinterp"):
        q, r = divide(p, v, method)
        assert r.degree < v.degree
        assert norm(q - q0, "one") <= COEFF_TOL * norm(q0, "one")
        assert norm(r - r0, "one") <= COEFF_TOL * norm(p, "one")
        assert norm(p - (q * v + r), "one") <= COEFF_TOL * norm(p, "one")
    q, r = divide(p, list(vroots), "modreduce")
    assert q is None
    assert norm(r - r0, "one") <= COEFF_TOL * norm(p, "one")


def test_divide_blackbox_evalinterp():
    rng = np.random.default_rng(0xC0FFEE)
    vroots = rng.uniform(0.2, 0.8, 6) * np.exp(2j * np.pi * rng.uniform(0, 1, 6))
    v = build_from_roots(vroots)
    p = Poly(rng.standard_normal(21) + 1j * rng.standard_normal(21))
    q0, r0 = long_division(p, v)
    q, r = divide(blackbox_from_poly(p), v, "evalinterp")
    assert norm(q - q0, "one") <= COEFF_TOL * norm(q0, "one")
    assert norm(r - r0, "one") <= COEFF_TOL * norm(p, "one")


def test_divide_scalar_and_errors():
    p = Poly([2.0, 4.0])
    q, r = divide(p, Poly([2.0]))
    assert np.max(np.abs(q.coeffs - np.array([1.0, 2.0]))) <= EPS
    assert r.is_zero
    with pytest.raises(ZeroDivisionError):
        divide(p, Poly([0.0]))
    with pytest.raises(TypeError):
        divide(p, [0.5], "coefficient")
    with pytest.raises(TypeError):
        divide(blackbox_from_poly(p), Poly([1.0, 1.0]), "coefficient")
    with pytest.raises(ValueError):
        divide(p, [], "modreduce")
    with pytest.raises(ValueError):
        divide(p, Poly([1.0, 1.0]), "bisection")


# ------------------------------------------------- make_split / refinement

def test_make_split_exact_pair():
    p = Poly([-1.0, 0.0, 1.0])
    state = make_split(p, [Poly([-1.0, 1.0]), Poly([1.0, 1.0])])
    assert state.delta <= EPS
    assert state.sigma <= EPS
    # partial fractions of 1/(x^2-1): h1 = 1/2 at x=1, h2 = -1/2 at x=-1
    assert np.max(np.abs(state.cofactors_h[0].coeffs - np.array([0.5]))) <= EPS
    assert np.max(np.abs(state.cofactors_h[1].coeffs - np.array([-0.5]))) <= EPS


def test_refine_exact_split_is_fixed_point():
    p = Poly([-1.0, 0.0, 1.0])
    state = make_split(p, [Poly([-1.0, 1.0]), Poly([1.0, 1.0])])
    out = refine_factorization(p, state, 2)
    assert len(out.history) == 2
    assert all(delta <= 1e-14 for delta, _ in out.history)


def test_refine_contracts_perturbed_pair():
    # roots off by 1e-2: three iterations take delta from 1e-2 to the floor,
    # decreasing at every step
    p = Poly([-1.0, 0.0, 1.0])
    state = make_split(p, [Poly([-1.01, 1.0]), Poly([1.01, 1.0])])
    out = refine_factorization(p, state, 3)
    deltas = [d for d, _ in out.history]
    assert deltas[0] < state.delta
    assert deltas[1] < deltas[0]
    assert deltas[2] <= deltas[1]
    assert deltas[2] < 1e-8
    assert np.max(np.abs(out.factors[0].coeffs - np.array([-1.0, 1.0]))) <= 1e-8


def test_refine_three_linear_factors():
    p = build_from_roots([1.0, 2.0, 3.0])
    factors = [Poly([-(1.0 + 1e-3), 1.0]), Poly([-(2.0 - 1e-3), 1.0]), Poly([-(3.0 + 1e-3), 1.0])]
    out = refine_factorization(p, make_split(p, factors), 4)
    assert out.delta < 1e-9


def test_refine_divergence_raises():
    # garbage cofactors on an already-bad split: delta must blow past 10x
    # its starting value and be reported, not returned
    p = Poly([-1.0, 0.0, 1.0])
    state = make_split(
        p,
        [Poly([-1.3, 1.0]), Poly([0.6, 1.0])],
        cofactors_h=[Poly([40.0]), Poly([-40.0])],
    )
    with pytest.raises(ArithmeticError, match="diverged"):
        refine_factorization(p, state, 5)


def test_refine_quadratic_contraction_constant():
    """Once delta <= 1e-3 the iteration is quadratic: delta_{k+1} <=
    C * delta_k^2 with a modest C.  Cofactors come from the constructed
    roots, so no inner root-finding is involved."""
    rng = np.random.default_rng(42)
    rf = rng.uniform(0.05, 0.5, 2) * np.exp(2j * np.pi * rng.uniform(0, 1, 2))
    rg = rng.uniform(2.02, 2.1, 5) * np.exp(2j * np.pi * rng.uniform(0, 1, 5))
    f, g = build_from_roots(rf), build_from_roots(rg)
    p = f * g
    f_pert = Poly(f.coeffs + np.array([1e-4, -1e-4, 0.0]))
    g_pert = Poly(g.coeffs + np.concatenate([[1e-4], np.zeros(5)]))

    def lagrange(points, values):
        n = len(points)
        coeffs = np.zeros(n, dtype=complex)
        for i in range(n):
            num = np.array([1.0 + 0j])
            den = 1.0 + 0j
            for j in range(n):
                if j != i:
                    num = np.convolve(num, [-points[j], 1.0])
                    den *= points[i] - points[j]
            coeffs[: num.size] += values[i] * num / den
        return Poly(coeffs)

    h1 = lagrange(list(rf), [1.0 / g(y) for y in rf])
    h2 = lagrange(list(rg), [1.0 / f(y) for y in rg])
    state = make_split(p, [f_pert, g_pert], cofactors_h=[h1, h2])
    assert state.delta <= 1e-3
    out = refine_factorization(p, state, 4)
    deltas = [state.delta] + [d for d, _ in out.history]
    fitted = [
        deltas[k + 1] / deltas[k] ** 2
        for k in range(len(deltas) - 1)
        if deltas[k] <= 1e-3 and deltas[k + 1] > 1e-14
    ]
    assert fitted
    assert max(fitted) <= 1e4


def test_refine_validates_cofactor_count():
    p = Poly([-1.0, 0.0, 1.0])
    state = make_split(p, [Poly([-1.0, 1.0]), Poly([1.0, 1.0])])
    state.cofactors_h = state.cofactors_h[:1]
    with pytest.raises(ValueError):
        refine_factorization(p, state, 1)


# ------------------------------------------------------------ deflation_policy

def test_deflation_policy_table():
    assert deflation_policy(3, 64)
    assert not deflation_policy(40, 64)
    assert deflation_policy(32, 64)  # ratio exactly nu: boundary inclusive
    assert not deflation_policy(65, 130)  # ratio fine, component over the cap
    assert not deflation_policy(1, 1)


def test_deflation_policy_validates():
    with pytest.raises(ValueError):
        deflation_policy(3, 64, nu=1.0)
    with pytest.raises(ValueError):
        deflation_policy(0, 64)
    with pytest.raises(ValueError):
        deflation_policy(65, 64)


# ------------------------------------------------------------ two-route corpus

# (w, dg, seed, powersum_modular): the modular check on the power-sum route
# is asserted only where its cancellation floor clears the acceptance
# threshold; the interpolation route is asserted everywhere.  Degrees 10..20
# are skipped for the modular half (symbolic threshold window).
CORPUS_CELLS = [
    (1, 8, 5, True),
    (2, 5, 1, True),
    (2, 21, 11, True),
    (3, 25, 2, True),
    (4, 5, 3, True),
    (4, 21, 4, True),
    (4, 30, 7, True),
    (6, 35, 21, False),
    (8, 8, 9, False),
    (8, 42, 13, False),
]


@pytest.mark.parametrize("w,dg,seed,ps_modular", CORPUS_CELLS)
def test_both_routes_recover_wild_factor(w, dg, seed, ps_modular):
    f, g, rf, rg = _wild_tame(w, dg, seed)
    p = f * g
    ps = deflate_powersum(p, list(rg), w)
    ei = deflate_evalinterp(p, list(rg), w)
    assert np.max(np.abs(ps.factor.coeffs - f.coeffs)) <= COEFF_TOL
    assert np.max(np.abs(ei.factor.coeffs - f.coeffs)) <= COEFF_TOL
    assert ps.b_loss is not None and ps.b_loss <= 52.0
    assert verify_modular(p, ei.factor, eps=1e-6)
    if ps_modular:
        assert verify_modular(p, ps.factor, eps=1e-6)


def test_wrong_factor_fails_both_verifications():
    f, g, rf, rg = _wild_tame(2, 21, 11)
    p = f * g
    wrong = build_from_roots([rf[0] + 0.05, rf[1]])
    assert not verify_by_roots(p, wrong, 1e-6)
    assert not verify_modular(p, wrong, eps=1e-6)
