"""Core polynomial plumbing: evaluation, transforms, shifts, file format."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyroot.polycore import (
    BlackBoxPoly,
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
    next_pow2,
    norm,
    reverse,
    save_coefficients,
    shift_scale,
    trailing_coeffs_blackbox,
)

EPS = 1e-12


# ---------------------------------------------------------------- eval_horner

def test_horner_quadratic_root():
    p = Poly([2.0, -3.0, 1.0])
    v, dv = eval_horner(p, 1.0)
    assert v == 0.0
    assert dv == -1.0


def test_horner_constant():
    p = Poly([5.0])
    v, dv = eval_horner(p, 2.7 + 1.1j)
    assert v == 5.0
    assert dv == 0.0


def test_horner_cubic_at_minus_one():
    p = Poly([1.0, 0.0, 0.0, 1.0])
    v, dv = eval_horner(p, -1.0)
    assert v == 0.0
    assert dv == 3.0


def test_horner_derivative_matches_finite_difference():
    rng = np.random.default_rng(11)
    for _ in range(8):
        d = int(rng.integers(1, 65))
        p = Poly(rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1))
        for _ in range(100):
            x = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            _, dv = eval_horner(p, x)
            h = 1e-6
            fd = (p(x + h) - p(x - h)) / (2 * h)
            assert abs(dv - fd) <= 1e-6 * max(1.0, abs(dv))


# ------------------------------------------------------------------------ dft

def test_dft_constant_vector():
    out = dft([1.0, 0.0, 0.0, 0.0])
    assert np.allclose(out, [1.0, 1.0, 1.0, 1.0], atol=EPS)


def test_dft_round_trip():
    v = np.array([1.0, 2.0, 3.0, 4.0], dtype=complex)
    back = dft(dft(v), inverse=True)
    assert np.max(np.abs(back - v)) <= 1e-12


def test_dft_unit_impulse_gives_roots_of_unity():
    # frozen from the direct summation oracle: out[g] = sum_h in[h] zeta^{gh}
    out = dft([0.0, 1.0, 0.0, 0.0])
    expected = np.array([1.0, 1j, -1.0, -1j])
    assert np.max(np.abs(out - expected)) <= EPS
    # recompute with the oracle
    q = 4
    zeta = np.exp(2j * np.pi / q)
    direct = [sum([0, 1, 0, 0][h] * zeta ** (g * h) for h in range(q)) for g in range(q)]
    assert np.max(np.abs(out - np.array(direct))) <= EPS


def test_dft_round_trip_all_lengths():
    rng = np.random.default_rng(3)
    n = 2
    while n <= 1024:
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        back = dft(dft(v), inverse=True)
        assert np.max(np.abs(back - v)) <= 1e-12 * max(1.0, np.max(np.abs(v)))
        n *= 2


def test_dft_rejects_non_pow2():
    with pytest.raises(ValueError):
        dft([1.0, 2.0, 3.0])


# ------------------------------------------------- eval_at_roots_of_unity

def test_unit_circle_eval_square():
    p = Poly([0.0, 0.0, 1.0])
    vals, ders = eval_at_roots_of_unity(p, 0.0, 1.0, 4)
    assert np.allclose(vals, [1.0, -1.0, 1.0, -1.0], atol=EPS)
    assert np.allclose(ders, [2.0, 2.0j, -2.0, -2.0j], atol=EPS)


def test_unit_circle_eval_constant():
    p = Poly([1.0])
    vals, ders = eval_at_roots_of_unity(p, 0.3j, 2.0, 8)
    assert np.allclose(vals, np.ones(8), atol=EPS)
    assert np.allclose(ders, np.zeros(8), atol=EPS)


def test_circle_eval_matches_per_point_horner():
    p = Poly([2.0, -3.0, 1.0])
    vals, ders = eval_at_roots_of_unity(p, 0.0, 1.0, 4)
    for g in range(4):
        x = np.exp(2j * np.pi * g / 4)
        v, dv = eval_horner(p, x)
        assert abs(vals[g] - v) <= 1e-13
        assert abs(ders[g] - dv) <= 1e-13


def test_circle_eval_wrapped_path_matches_horner_large():
    # degree above q forces coefficient wrapping on the fast path
    rng = np.random.default_rng(5)
    p = Poly(rng.standard_normal(33) + 1j * rng.standard_normal(33))
    vals, ders = eval_at_roots_of_unity(p, 0.0, 1.0, 8)
    for g in range(8):
        x = np.exp(2j * np.pi * g / 8)
        v, dv = eval_horner(p, x)
        assert abs(vals[g] - v) <= 1e-12 * max(1.0, abs(v))
        assert abs(ders[g] - dv) <= 1e-12 * max(1.0, abs(dv))


def test_circle_eval_blackbox_counts_evaluations():
    bb = blackbox_from_poly(Poly([2.0, -3.0, 1.0]))
    eval_at_roots_of_unity(bb, 0.0, 1.0, 4)
    assert bb.eval_count == 4


def test_circle_eval_nonfinite_raises():
    bb = BlackBoxPoly(degree=2, eval_fn=lambda x: (float("inf"), 0.0), kind="custom")
    with pytest.raises(NonFiniteEvaluationError):
        eval_at_roots_of_unity(bb, 0.0, 1.0, 4)


# ---------------------------------------------------------------- shift_scale

def test_shift_square_by_one():
    t = shift_scale(Poly([0.0, 0.0, 1.0]), 1.0, 1.0)
    assert np.allclose(t.coeffs, [1.0, 2.0, 1.0], atol=EPS)


def test_scale_by_two():
    t = shift_scale(Poly([2.0, -3.0, 1.0]), 0.0, 2.0)
    assert np.allclose(t.coeffs, [2.0, -6.0, 4.0], atol=EPS)


def test_shift_scale_evaluation_consistency():
    rng = np.random.default_rng(17)
    p = Poly(rng.standard_normal(9) + 1j * rng.standard_normal(9))
    c, rho = 0.7 - 0.2j, 1.3
    t = shift_scale(p, c, rho)
    want = p(c + 0.3 * rho)
    got = t(0.3)
    assert abs(got - want) <= 1e-10 * max(1.0, abs(want))


def test_shift_scale_pointwise_random():
    rng = np.random.default_rng(23)
    for _ in range(5):
        d = int(rng.integers(1, 20))
        p = Poly(rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1))
        c = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        rho = rng.uniform(0.5, 2.0)
        t = shift_scale(p, c, rho)
        for x in rng.standard_normal(20):
            want = p(c + rho * x)
            assert abs(t(x) - want) <= 1e-9 * max(1.0, abs(want))


def test_shift_scale_rejects_zero_rho():
    with pytest.raises(ValueError):
        shift_scale(Poly([1.0, 1.0]), 0.0, 0.0)


# -------------------------------------------------------------------- reverse

def test_reverse_quadratic():
    r = reverse(Poly([2.0, -3.0, 1.0]))
    assert np.allclose(r.coeffs, [1.0, -3.0, 2.0], atol=EPS)


def test_reverse_monomial_collapses():
    r = reverse(Poly([0.0, 0.0, 0.0, 1.0]))
    assert r.degree == 0
    assert r.coeffs[0] == 1.0


def test_reverse_reciprocal_roots():
    # p = (x-2)(x-4) = x^2 - 6x + 8; reverse has roots 1/2, 1/4
    r = reverse(Poly([8.0, -6.0, 1.0]))
    # 8x^2 - 6x + 1 at the reciprocals
    assert abs(r(0.5)) <= 1e-10
    assert abs(r(0.25)) <= 1e-10


def test_reverse_involution():
    rng = np.random.default_rng(31)
    c = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    c[0] += 3.0  # keep p(0) != 0
    p = Poly(c)
    rr = reverse(reverse(p))
    assert np.allclose(rr.coeffs, p.coeffs, atol=EPS)


# ----------------------------------------------------------- blackbox families

def test_mandelbrot_small_degrees():
    assert mandelbrot(1).degree == 1
    assert mandelbrot(2).degree == 3
    assert mandelbrot(3).degree == 7
    bb = mandelbrot(2)
    v, dv = bb.eval(-1.0)
    assert abs(v) <= EPS  # x^3 + 1 at -1
    assert abs(dv - 3.0) <= EPS


def test_mandelbrot_map_degrees_and_values():
    bb = mandelbrot_map(2)  # x^2 + x
    assert bb.degree == 2
    v, dv = bb.eval(2.0)
    assert abs(v - 6.0) <= EPS
    assert abs(dv - 5.0) <= EPS


def test_iterated_square_value():
    bb = iterated_square(1)  # x^2 + 2
    v, dv = bb.eval(3.0)
    assert abs(v - 11.0) <= EPS
    assert abs(dv - 6.0) <= EPS


def test_family_evals_match_dense_expansion():
    from polyroot.oracles import expand_family

    for name, maker, k in [
        ("mandelbrot", mandelbrot, 4),
        ("mandelbrot-map", mandelbrot_map, 4),
        ("iterated-square", iterated_square, 3),
    ]:
        bb = maker(k)
        dense = expand_family(name, k)
        assert bb.degree == dense.degree
        rng = np.random.default_rng(41)
        for _ in range(12):
            x = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            v, dv = bb.eval(x)
            vd, dvd = eval_horner(dense, x)
            scale = max(1.0, abs(vd))
            assert abs(v - vd) <= 1e-9 * scale
            assert abs(dv - dvd) <= 1e-9 * max(1.0, abs(dvd))


# --------------------------------------------------- trailing_coeffs_blackbox

def test_trailing_coeffs_pure_square():
    bb = blackbox_from_poly(Poly([0.0, 0.0, 1.0]))
    out = trailing_coeffs_blackbox(bb, 0.0, 2, 1e-4)
    assert out[0] == 0.0
    assert out[1] == 0.0


def test_trailing_coeffs_quadratic():
    bb = blackbox_from_poly(Poly([2.0, -3.0, 1.0]))
    out = trailing_coeffs_blackbox(bb, 0.0, 2, 1e-4)
    assert abs(out[0] - 2.0) <= 1e-3
    assert abs(out[1] + 3.0) <= 1e-3


def test_trailing_coeffs_family_fast_path():
    bb = mandelbrot(2)  # x^3 + 1
    out = trailing_coeffs_blackbox(bb, 0.0, 2, 1e-4)
    assert abs(out[0] - 1.0) <= 1e-3
    assert abs(out[1]) <= 1e-3


def test_trailing_coeffs_shifted_center():
    p = Poly([2.0, -3.0, 1.0])  # (x-1)(x-2)
    bb = BlackBoxPoly(degree=2, eval_fn=lambda x: eval_horner(p, x), kind="custom")
    out = trailing_coeffs_blackbox(bb, 1.0, 2, 1e-5)
    # p(1 + y) = y^2 - y, so trailing coefficients at center 1 are [0, -1]
    assert abs(out[0]) <= 1e-4
    assert abs(out[1] + 1.0) <= 1e-4


# ----------------------------------------------------------------------- norm

def test_norms_quadratic():
    p = Poly([2.0, -3.0, 1.0])
    assert norm(p, "one") == 6.0
    assert norm(p, "inf") == 3.0
    assert abs(norm(p, "two") - math.sqrt(14.0)) <= EPS


def test_norm_product_submultiplicative():
    rng = np.random.default_rng(53)
    for _ in range(20):
        u = Poly(rng.standard_normal(int(rng.integers(1, 9))) + 0j)
        v = Poly(rng.standard_normal(int(rng.integers(1, 9))) + 0j)
        if u.is_zero or v.is_zero:
            continue
        assert norm(u * v, "one") <= norm(u, "one") * norm(v, "one") * (1 + 1e-12)


# ----------------------------------------------------------------- Poly basics

def test_poly_trims_trailing_zeros():
    p = Poly([1.0, 2.0, 0.0, 0.0])
    assert p.degree == 1
    assert len(p.coeffs) == 2


def test_poly_zero_flag():
    assert Poly([0.0, 0.0]).is_zero
    assert not Poly([0.0, 1.0]).is_zero


def test_poly_derivative():
    dp = Poly([2.0, -3.0, 1.0]).derivative()
    assert np.allclose(dp.coeffs, [-3.0, 2.0], atol=EPS)


def test_zero_polynomial_rejected_at_blackbox_boundary():
    with pytest.raises(ZeroPolynomialError):
        blackbox_from_poly(Poly([0.0]))


def test_next_pow2():
    assert next_pow2(1) == 1
    assert next_pow2(5) == 8
    assert next_pow2(8) == 8
    assert next_pow2(9) == 16


# ------------------------------------------------------------ file round trip

def test_coefficient_file_round_trip(tmp_path):
    p = Poly([2.0, -3.0 + 0.5j, 1.0])
    path = tmp_path / "p.txt"
    save_coefficients(p, path)
    q = load_coefficients(path)
    assert np.allclose(q.coeffs, p.coeffs, atol=EPS)


def test_coefficient_file_comments_ignored(tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("# a comment\n2 0\n-3 0\n1 0\n")
    q = load_coefficients(path)
    assert np.allclose(q.coeffs, [2.0, -3.0, 1.0], atol=EPS)


# ------------------------------------------------------- property-based checks

coeff_lists = st.lists(
    st.complex_numbers(min_magnitude=0.0, max_magnitude=10.0, allow_nan=False, allow_infinity=False),
    min_size=2,
    max_size=12,
)


@given(coeff_lists)
@settings(max_examples=60, deadline=None)
def test_reverse_involution_property(cs):
    cs = list(cs)
    if abs(cs[0]) < 1e-6 or abs(cs[-1]) < 1e-6:
        return  # needs p(0) != 0 and full degree
    p = Poly(cs)
    rr = reverse(reverse(p))
    assert len(rr.coeffs) == len(p.coeffs)
    assert np.max(np.abs(rr.coeffs - p.coeffs)) <= 1e-12 * max(1.0, np.max(np.abs(p.coeffs)))


@given(coeff_lists, st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=60, deadline=None)
def test_shift_scale_agrees_with_direct_eval(cs, cr, ci):
    cs = list(cs)
    if abs(cs[-1]) < 1e-6:
        return
    p = Poly(cs)
    c = complex(cr, ci)
    t = shift_scale(p, c, 1.5)
    x = 0.25 + 0.1j
    want = p(c + 1.5 * x)
    assert abs(t(x) - want) <= 1e-8 * max(1.0, abs(want))
