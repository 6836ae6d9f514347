"""Power sums of roots in a disc via contour discretization, and conversions
between coefficients and power sums in both directions.

The estimator evaluates p'/p at q scaled roots of unity on the disc boundary
and takes one DFT; the h-th output approximates ``sum (x_j - center)**h`` over
the roots inside the disc, with error decaying like theta**(-q) when the
boundary is theta-isolated.  An optional high-precision path (``dps``) runs
the identical arithmetic on mpmath scalars for measurements below the binary64
floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .polycore import (
    EPS,
    Disc,
    Poly,
    ZeroPolynomialError,
    degree_of,
    dft,
    eval_at_roots_of_unity,
    eval_horner,
    next_pow2,
)

ROTATE_SEED = 0x5EED
UNDERFLOW_GUARD = 1e-280

__all__ = [
    "ContourRootError",
    "PowerSumEstimate",
    "coeffs_to_power_sums",
    "power_sums_circle",
    "power_sums_disc",
    "power_sums_to_coeffs_newton",
    "power_sums_to_coeffs_schonhage",
]


class ContourRootError(ArithmeticError):
    """p vanishes (to working precision) at an evaluation point."""


@dataclass
class PowerSumEstimate:
    """Estimated power sums of the roots inside a disc.

    values[h] approximates ``sum (x_j - disc.center)**h`` for h = 0..q-1.
    When a theta isolation hint is present, error_bound[h] carries the
    per-index bound (d_f*eta**(q+h) + (d-d_f)*eta**(q-h)) / (1-eta**q) scaled
    by radius**h, with eta = 1/theta and d_f = round(Re s0*) clamped to [0,d].
    """

    values: object
    q: int
    disc: Disc
    theta_hint: Optional[float] = None
    error_bound: Optional[list] = None


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def power_sums_disc(p, disc: Disc, q: int, rotate: bool = False, rng=None,
                    theta_hint: Optional[float] = None, dps: Optional[int] = None) -> PowerSumEstimate:
    """Estimate power sums of the roots of p inside a disc.

    Parameters
    ----------
    p : Poly or BlackBoxPoly
    disc : Disc with radius > 0
    q : int >= 2
        Number of evaluation points.  Powers of 2 use the radix-2 DFT; other
        q fall back to a direct transform.
    rotate : bool
        Pre-rotate the evaluation points by a random unimodular factor so a
        root sitting exactly on the contour is dodged.  The angle comes from
        ``rng`` (fresh fixed-seed generator when omitted, so results stay
        reproducible).
    theta_hint : float, optional
        Known isolation ratio of the boundary circle; fills error_bound.
    dps : int, optional
        Run on mpmath scalars with this many decimal digits.  values is then
        a list of mpmath mpc instead of an ndarray.

    Raises
    ------
    ContourRootError
        When p vanishes at an evaluation point (underflow guard) and rotation
        did not rescue it.
    """
    if q < 2:
        raise ValueError("q must be >= 2")
    if not disc.radius > 0:
        raise ValueError("disc radius must be positive")
    if isinstance(p, Poly) and p.is_zero:
        raise ZeroPolynomialError("power sums of the zero polynomial are undefined")
    rotation = 1.0 + 0j
    if rotate:
        gen = rng if rng is not None else np.random.default_rng(ROTATE_SEED)
        rotation = complex(np.exp(2j * np.pi * gen.uniform(0.0, 1.0)))
    if dps is not None:
        values = _disc_values_mp(p, disc, q, rotation, dps)
    else:
        values = _disc_values_f64(p, disc, q, rotation, rotate)
    bound = None
    if theta_hint is not None and theta_hint > 1.0:
        bound = _error_bounds(values, q, disc.radius, theta_hint, degree_of(p))
    return PowerSumEstimate(values=values, q=q, disc=disc, theta_hint=theta_hint, error_bound=bound)


def _disc_values_f64(p, disc, q, rotation, rotate):
    rho = disc.radius
    vals, ders = eval_at_roots_of_unity(p, disc.center, rho, q, rotation)
    if np.any(np.abs(vals) < UNDERFLOW_GUARD):
        raise ContourRootError(
            "p vanishes at a contour point" + ("" if rotate else "; retry with rotate=True")
        )
    ratios = rho * ders / vals
    if _is_pow2(q):
        F = dft(ratios)
    else:
        g = np.arange(q)
        kernel = np.exp(2j * np.pi * np.outer(g, g) / q)
        F = kernel @ ratios
    h = np.arange(q)
    idx = (h + 1) % q
    out = (rho ** h.astype(np.float64)) * rotation ** (h + 1) * F[idx] / q
    return out


def _disc_values_mp(p, disc, q, rotation, dps):
    import mpmath as mp

    with mp.workdps(dps):
        rho = mp.mpf(repr(float(disc.radius)))
        center = mp.mpc(complex(disc.center))
        omega = mp.mpc(rotation)
        unit = [mp.expjpi(mp.mpf(2 * g) / q) for g in range(q)]
        ratios = []
        for g in range(q):
            x = center + rho * omega * unit[g]
            if isinstance(p, Poly):
                v, dv = eval_horner(p, x)
            else:
                v, dv = p.eval(x)
            if v == 0:
                raise ContourRootError("p vanishes at a contour point")
            ratios.append(rho * dv / v)
        out = []
        for h in range(q):
            acc = mp.mpc(0)
            for g in range(q):
                acc += unit[((h + 1) * g) % q] * ratios[g]
            out.append(rho**h * omega ** (h + 1) * acc / q)
        return out


def _error_bounds(values, q, rho, theta, d):
    eta = 1.0 / theta
    s0 = complex(values[0])
    d_f = min(max(int(round(s0.real)), 0), d)
    denom = 1.0 - eta**q
    out = []
    for h in range(q):
        raw = (d_f * eta ** (q + h) + (d - d_f) * eta ** (q - h)) / denom
        out.append(float(rho**h) * raw)
    return out


def power_sums_circle(p, center, radius: float, q: int, thetabar: float = 1.25,
                      rotate: bool = False, rng=None, dps: Optional[int] = None) -> PowerSumEstimate:
    """Power sums of the roots in the band between D(center, radius*thetabar)
    and D(center, radius/thetabar): the difference of the two disc estimates.
    """
    if not thetabar > 1.0:
        raise ValueError("thetabar must be > 1")
    outer = power_sums_disc(p, Disc(center, radius * thetabar), q, rotate=rotate, rng=rng, dps=dps)
    inner = power_sums_disc(p, Disc(center, radius / thetabar), q, rotate=rotate, rng=rng, dps=dps)
    if dps is not None:
        values = [a - b for a, b in zip(outer.values, inner.values)]
    else:
        values = outer.values - inner.values
    return PowerSumEstimate(values=values, q=q, disc=Disc(center, radius), theta_hint=None, error_bound=None)


def coeffs_to_power_sums(p: Poly, k: int) -> list:
    """Exact power sums s_1..s_k of all roots of p, from the coefficients.

    Newton's identities solved by substitution: for i <= d,
    ``s_i = -i*p_{d-i} - sum_{j=1}^{i-1} p_{d-j} s_{i-j}`` (monic p); indices
    beyond d extend via ``s_i = -sum_{j=1}^{d} p_{d-j} s_{i-j}``.
    """
    if p.is_zero or p.degree < 1:
        raise ValueError("need a polynomial of degree >= 1 with nonzero leading coefficient")
    if k < 1:
        raise ValueError("k must be >= 1")
    a = p.coeffs / p.coeffs[-1]
    d = p.degree
    s = np.zeros(k + 1, dtype=np.complex128)
    for i in range(1, k + 1):
        if i <= d:
            acc = -i * a[d - i]
        else:
            acc = 0j
        jtop = min(i - 1, d)
        for j in range(1, jtop + 1):
            acc -= a[d - j] * s[i - j]
        s[i] = acc
    return list(s[1:])


def power_sums_to_coeffs_newton(s, d_f: int, radius_hint: Optional[float] = None) -> Poly:
    """Monic degree-d_f polynomial whose root power sums are s_1..s_{d_f}.

    Substitution on Newton's identities:
    ``i*f_{d_f-i} = -s_i - sum_{j=1}^{i-1} s_{i-j} f_{d_f-j}``.

    A radius hint (known bound on the root moduli) preconditions the solve by
    scaling the roots into D(0, 1/2) first, which keeps the substitution
    diagonally dominant.
    """
    if len(s) < d_f:
        raise ValueError(f"need at least d_f={d_f} power sums, got {len(s)}")
    if d_f == 0:
        return Poly([1.0])
    sv = np.asarray([complex(x) for x in s[:d_f]], dtype=np.complex128)
    sigma = 1.0
    if radius_hint is not None and radius_hint > 0:
        sigma = 2.0 * radius_hint
        sv = sv / sigma ** np.arange(1, d_f + 1)
    f = np.zeros(d_f + 1, dtype=np.complex128)
    f[d_f] = 1.0
    for i in range(1, d_f + 1):
        acc = -sv[i - 1]
        for j in range(1, i):
            acc -= sv[i - j - 1] * f[d_f - j]
        f[d_f - i] = acc / i
    if sigma != 1.0:
        f *= sigma ** np.arange(d_f, -1, -1.0)
    return Poly(f)


def power_sums_to_coeffs_schonhage(s, k: int, d_f: int, radius_hint: Optional[float] = None) -> Poly:
    """Recover a monic degree-d_f polynomial from its root power sums by the
    doubling recursion on g(x) = prod (1 - x_j x) - 1.

    The recursion integrates the defect of (ln(1+g))' = -sum s_i x^(i-1),
    doubling the number of correct coefficients per round; 2k power sums are
    consumed to produce the top k non-leading coefficients.  Coefficients
    below index d_f - k (when k < d_f) are filled by the Newton-identity
    route, which then needs len(s) >= d_f.
    """
    if k < 1 or k > d_f:
        raise ValueError("need 1 <= k <= d_f")
    if len(s) < 2 * k:
        raise ValueError(f"need at least 2k={2 * k} power sums, got {len(s)}")
    sv = np.asarray([complex(x) for x in s], dtype=np.complex128)
    sigma = 1.0
    if radius_hint is not None and radius_hint > 0:
        sigma = 2.0 * radius_hint
        sv = sv / sigma ** np.arange(1, sv.size + 1)
    # g holds coefficients of 1+g = prod(1 - x_j x), g[0] = 0
    g = np.zeros(2, dtype=np.complex128)
    g[1] = -sv[0]
    r = 1
    while r < k:
        n = 2 * r + 1
        one_plus_g = np.zeros(n, dtype=np.complex128)
        one_plus_g[0] = 1.0
        m = min(g.size, n)
        one_plus_g[:m] += g[:m]
        u = _series_inverse(one_plus_g, n)
        dg = np.zeros(n - 1, dtype=np.complex128)
        gm = g[:m]
        if gm.size > 1:
            dg[: gm.size - 1] = gm[1:] * np.arange(1, gm.size)
        a = np.convolve(dg, u)[: n - 1]
        target = -sv[: n - 1]
        defect = target - a
        corr = np.zeros(n, dtype=np.complex128)
        for j in range(r + 1, n):
            corr[j] = defect[j - 1] / j
        g_new = one_plus_g + corr + np.convolve(g[:m], corr)[:n]
        g_new[0] -= 1.0
        if not np.all(np.isfinite(g_new.view(np.float64))):
            raise ArithmeticError("non-finite intermediate; rescale the roots and retry")
        g = g_new
        r = min(2 * r, k)
    f = np.zeros(d_f + 1, dtype=np.complex128)
    f[d_f] = 1.0
    top = min(k, g.size - 1)
    for i in range(1, top + 1):
        f[d_f - i] = g[i]
    if k < d_f:
        fallback = power_sums_to_coeffs_newton(list(sv[:d_f]), d_f)
        f[: d_f - k] = fallback.coeffs[: d_f - k]
    if sigma != 1.0:
        f *= sigma ** np.arange(d_f, -1, -1.0)
    return Poly(f)


def _series_inverse(a: np.ndarray, n: int) -> np.ndarray:
    """Power-series inverse of a (a[0] != 0) truncated to n terms, O(n^2)."""
    if a[0] == 0:
        raise ZeroDivisionError("series has no inverse (zero constant term)")
    u = np.zeros(n, dtype=np.complex128)
    u[0] = 1.0 / a[0]
    m = a.size
    for i in range(1, n):
        acc = 0j
        for j in range(1, min(i, m - 1) + 1):
            acc += a[j] * u[i - j]
        u[i] = -acc * u[0]
    return u
