"""Root-finding on a real segment through the circle lift.

The two-to-one map J(z) = (z + 1/z)/2 carries the unit circle onto the
segment [-1, 1]: J(e^{i phi}) = cos(phi).  Lifting p to
s(z) = z^d p(J(z)) turns the real roots of p inside the segment into
conjugate pairs of unit-circle roots of s, which a power-sum pass over the
band between two concentric circles can factor out without touching the
other roots.  The circle factor is then transplanted back to a real
polynomial of half its degree and solved on the line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .counting import count_roots
from .deflation import divide
from .ehrlich import _certified_radius
from .polycore import (
    BlackBoxPoly,
    Disc,
    Poly,
    degree_of,
    dft,
    eval_any,
    eval_horner,
    next_pow2,
    shift_scale,
)
from .powersums import power_sums_circle, power_sums_to_coeffs_schonhage
from .subdivision import RootApprox, RootReport, SolverConfig
from .subdivision import solve as _solve_line_factor

EPS_MACH = float(np.finfo(float).eps)
THETABAR_DEFAULT = 1.25

__all__ = [
    "SegmentIsolationError",
    "SegmentProblem",
    "circle_factor",
    "lift_to_circle",
    "solve_segment",
    "zhukovsky",
    "zhukovsky_inverse",
]


class SegmentIsolationError(ArithmeticError):
    """The unit circle is not clean enough for band factoring: inconsistent
    band counts, or an odd count with no root at a segment endpoint."""


@dataclass(frozen=True)
class SegmentProblem:
    """A polynomial together with the real segment to search.

    Attributes
    ----------
    p : Poly or BlackBoxPoly
    lo, hi : float
        Segment endpoints, lo < hi.
    """

    p: object
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("need lo < hi")


def zhukovsky(z):
    """J(z) = (z + 1/z)/2.  Collapses conjugate unit-circle pairs onto
    [-1, 1]; undefined at 0."""
    z = complex(z)
    if z == 0:
        raise ValueError("the circle map is undefined at z = 0")
    return 0.5 * (z + 1.0 / z)


def zhukovsky_inverse(x):
    """Both preimages x +- sqrt(x^2 - 1) of x under the circle map.

    The branches multiply to 1; for x in [-1, 1] they are the conjugate pair
    e^{+-i arccos x}.
    """
    x = complex(x)
    root = np.sqrt(x * x - 1.0)
    return x + root, x - root


def lift_to_circle(p: Poly) -> Poly:
    """The lift s(z) = z^d p((z + 1/z)/2), degree 2d, dense route.

    Sampling at the 2d-th roots of unity zeta^h makes the z^d prefactor
    collapse to (-1)^h and J(zeta^h) run through the Chebyshev points
    cos(pi h / d), so one batched Horner pass plus one inverse transform
    recovers the coefficients.  s is self-reciprocal, which disentangles the
    constant and leading coefficients (they alias into a single slot at this
    sample count).

    The degree must be a power of 2; pad with a monomial factor x^u first
    (the padding roots at 0 lift to +-i and are discarded after the solve).
    """
    d = p.degree
    if d < 1:
        raise ValueError("need degree >= 1")
    if d & (d - 1):
        raise ValueError("degree must be a power of 2; multiply by x^u first")
    q = 2 * d
    xs = np.cos(np.pi * np.arange(q) / d)
    vals, _ = eval_horner(p, xs.astype(complex))
    samples = vals * np.where(np.arange(q) % 2 == 0, 1.0, -1.0)
    a = dft(samples, inverse=True)
    coeffs = np.zeros(q + 1, dtype=np.complex128)
    coeffs[1:q] = a[1:]
    coeffs[0] = 0.5 * a[0]
    coeffs[q] = 0.5 * a[0]
    return Poly(coeffs)


def _lifted_blackbox(p) -> BlackBoxPoly:
    """Evaluation-only lift: s(z) = z^d p(J(z)) with the chain-rule
    derivative s'(z) = d z^{d-1} p(J(z)) + z^d p'(J(z)) (1 - z^{-2})/2."""
    d = degree_of(p)

    def ev(z, _p=p, _d=d):
        z = complex(z)
        x = 0.5 * (z + 1.0 / z)
        v, dv = _p.eval(x)
        zd1 = z ** (_d - 1)
        val = zd1 * z * v
        der = _d * zd1 * v + zd1 * z * dv * 0.5 * (1.0 - 1.0 / (z * z))
        return val, der

    return BlackBoxPoly(degree=2 * d, eval_fn=ev, kind="custom",
                        sequential_only=getattr(p, "sequential_only", False),
                        meta={"base": p})


def _evaluation_noise(p, x) -> float:
    """Modulus below which a computed p(x) cannot be told from zero."""
    val, dval = eval_any(p, x)
    if isinstance(p, Poly):
        mods = np.abs(complex(x)) ** np.arange(p.coeffs.size)
        return 2.0 * p.coeffs.size * EPS_MACH * float(np.sum(np.abs(p.coeffs) * mods))
    # no coefficients to sum for a black box; charge the position rounding
    # of the argument through the local derivative instead
    return 16.0 * degree_of(p) * EPS_MACH * (1.0 + abs(dval)) * (1.0 + abs(complex(x)))


def circle_factor(s, thetabar: float = THETABAR_DEFAULT) -> Poly:
    """Monic factor of s carrying exactly its unit-circle roots.

    The band between D(0, thetabar) and D(0, 1/thetabar) holds the circle
    roots and nothing else (caller's isolation contract); its power sums are
    the differences of the two disc estimates, and the factor is recovered
    from s_1..s_{2m} by the doubling recursion.  Returns the constant 1 when
    the band is empty.

    Raises
    ------
    SegmentIsolationError
        Band count negative, above the degree, inconsistent with the power
        sums, or odd while neither z = 1 nor z = -1 is a root.
    """
    if not thetabar > 1.0:
        raise ValueError("thetabar must be > 1")
    d = degree_of(s)
    outer = count_roots(s, Disc(0j, thetabar))
    inner = count_roots(s, Disc(0j, 1.0 / thetabar))
    m = outer.count - inner.count
    if m < 0 or m > d:
        raise SegmentIsolationError(f"band count {m} outside [0, {d}]")
    if m == 0:
        return Poly([1.0])
    if m % 2 == 1:
        at_one = abs(eval_any(s, 1.0 + 0j)[0])
        at_minus = abs(eval_any(s, -1.0 + 0j)[0])
        if at_one > _evaluation_noise(s, 1.0) and at_minus > _evaluation_noise(s, -1.0):
            raise SegmentIsolationError(
                f"odd band count {m} with no root at an endpoint image")
    q = max(256, next_pow2(2 * m + 2))
    est = power_sums_circle(s, 0j, 1.0, q, thetabar=thetabar)
    s0 = complex(est.values[0])
    if abs(s0 - m) > 0.25:
        raise SegmentIsolationError(
            f"band power sums disagree with the count ({s0:.3f} vs {m})")
    sums = [complex(v) for v in est.values[1:2 * m + 1]]
    return power_sums_to_coeffs_schonhage(sums, m, m, radius_hint=1.0)


def _transplant_to_segment(g: Poly) -> Poly:
    """Real degree-w polynomial f with g(z) = z^w 2^w f(J(z)).

    g must be monic of even degree 2w with all roots on the unit circle in
    conjugate pairs; the roots of f are their cosines.  Evaluate g at the
    2K-th roots of unity on the upper half circle, strip the twist
    e^{-i pi h w / K} / 2^w, and interpolate through the Chebyshev points
    cos(pi h / K); K = w makes the twist alternate signs and the
    interpolation exact.
    """
    mdeg = g.degree
    if mdeg % 2:
        raise SegmentIsolationError("cannot transplant an odd-degree circle factor")
    w = mdeg // 2
    if w == 0:
        return Poly([1.0])
    K = w
    h = np.arange(K + 1)
    zs = np.exp(1j * np.pi * h / K)
    gv, _ = eval_horner(g, zs)
    u = gv * np.exp(-1j * np.pi * h * w / K) / (2.0 ** w)
    if np.max(np.abs(u.imag)) > 1e-6 * (1.0 + np.max(np.abs(u.real))):
        raise ArithmeticError("transplanted samples are not real")
    xs = np.cos(np.pi * h / K)
    cheb = np.polynomial.chebyshev.chebfit(xs, u.real, w)
    f = Poly(np.polynomial.chebyshev.cheb2poly(cheb))
    if f.degree != w:
        raise ArithmeticError("transplanted factor lost degree")
    return f.monic()


def _shifted_blackbox(p, c: float, hw: float) -> BlackBoxPoly:
    def ev(t, _p=p, _c=c, _hw=hw):
        v, dv = _p.eval(_c + _hw * t)
        return v, _hw * dv

    return BlackBoxPoly(degree=degree_of(p), eval_fn=ev, kind="custom",
                        sequential_only=getattr(p, "sequential_only", False),
                        meta={"base": p})


def _quotient_blackbox(p, e: float) -> BlackBoxPoly:
    """p with a known root at e divided out, evaluation-only: q = p/(x - e),
    q' = (p' - q)/(x - e).  The removable point itself is dodged by a nudge."""

    def ev(x, _p=p, _e=e):
        x = complex(x)
        if x == _e:
            x += 1e-9 * (1.0 + abs(_e))
        v, dv = _p.eval(x)
        quot = v / (x - _e)
        return quot, (dv - quot) / (x - _e)

    return BlackBoxPoly(degree=degree_of(p) - 1, eval_fn=ev, kind="custom",
                        sequential_only=getattr(p, "sequential_only", False),
                        meta={"base": p, "root": e})


def _deflate_endpoint(pt, e: float):
    """Count the multiplicity of a root at e (within evaluation noise) and
    return (multiplicity, pt with those factors removed)."""
    mult = 0
    while degree_of(pt) >= 1:
        val, _ = eval_any(pt, complex(e))
        if abs(val) > _evaluation_noise(pt, e):
            break
        mult += 1
        if isinstance(pt, Poly):
            pt, _ = divide(pt, Poly([-e, 1.0]))
        else:
            pt = _quotient_blackbox(pt, e)
    return mult, pt


def _multiple_root_radius(p, x, m: int) -> float:
    """Noise-floor inclusion radius for an m-fold root at x: the distance at
    which the local term |p^(m)/m!| r^m first clears the evaluation noise."""
    eta = _evaluation_noise(p, x)
    if isinstance(p, Poly) and m >= 1:
        q = p
        for _ in range(m):
            q = q.derivative()
        cm = abs(q(complex(x))) / math.factorial(m)
        if cm > 0:
            return float((eta / cm) ** (1.0 / m))
    return _certified_radius(p, x)


def _polish_on(p, x, m: int, steps: int = 3):
    """A few multiplicity-aware Newton corrections x <- x - m p/p'.

    Stops once |p| sinks into the evaluation noise: below that line the
    quotient p/p' is noise over noise and a step can land anywhere.  A step
    that increases |p| is discarded for the same reason.
    """
    x = complex(x)
    for _ in range(steps):
        pv, dpv = eval_any(p, x)
        if abs(pv) <= _evaluation_noise(p, x):
            break
        if dpv == 0 or not (np.isfinite(pv) and np.isfinite(dpv)):
            break
        step = m * pv / dpv
        if not np.isfinite(step):
            break
        cand = x - step
        if abs(eval_any(p, cand)[0]) > abs(pv):
            break
        x = cand
        if abs(step) <= 4.0 * EPS_MACH * (1.0 + abs(x)):
            break
    return x


def solve_segment(problem: SegmentProblem, config: Optional[SolverConfig] = None,
                  thetabar: float = THETABAR_DEFAULT) -> RootReport:
    """All real roots of p in [lo, hi], with multiplicities and certified
    radii.

    The segment is mapped affinely to [-1, 1]; roots at the endpoints are
    divided out first (they would lift to z = +-1 where the conjugate-pair
    bookkeeping degenerates).  The remainder is padded by x^u to a power-of-2
    degree, lifted to the circle, band-factored, transplanted back to a real
    polynomial of half the degree, and solved on the line; the direct solve
    of the circle factor is the fallback when the transplant fails.  Interior
    roots are polished against the original p before certification, and the
    u padding roots at the segment center are discarded.

    Requires that p has no roots close to the segment but off it (the factor
    step needs the lifted circle isolated).
    """
    if config is None:
        config = SolverConfig()
    p = problem.p
    c = 0.5 * (problem.lo + problem.hi)
    hw = 0.5 * (problem.hi - problem.lo)
    if isinstance(p, Poly):
        pt = shift_scale(p, c, hw)
    else:
        pt = _shifted_blackbox(p, c, hw)

    endpoint: list[tuple[float, int]] = []
    for e in (1.0, -1.0):
        mult, pt = _deflate_endpoint(pt, e)
        if mult:
            endpoint.append((e, mult))

    d = degree_of(pt)
    u = 0
    interior: list[tuple[complex, int, float]] = []
    w = 0
    band_degree = 0
    method = "transition"
    if d >= 1:
        if isinstance(pt, Poly):
            u = next_pow2(d) - d
            padded = Poly(np.concatenate([np.zeros(u), pt.coeffs])) if u else pt
            s = lift_to_circle(padded)
        else:
            s = _lifted_blackbox(pt)
        g = circle_factor(s, thetabar)
        band_degree = g.degree
        if u and g.degree > 0:
            # the padding roots at the segment center lift to exactly +-i;
            # divide their factor out before transplanting, or its noise-split
            # copies pollute the line solve
            pad = Poly(np.polynomial.polynomial.polypow([1.0, 0.0, 1.0], u))
            quot, rem = divide(g, pad)
            if float(np.max(np.abs(rem.coeffs))) > 1e-6 * float(np.max(np.abs(g.coeffs))):
                raise SegmentIsolationError("padding factor did not divide out")
            g = quot.monic()
        w = g.degree // 2
        if g.degree > 0:
            try:
                f = _transplant_to_segment(g)
                inner = _solve_line_factor(f, config=config)
            except (ArithmeticError, ValueError):
                method = "direct"
                inner = _solve_line_factor(g, config=config)
            interior = _collect_interior(inner, method)

    roots = []
    for e, mult in endpoint:
        x = c + hw * e
        roots.append(RootApprox(complex(x), _certified_radius(p, x), mult, "segment"))
    collected = []
    for t, mult, t_radius in interior:
        x = _polish_on(p, c + hw * t, mult)
        if abs(x.imag) <= max(hw * t_radius, 1e-8 * (1.0 + abs(x))):
            x = complex(x.real)
        horizon = _certified_radius(p, x, floor=4.0 * EPS_MACH * (1.0 + abs(x)))
        collected.append((x, mult, horizon))
    collected.sort(key=lambda it: (it[0].real, it[0].imag))
    # a multiple root reaches the line solve as a noise-split bundle of
    # simple roots; bundle members sit inside each other's noise horizon
    # (genuinely distinct simple roots have machine-size horizons and never
    # merge), so group by that and re-certify at the summed multiplicity
    groups: list[list[tuple[complex, int, float]]] = []
    for x, mult, horizon in collected:
        if groups:
            lx, _, lh = groups[-1][-1]
            if abs(x - lx) <= 8.0 * min(horizon, lh):
                groups[-1].append((x, mult, horizon))
                continue
        groups.append([(x, mult, horizon)])
    for grp in groups:
        mult = sum(m for _, m, _ in grp)
        if len(grp) == 1:
            x, _, horizon = grp[0]
            roots.append(RootApprox(x, horizon, mult, "segment"))
            continue
        center = sum(x for x, _, _ in grp) / len(grp)
        x = _polish_on(p, center, mult, steps=6)
        if abs(x.imag) <= 1e-6 * (1.0 + abs(x)):
            x = complex(x.real)
        spread = max(abs(xx - x) for xx, _, _ in grp)
        radius = max(_multiple_root_radius(p, x, mult), spread)
        roots.append(RootApprox(x, radius, mult, "segment"))
    roots.sort(key=lambda r: (r.approx.real, r.approx.imag))

    found_interior = sum(mult for _, mult, _ in interior)
    missing = max(w - found_interior, 0)
    stats = {
        "band_degree": band_degree,
        "endpoint_roots": sum(m for _, m in endpoint),
        "method": method,
        "padding": u,
    }
    return RootReport(roots=roots, residual_roots_missing=missing, stats=stats)


def _collect_interior(inner: RootReport, method: str):
    """Normalize the inner solve: keep real positions in [-1, 1] and pair up
    the conjugate duplicates of a direct circle solve."""
    entries: list[tuple[complex, int, float]] = []
    if method == "direct":
        # each segment root appears as a conjugate pair on the circle; map
        # both through J and merge
        mapped = []
        for r in inner.roots:
            z = r.approx
            if z == 0:
                continue
            mapped.append((zhukovsky(z), r.multiplicity, r.radius))
        mapped.sort(key=lambda it: it[0].real)
        for t, mult, rad in mapped:
            if entries and abs(entries[-1][0] - t) <= 1e-6 * (1.0 + abs(t)):
                prev_t, prev_m, prev_r = entries[-1]
                entries[-1] = (0.5 * (prev_t + t), prev_m + mult, max(prev_r, rad))
            else:
                entries.append((t, mult, rad))
        entries = [(t, m // 2, r) for t, m, r in entries if m >= 2]
    else:
        entries = [(r.approx, r.multiplicity, r.radius) for r in inner.roots]
    out = []
    for t, mult, rad in entries:
        if abs(t.imag) > 0.01:
            continue
        t = complex(min(max(t.real, -1.0), 1.0))
        out.append((t, mult, rad))
    return out
