"""Root counting in discs, exclusion tests, and proximity/isolation
measurement, all driven by the power-sum estimator.

The count in a disc is round(Re s0*); with a known isolation ratio theta the
discretization error is certified below 1/4 once q >= log_theta(4d+1), and
without one the estimate is accepted when two consecutive doublings of q
agree on the same integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .polycore import Disc, Poly, ZeroPolynomialError, degree_of, next_pow2, reverse, shift_scale
from .powersums import ContourRootError, power_sums_disc
from .radii import RadiusBracket, r1_coefficient_bounds, turan_r1

COUNT_TOL = 0.25
DOUBLING_LIMIT = 1024

__all__ = [
    "CountResult",
    "ExclusionVerdict",
    "UndecidedCountError",
    "count_roots",
    "estimate_isolation",
    "exclusion_test",
    "max_distance",
    "proximity",
]


class UndecidedCountError(ArithmeticError):
    """The count did not stabilize before qmax."""


@dataclass(frozen=True)
class CountResult:
    """Number of roots in a disc.

    confidence is "certified" when a supplied isolation ratio theta bounds
    the discretization error below 1/4, else "heuristic" (two consecutive q
    doublings agreed).  s0_star is the raw estimate the count was rounded
    from; |s0_star - count| < 1/2 always holds for certified results.
    """

    count: int
    s0_star: complex
    q_used: int
    confidence: str
    theta: Optional[float] = None


@dataclass(frozen=True)
class ExclusionVerdict:
    """Outcome of testing a disc for root-freeness.

    tested_h lists the power-sum indices examined; max_abs_s is the largest
    |s_h*| seen after normalizing index h by radius**h (so the tolerance
    means the same thing at every index).  contour_hit marks a verdict forced
    to "not excluded" because p vanished on the test contour.
    """

    excluded: bool
    tested_h: tuple
    max_abs_s: float
    mode: str
    contour_hit: bool = False


def count_roots(p, disc: Disc, theta: Optional[float] = None, q0: int = 8,
                qmax: Optional[int] = None, rng=None) -> CountResult:
    """Count the roots of p inside a disc from s0*.

    With ``theta`` (a known isolation ratio of the boundary circle) the call
    is a single shot at q = max(q0, ceil(log_theta(2d+1))) rounded up to a
    power of 2, certified when the corollary error bound lands below 1/4.
    Without it, q doubles from q0 until two consecutive estimates agree
    within 1/4 of a common integer (heuristic), or qmax is exhausted.
    """
    if q0 < 2:
        raise ValueError("q0 must be >= 2")
    d = degree_of(p)
    if theta is not None:
        if theta <= 1.0:
            raise ValueError("theta must be > 1")
        q_need = math.ceil(math.log(2 * d + 1) / math.log(theta))
        q = next_pow2(max(q0, q_need))
        # the log_theta(2d+1) floor only pins the error under 1/2; keep
        # doubling (analytically, before any evaluation) until it sits
        # under the 1/4 certification slack
        eta_ = 1.0 / theta
        while d * eta_**q / (1.0 - eta_**q) >= COUNT_TOL and q < DOUBLING_LIMIT:
            q *= 2
        est = _estimate_with_retry(p, disc, q, rng)
        s0 = complex(est.values[0])
        eta = 1.0 / theta
        bound = d * eta**q / (1.0 - eta**q)
        count = min(max(int(round(s0.real)), 0), d)
        certified = bound < COUNT_TOL and abs(s0 - count) < COUNT_TOL
        return CountResult(
            count=count,
            s0_star=s0,
            q_used=q,
            confidence="certified" if certified else "heuristic",
            theta=theta,
        )
    if qmax is None:
        qmax = max(4 * next_pow2(max(d, 1)), 4 * next_pow2(q0))
    q = next_pow2(q0)
    prev = None
    while q <= max(qmax, q):
        est = _estimate_with_retry(p, disc, q, rng)
        s0 = complex(est.values[0])
        if prev is not None and abs(s0 - prev) < COUNT_TOL:
            n = int(round(0.5 * (s0.real + prev.real)))
            if abs(s0 - n) < COUNT_TOL and abs(prev - n) < COUNT_TOL:
                n = min(max(n, 0), d)
                return CountResult(count=n, s0_star=s0, q_used=q, confidence="heuristic", theta=None)
        prev = s0
        if q >= qmax:
            break
        q *= 2
    raise UndecidedCountError(
        f"count in {est.disc} undecided: s0* did not stabilize by q={qmax}"
    )


def _estimate_with_retry(p, disc, q, rng):
    try:
        return power_sums_disc(p, disc, q)
    except ContourRootError:
        return power_sums_disc(p, disc, q, rotate=True, rng=rng)


def exclusion_test(p, disc: Disc, mode: str = "probabilistic", h_list=None,
                   tol: float = COUNT_TOL, q: Optional[int] = None, rng=None) -> ExclusionVerdict:
    """Decide whether a disc is root-free.

    Probabilistic mode checks |s_h*| <= tol for h in h_list (default [0, 1]),
    normalizing index h by radius**h.  Deterministic mode takes q = next
    power of 2 >= degree and checks every h = 0..q-1: all of them vanishing
    forces root-freeness for any polynomial of that degree.

    A root on the test contour is retried once with a rotated contour; if it
    persists the verdict is "not excluded" with contour_hit set.
    """
    d = degree_of(p)
    if mode == "probabilistic":
        hs = tuple(h_list) if h_list is not None else (0, 1)
        if not hs:
            raise ValueError("h_list must be nonempty")
        if q is None:
            q = next_pow2(max(16, 2 * (max(hs) + 1)))
    elif mode == "deterministic":
        q = next_pow2(max(d, 2))
        hs = tuple(range(q))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if q < 2 * (max(hs) + 1) and max(hs) >= q:
        raise ValueError(f"q={q} cannot resolve h={max(hs)}")
    try:
        est = power_sums_disc(p, disc, q)
    except ContourRootError:
        try:
            est = power_sums_disc(p, disc, q, rotate=True, rng=rng)
        except ContourRootError:
            return ExclusionVerdict(
                excluded=False, tested_h=hs, max_abs_s=math.inf, mode=mode, contour_hit=True
            )
    rho = disc.radius
    max_s = 0.0
    for h in hs:
        scaled = abs(complex(est.values[h])) / rho**h
        max_s = max(max_s, scaled)
    return ExclusionVerdict(excluded=bool(max_s <= tol), tested_h=hs, max_abs_s=max_s, mode=mode)


def proximity(p, c, r_minus: float, bisection_steps: int = 10, tol: float = COUNT_TOL,
              q: Optional[int] = None, rng=None) -> RadiusBracket:
    """Bracket the distance from c to the nearest root of p.

    Requires D(c, r_minus) to pass the exclusion test (verified here).  The
    radius doubles until exclusion first fails, giving a factor-2 bracket,
    then ``bisection_steps`` rounds of bisection shrink its width by
    2**-bisection_steps.

    The bracket tracks the exclusion test's own decision boundary, which for
    finite q sits slightly below the true nearest-root distance: a disc whose
    boundary passes just under a root can still test as excluded.  Containment
    of the true distance therefore holds up to exclusion-test correctness;
    raise ``q`` or lower ``bisection_steps`` to keep the bracket honest, or
    widen the failure end by ((d + tol)/tol)**(1/q) for a certified cover.
    """
    if r_minus <= 0:
        raise ValueError("r_minus must be positive")
    base = exclusion_test(p, Disc(c, r_minus), tol=tol, q=q, rng=rng)
    if not base.excluded:
        raise ValueError(f"D({c}, {r_minus}) is not excluded; proximity needs a verified root-free start")
    lo = r_minus
    hi = None
    for i in range(1, DOUBLING_LIMIT):
        r = r_minus * 2.0**i
        verdict = exclusion_test(p, Disc(c, r), tol=tol, q=q, rng=rng)
        if verdict.excluded:
            lo = r
        else:
            hi = r
            break
    if hi is None:
        raise ArithmeticError("no root detected under repeated doubling; exclusion may be misconfigured")
    for _ in range(bisection_steps):
        mid = 0.5 * (lo + hi)
        verdict = exclusion_test(p, Disc(c, mid), tol=tol, q=q, rng=rng)
        if verdict.excluded:
            lo = mid
        else:
            hi = mid
    return RadiusBracket(lo, hi, "rd")


def max_distance(p: Poly, c, bisection_steps: int = 4, tol: float = COUNT_TOL,
                 q: int = 64, rng=None) -> RadiusBracket:
    """Bracket the distance from c to the farthest root of p.

    Works on the reversed shift: the farthest root of p from c is the
    reciprocal of the smallest root modulus of reverse(p(x + c)), so a
    proximity bracket there inverts into the answer.  The reversed bracket's
    failure end is widened by the certified factor ((d + tol)/tol)**(1/q)
    before inverting: an exclusion failure at radius r only guarantees a root
    within r times that factor, and the widening keeps the inverted bracket
    sound.  Requires p(c) != 0.
    """
    t = shift_scale(p, c, 1.0)
    if abs(t.coeffs[0]) == 0.0:
        raise ValueError("p(c) = 0: max distance is measured from a non-root")
    trev = reverse(t)
    b = r1_coefficient_bounds(t)
    upper = min(b.upper, b.euclid_upper) if b.euclid_upper is not None else b.upper
    if upper == 0.0:
        raise ValueError("all roots coincide with c")
    r0 = 1.0 / (2.0 * upper)
    for _ in range(60):
        if exclusion_test(trev, Disc(0.0, r0), tol=tol, q=q, rng=rng).excluded:
            break
        r0 *= 0.5
    else:
        raise ArithmeticError("could not verify a root-free disc for the reversed polynomial")
    inner = proximity(trev, 0.0, r0, bisection_steps=bisection_steps, tol=tol, q=q, rng=rng)
    spread = ((trev.degree + tol) / tol) ** (1.0 / q) * (1.0 + 1e-12)
    return RadiusBracket(1.0 / (inner.upper * spread), 1.0 / inner.lower, "r1")


def estimate_isolation(p, K: int = 8, theta_floor: float = 1.5,
                       d_minus: Optional[int] = None, d_plus: Optional[int] = None,
                       rng=None):
    """Estimate a root-free annulus (r_minus, r_plus) around the unit circle.

    Turán brackets from stride-K power sums bound the largest in-disc root
    modulus from above (r_minus) and, applied to the reversed polynomial,
    the smallest out-disc modulus from below (r_plus); r_plus is +inf when
    no roots lie outside.  d_minus/d_plus are the in/out root counts,
    counted heuristically when omitted.

    Raises ValueError("inconclusive") when every usable power sum is
    dominated by its theta_floor error bound.
    """
    d = degree_of(p)
    if d_minus is None:
        d_minus = count_roots(p, Disc(0.0, 1.0), rng=rng).count
    if d_plus is None:
        d_plus = d - d_minus
    if d_minus < 0 or d_plus < 0 or d_minus + d_plus > d:
        raise ValueError("inconsistent root counts")
    r_minus = 0.0
    if d_minus > 0:
        sums = _stride_sums(p, K, d_minus, theta_floor, rng)
        _, r_minus = turan_r1(sums, d_minus, K)
    if d_plus == 0:
        return r_minus, math.inf
    if not isinstance(p, Poly):
        raise TypeError("the out-disc side needs dense coefficients (reverse); wrap or densify p")
    sums_rev = _stride_sums(reverse(p), K, d_plus, theta_floor, rng)
    _, upper_rev = turan_r1(sums_rev, d_plus, K)
    if upper_rev == 0.0:
        return r_minus, math.inf
    return r_minus, 1.0 / upper_rev


def _stride_sums(p, K, count, theta_floor, rng):
    q = next_pow2(max(64, 2 * K * count + 2))
    est = power_sums_disc(p, Disc(0.0, 1.0), q, theta_hint=theta_floor, rng=rng)
    sums = []
    usable = 0
    for g in range(1, count + 1):
        h = g * K
        if h >= q:
            break
        s = complex(est.values[h])
        sums.append(s)
        if est.error_bound is None or abs(s) > est.error_bound[h]:
            usable += 1
    if not sums or usable == 0:
        raise ValueError("inconclusive: power-sum estimates are dominated by their error bounds")
    return sums
