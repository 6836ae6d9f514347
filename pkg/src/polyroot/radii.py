"""Root-radius estimation: coefficient bounds, Turán power-sum brackets,
Cauchy inclusion discs, Dandelin root squaring, and the Newton-polygon
annuli cover used to seed solvers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .polycore import Annulus, Poly, ZeroPolynomialError, degree_of, eval_any

FIFTH_ROOT_LOG = math.log(5.0)

__all__ = [
    "AnnuliCover",
    "RadiusBracket",
    "annuli_cover",
    "cauchy_inclusion_radius",
    "dandelin_squaring",
    "r1_coefficient_bounds",
    "turan_r1",
]


@dataclass(frozen=True)
class RadiusBracket:
    """Certified-or-heuristic bracket [lower, upper] for a root radius.

    kind "r1" brackets the largest root modulus, "rd" the smallest.  The
    Euclidean alternative upper bound, when available, rides along in
    euclid_upper; consumers wanting the tightest upper take the min.
    """

    lower: float
    upper: float
    kind: str
    euclid_upper: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("r1", "rd"):
            raise ValueError(f"kind must be 'r1' or 'rd', got {self.kind!r}")
        if self.lower > self.upper * (1 + 1e-12):
            raise ValueError(f"empty bracket [{self.lower}, {self.upper}]")


@dataclass(frozen=True)
class AnnuliCover:
    """Sorted, origin-centered annuli that jointly cover all root moduli
    (after dilation by the grouping width); counts holds the number of root
    moduli attributed to each annulus when known."""

    annuli: tuple
    counts: Optional[tuple] = None

    def __iter__(self):
        return iter(self.annuli)

    def covers(self, x, width: float = 1.0) -> bool:
        r = abs(x)
        for a in self.annuli:
            if a.inner / width <= r <= a.outer * width:
                return True
        return False


def r1_coefficient_bounds(p: Poly) -> RadiusBracket:
    """Bracket the largest root modulus from the coefficients.

    With r_tilde = max_j |p_{d-j}/p_d|^(1/j), the bracket is
    [r_tilde/d, 2*r_tilde]; the Euclidean bound
    sqrt(sum_i |p_i|^2) / |p_d| is exposed as euclid_upper, and consumers
    wanting the tightest upper estimate take the min of the two.
    """
    if p.is_zero:
        raise ZeroPolynomialError("the zero polynomial has no root radii")
    d = p.degree
    if d == 0:
        raise ValueError("root radii need degree >= 1")
    a = np.abs(p.coeffs)
    lead = a[d]
    logs = np.full(d, -np.inf)
    nz = a[:d] > 0
    j = d - np.arange(d)  # distance below the leading index
    logs[nz] = (np.log(a[:d][nz]) - math.log(lead)) / j[nz]
    log_rt = logs.max()
    r_tilde = 0.0 if log_rt == -np.inf else math.exp(log_rt)
    euclid = math.sqrt(float((a**2).sum())) / lead
    return RadiusBracket(r_tilde / d, 2.0 * r_tilde, "r1", euclid_upper=euclid)


def turan_r1(powersums, d: int, K: int):
    """Turán bracket for the largest root modulus from power sums s_{gK}.

    Parameters
    ----------
    powersums : sequence of complex
        Entry g-1 holds s_{gK} (sum of gK-th root powers), g = 1..G.
    d : int
        Number of roots contributing to the sums.
    K : int
        Stride; the bracket tightens like 5**(1/K).

    Returns
    -------
    (r_star, upper)
        r_star <= r_1 <= r_star * 5**(1/K).
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if K < 1:
        raise ValueError("K must be >= 1")
    if len(powersums) == 0:
        raise ValueError("need at least one power sum")
    best = -math.inf
    for g, s in enumerate(powersums, start=1):
        mag = abs(complex(s))
        if mag == 0.0:
            continue
        best = max(best, (math.log(mag) - math.log(d)) / (g * K))
    r_star = 0.0 if best == -math.inf else math.exp(best)
    return r_star, r_star * math.exp(FIFTH_ROOT_LOG / K)


def cauchy_inclusion_radius(p, c) -> Optional[float]:
    """Radius rho_1 = d*|p(c)/p'(c)| of a disc about c certain to contain a
    root; 0.0 when c is itself a root, None when p'(c) = 0 gives no
    information."""
    d = degree_of(p)
    v, dv = eval_any(p, c)
    if abs(v) == 0.0:
        return 0.0
    if abs(dv) == 0.0:
        return None
    rho = d * abs(v / dv)
    if not math.isfinite(rho):
        return None
    return float(rho)


def dandelin_iteration_cap(d: int) -> int:
    """Default number of squarings that stays numerically trustworthy."""
    dd = max(d, 2)
    return math.ceil(math.log2(max(math.log2(dd), 1.0))) + 2


def dandelin_squaring(p: Poly, iterations: int) -> Poly:
    """Root squaring: each round maps the roots x_j to x_j**2.

    The result is renormalized monic every round.  Rounds beyond the
    degree-based cap emit a warning (coefficient spread grows doubly
    exponentially); overflow raises with the failing round number.
    """
    if p.is_zero:
        raise ZeroPolynomialError("cannot square the zero polynomial")
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    d = p.degree
    cap = dandelin_iteration_cap(d)
    if iterations > cap:
        warnings.warn(
            f"{iterations} squaring rounds exceed the stability cap {cap} for degree {d}",
            RuntimeWarning,
            stacklevel=2,
        )
    a = (p.coeffs / p.coeffs[-1]).astype(np.complex128)
    sign = -1.0 if d % 2 else 1.0
    with np.errstate(invalid="ignore", over="ignore"):
        for i in range(iterations):
            even = a[0::2]
            odd = a[1::2]
            sq = np.convolve(even, even)
            if odd.size:
                cross = np.convolve(odd, odd)
                n = max(sq.size, cross.size + 1)
                out = np.zeros(n, dtype=np.complex128)
                out[: sq.size] = sq
                out[1 : cross.size + 1] -= cross
            else:
                out = sq
            out = sign * out
            out = out[: d + 1]
            if not np.all(np.isfinite(out.view(np.float64))):
                raise ArithmeticError(f"coefficient overflow at squaring round {i + 1}")
            if out[-1] == 0:
                raise ArithmeticError(f"leading coefficient vanished at squaring round {i + 1}")
            a = out / out[-1]
    return Poly(a)


def annuli_cover(p: Poly, width: float = 2.0) -> AnnuliCover:
    """Newton-polygon annuli covering the root moduli.

    The upper convex hull of the points (i, log|p_i|) yields one modulus
    estimate per hull edge (exp of the negated slope, with edge length many
    roots attributed to it); estimates agreeing within ``width`` merge into
    one annulus.  Roots at the origin (trailing zero coefficients) get the
    degenerate annulus [0, 0].
    """
    if p.is_zero:
        raise ZeroPolynomialError("the zero polynomial has no root annuli")
    if width < 1.0:
        raise ValueError("width must be >= 1")
    d = p.degree
    if d == 0:
        return AnnuliCover(annuli=(), counts=())
    a = np.abs(p.coeffs)
    nz = np.nonzero(a)[0]
    i0 = int(nz[0])
    annuli = []
    counts = []
    if i0 > 0:
        annuli.append(Annulus(0.0, 0.0, 0.0))
        counts.append(i0)
    pts = [(int(i), math.log(a[i])) for i in nz]
    hull = _upper_hull(pts)
    radii = []
    mults = []
    for (i1, y1), (i2, y2) in zip(hull[:-1], hull[1:]):
        slope = (y2 - y1) / (i2 - i1)
        radii.append(math.exp(-slope))
        mults.append(i2 - i1)
    order = np.argsort(radii) if radii else []
    grouped = []
    for idx in order:
        r, m = radii[idx], mults[idx]
        if grouped and r <= grouped[-1][0] * width:
            lo, hi, cnt = grouped[-1]
            grouped[-1] = (lo, max(hi, r), cnt + m)
        else:
            grouped.append((r, r, m))
    for lo, hi, cnt in grouped:
        annuli.append(Annulus(0.0, lo, hi))
        counts.append(cnt)
    return AnnuliCover(annuli=tuple(annuli), counts=tuple(counts))


def _upper_hull(pts):
    """Upper convex hull of (x, y) points already sorted by x."""
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (pt[1] - y1) - (pt[0] - x1) * (y2 - y1) >= 0:
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull
