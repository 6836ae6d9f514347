"""Factor deflation: pull a low-degree factor out of p, verify it, and
refine multi-factor splittings by Newton iteration.

Three extraction routes are kept deliberately separate (power sums,
evaluation/interpolation, Taylor section), since their failure modes differ:
power sums lose bits to cancellation when the wild roots are dwarfed by tame
ones, interpolation needs the divisor bounded away from the sample circle,
and the Taylor section is only as good as the cluster's isolation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .polycore import (
    Poly,
    ZeroPolynomialError,
    degree_of,
    dft,
    eval_any,
    next_pow2,
    norm,
    reverse,
    shift_scale,
    trailing_coeffs_blackbox,
)
from .powersums import (
    ContourRootError,
    _series_inverse,
    coeffs_to_power_sums,
    power_sums_disc,
    power_sums_to_coeffs_schonhage,
)
from .polycore import Disc
from .radii import cauchy_inclusion_radius, dandelin_squaring, r1_coefficient_bounds

# float64 carries 52 mantissa bits; cancellation past that leaves pure noise
B_LOSS_BUDGET = 52.0
SMALL_FACTOR_CAP = 64
MODULAR_EXACT_DEGREE = 20

__all__ = [
    "Deflation",
    "SplitState",
    "deflate_evalinterp",
    "deflate_laser",
    "deflate_powersum",
    "deflation_policy",
    "divide",
    "make_split",
    "refine_factorization",
    "verify_by_roots",
    "verify_modular",
]


@dataclass(frozen=True)
class Deflation:
    """A candidate factor of p.

    factor is monic for the power-sum and interpolation routes; the Taylor
    section route keeps the raw truncation (its coefficient error bounds are
    stated for the unnormalized section).  b_loss estimates the bits of
    precision spent on power-sum cancellation; caveat records conditions the
    route needs but cannot check itself.
    """

    factor: Poly
    method: str
    residual: Optional[float] = None
    verified: str = "unverified"
    b_loss: Optional[float] = None
    caveat: Optional[str] = None

    def __post_init__(self):
        if self.method not in ("powersum", "evalinterp", "laser"):
            raise ValueError(f"unknown deflation method {self.method!r}")
        if self.verified not in ("unverified", "rootcheck", "modularcheck"):
            raise ValueError(f"unknown verification tag {self.verified!r}")
        if self.factor.degree < 1:
            raise ValueError("a deflated factor must have degree >= 1")


@dataclass
class SplitState:
    """A multi-factor splitting p ~ prod(factors) with partial-fraction
    cofactors: 1/prod(f_j) ~ sum h_j/f_j.

    delta is the relative factorization defect |p - prod f_j| / |p|; sigma
    the partial-fraction defect |1 - sum h_j * prod(f)/f_j| (both one-norms).
    history collects (delta, sigma) per refinement iteration.
    """

    factors: list
    cofactors_h: list
    delta: float
    sigma: float
    history: list = field(default_factory=list)


# ---------------------------------------------------------------- local tools

def _poly_divmod(p: Poly, v: Poly):
    """Schoolbook division, local to avoid importing test-support code."""
    if v.is_zero:
        raise ZeroDivisionError("division by the zero polynomial")
    num = p.coeffs.astype(np.complex128).copy()
    den = v.coeffs
    dn, dd = p.degree, v.degree
    if dn < dd:
        return Poly([0.0]), Poly(num)
    q = np.zeros(dn - dd + 1, dtype=np.complex128)
    for k in range(dn - dd, -1, -1):
        q[k] = num[k + dd] / den[dd]
        num[k : k + dd + 1] -= q[k] * den
    return Poly(q), Poly(num[:dd] if dd > 0 else [0.0])


def _poly_mod(p: Poly, v: Poly) -> Poly:
    return _poly_divmod(p, v)[1]


def _small_roots(f: Poly):
    """All roots of a small factor: closed forms through degree 2, the
    simultaneous iteration solver beyond."""
    d = f.degree
    if d == 0:
        return []
    c = f.coeffs / f.coeffs[-1]
    if d == 1:
        return [complex(-c[0])]
    if d == 2:
        b, a = complex(c[1]), complex(c[0])
        disc = np.sqrt(complex(b * b - 4 * a))
        # pair b with the same-signed branch to dodge cancellation
        t = -0.5 * (b + disc) if abs(b + disc) >= abs(b - disc) else -0.5 * (b - disc)
        if abs(t) == 0.0:
            return [0.0j, -b]
        return [complex(t), complex(a / t)]
    from .ehrlich import solve_all

    return [complex(z) for z in solve_all(f).roots]


def _lagrange(points, values) -> Poly:
    """Interpolating polynomial through (points[i], values[i])."""
    n = len(points)
    coeffs = np.zeros(max(n, 1), dtype=np.complex128)
    for i in range(n):
        num = np.array([1.0 + 0j])
        denom = 1.0 + 0j
        for j in range(n):
            if j == i:
                continue
            num = np.convolve(num, np.array([-points[j], 1.0 + 0j]))
            denom *= points[i] - points[j]
        coeffs[: num.size] += values[i] * num / denom
    return Poly(coeffs)


# ------------------------------------------------------------------ deflation

def deflate_powersum(p, tame_roots, w: int, rng=None) -> Deflation:
    """Factor of degree w covering the roots of p not listed as tame.

    The wild factor's power sums come from subtracting the tame roots'
    contributions from the full-root sums (exact Newton identities for dense
    p, a wide-disc estimate for black boxes), and the doubling recovery turns
    sums 1..2w back into coefficients.  b_loss reports the worst log2 ratio
    |s_h| / |s_h - tame part|: the bits cancellation burned.
    """
    d = degree_of(p)
    if not 1 <= w <= d:
        raise ValueError("w must be in [1, degree]")
    if len(tame_roots) != d - w:
        raise ValueError(f"need exactly {d - w} tame roots, got {len(tame_roots)}")
    tame = np.asarray([complex(t) for t in tame_roots])
    if isinstance(p, Poly):
        s_all = np.asarray(coeffs_to_power_sums(p, 2 * w), dtype=np.complex128)
    else:
        radius = 4.0 * max(1.0, float(np.max(np.abs(tame))) if tame.size else 1.0)
        q = next_pow2(max(128, 8 * w))
        try:
            est = power_sums_disc(p, Disc(0.0, radius), q)
        except ContourRootError:
            est = power_sums_disc(p, Disc(0.0, radius), q, rotate=True, rng=rng)
        s_all = np.asarray(est.values[1 : 2 * w + 1], dtype=np.complex128)
    s_tame = np.zeros(2 * w, dtype=np.complex128)
    if tame.size:
        for h in range(1, 2 * w + 1):
            s_tame[h - 1] = np.sum(tame**h)
    s_wild = s_all - s_tame
    b_loss = 0.0
    for h in range(2 * w):
        if abs(s_wild[h]) > 0 and abs(s_all[h]) > abs(s_wild[h]):
            b_loss = max(b_loss, math.log2(abs(s_all[h]) / abs(s_wild[h])))
    if b_loss > B_LOSS_BUDGET:
        raise ArithmeticError(
            f"power-sum cancellation lost ~{b_loss:.0f} bits (budget {B_LOSS_BUDGET:.0f}); "
            "use the interpolation route"
        )
    factor = power_sums_to_coeffs_schonhage(list(s_wild), w, w)
    residual = None
    if isinstance(p, Poly):
        _, rem = _poly_divmod(p, factor)
        residual = norm(rem, "one") / max(norm(p, "one"), 1e-300)
    return Deflation(factor=factor, method="powersum", residual=residual, b_loss=b_loss)


def deflate_evalinterp(p, tame_roots, w: int, R: float = 1.0) -> Deflation:
    """Factor of degree w by sampling f = p / prod(x - tame) on a circle.

    K = next power of two above w sample points on the radius-R circle; the
    factor values there are p divided by the tame linear factors, and one
    inverse DFT interpolates the coefficients.  A point colliding with a tame
    root triggers one retry on rotated points.
    """
    d = degree_of(p)
    if not 1 <= w <= d:
        raise ValueError("w must be in [1, degree]")
    if len(tame_roots) != d - w:
        raise ValueError(f"need exactly {d - w} tame roots, got {len(tame_roots)}")
    if R <= 0:
        raise ValueError("R must be positive")
    tame = np.asarray([complex(t) for t in tame_roots])
    K = next_pow2(w + 1)
    for attempt in range(2):
        rot = 1.0 + 0j if attempt == 0 else np.exp(1j * math.pi / (3 * K))
        pts = R * rot * np.exp(2j * np.pi * np.arange(K) / K)
        if tame.size and np.min(np.abs(pts[:, None] - tame[None, :])) <= 1e-8 * R:
            continue
        vals = np.array([eval_any(p, z)[0] for z in pts], dtype=np.complex128)
        if tame.size:
            for t in tame:
                vals /= pts - t
        coeffs = dft(vals, inverse=True)
        coeffs /= (R * rot) ** np.arange(K)
        factor = Poly(coeffs[: w + 1]).monic()
        if factor.degree != w:
            raise ArithmeticError("interpolated factor lost its leading coefficient")
        held = R * rot * np.exp(1j * math.pi / K)
        pv = eval_any(p, held)[0]
        fv = factor(held)
        for t in tame:
            fv *= held - t
        residual = abs(fv - pv)
        return Deflation(factor=factor, method="evalinterp", residual=float(residual))
    raise ArithmeticError("tame roots collide with the evaluation points, twice")


def deflate_laser(p, c, w: Optional[int] = None, tol: float = 1e-6) -> Deflation:
    """Taylor section of p at c: the residue of p modulo (x - c)**(w+1).

    With w omitted it is inferred as the first derivative order whose
    normalized magnitude clears tol.  The section is returned raw (not monic)
    in the original variable; it only approximates the cluster factor when
    the cluster at c is strongly isolated, which the caveat records.
    """
    d = degree_of(p)
    if isinstance(p, Poly):
        taylor = shift_scale(p, c, 1.0).coeffs
    else:
        want = (w + 1) if w is not None else min(d + 1, SMALL_FACTOR_CAP + 2)
        taylor = trailing_coeffs_blackbox(p, c, want, 1e-5)
    scale = float(np.max(np.abs(taylor)))
    if scale == 0.0:
        raise ZeroPolynomialError("p vanishes identically")
    if w is None:
        for i, t in enumerate(np.abs(taylor)):
            if t > tol * scale:
                w = i
                break
        if not w:
            raise ArithmeticError("no cluster boundary found at this center")
    if not 1 <= w <= d:
        raise ValueError("w must be in [1, degree]")
    if len(taylor) < w + 1:
        raise ValueError("not enough Taylor coefficients for the requested w")
    section_shifted = Poly(taylor[: w + 1])
    factor = shift_scale(section_shifted, -complex(c), 1.0)
    return Deflation(
        factor=factor,
        method="laser",
        caveat="section ~ cluster factor only under isolation exponential in d - w",
    )


# --------------------------------------------------------------- verification

def verify_by_roots(p, factor: Poly, tol: float = 1e-6) -> bool:
    """Accept the factor iff each of its roots sits within tol of a root of
    p, as certified by the inclusion radius d*|p/p'| at the approximation."""
    if factor.degree > SMALL_FACTOR_CAP:
        raise ValueError(f"factor degree {factor.degree} exceeds the root-check cap")
    for y in _small_roots(factor):
        rho = cauchy_inclusion_radius(p, y)
        if rho is None or rho > tol:
            return False
    return True


def _mod_by_tag(p: Poly, kind: str, k: int) -> Poly:
    c = np.zeros(k, dtype=np.complex128)
    if kind == "xpow":
        n = min(k, p.degree + 1)
        c[:n] = p.coeffs[:n]
        return Poly(c if n else [0.0])
    if kind == "one_minus_xpow":
        # x^k = 1 in the quotient ring, so coefficients wrap without sign
        for i, v in enumerate(p.coeffs):
            c[i % k] += v
        return Poly(c)
    raise ValueError(f"unknown modulus kind {kind!r}")


def verify_modular(p: Poly, factor: Poly, moduli=None, eps: float = 1e-8) -> bool:
    """Accept the factor iff p = factor * quotient holds modulo each test
    modulus x^k or 1 - x^k, within the acceptance threshold.

    The quotient comes from one full division of p by the factor, so the
    wrapped residual is the wrapped division remainder: ~0 for a true factor.
    The reverse-side check reuses the same quotient reversed; re-dividing the
    reversed inputs would run long division against the factor's reciprocal
    roots, which is exponentially unstable when they are large.  The
    threshold is eps*|p|/(d*2^(2d+1)) for degrees up to 20 and the surrogate
    eps*|p|*1e-6 beyond (the stated constant underflows), floored at the
    rounding scale of a single product.
    """
    d = p.degree
    w = factor.degree
    if w < 1:
        raise ValueError("factor must have degree >= 1")
    if moduli is None:
        moduli = [("xpow", 2 * w + a) for a in (0, 1, 2)]
    if any(kind == "xpow" for kind, _ in moduli) and abs(factor.coeffs[0]) == 0.0 and abs(p.coeffs[0]) > 0.0:
        raise ArithmeticError("inconclusive: factor vanishes at 0 but p does not (x^k moduli degenerate)")
    if d <= MODULAR_EXACT_DEGREE:
        threshold = eps * norm(p, "one") / (d * 2.0 ** (2 * d + 1))
    else:
        threshold = eps * norm(p, "one") * 1e-6
    threshold = max(threshold, 64.0 * np.finfo(np.float64).eps * norm(p, "one"))
    q, _ = _poly_divmod(p, factor)
    sides = [(p, factor, q)]
    if abs(p.coeffs[0]) > 0.0 and abs(factor.coeffs[0]) > 0.0:
        qr = Poly(np.concatenate([q.coeffs, np.zeros(max(d - w + 1 - q.coeffs.size, 0))])[::-1])
        sides.append((reverse(p), reverse(factor), qr))
    for pp, ff, qq in sides:
        for kind, k in moduli:
            if k < 1:
                raise ValueError("modulus exponent must be >= 1")
            lhs = _mod_by_tag(ff * _mod_by_tag(qq, kind, k), kind, k)
            rhs = _mod_by_tag(pp, kind, k)
            if norm(lhs - rhs, "one") > threshold:
                return False
    return True


# -------------------------------------------------------------------- divide
# (series inversion shared with the power-sum recovery)

def _tight_r1(v: Poly) -> float:
    """Root-radius upper bound sharpened by two squaring rounds: the plain
    coefficient bound overshoots by up to 2x, its quartic root by 2**(1/4)."""
    b0 = r1_coefficient_bounds(v)
    best = min(b0.upper, b0.euclid_upper or math.inf)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            v2 = dandelin_squaring(v, 2)
        b2 = r1_coefficient_bounds(v2)
        best = min(best, min(b2.upper, b2.euclid_upper or math.inf) ** 0.25)
    except (ArithmeticError, ValueError):
        pass
    return best

def divide(p, v, method: str = "coefficient"):
    """Divide p by v: returns (quotient, remainder) with deg r < deg v.

    method "coefficient" inverts the reversed divisor as a power series
    (dense p only); "evalinterp" samples the reversed ratio on a circle
    inside the divisor's reciprocal root radius and interpolates, so it only
    evaluates p; "modreduce" takes v implicitly as a point set and returns
    (None, remainder) with the remainder read off by interpolation at those
    points.
    """
    if method == "modreduce":
        pts = [complex(z) for z in (v if not isinstance(v, Poly) else _small_roots(v))]
        if len(pts) == 0:
            raise ValueError("modreduce needs at least one point")
        vals = [eval_any(p, z)[0] for z in pts]
        return None, _lagrange(pts, vals)
    if not isinstance(v, Poly):
        raise TypeError("divisor must be a Poly for coefficient/evalinterp division")
    if v.is_zero:
        raise ZeroDivisionError("division by the zero polynomial")
    if v.degree < 1:
        c = v.coeffs[0]
        return Poly(np.asarray(p.coeffs) / c), Poly([0.0])
    if method == "coefficient":
        if not isinstance(p, Poly):
            raise TypeError("coefficient division needs dense p; use evalinterp")
        dn, dd = p.degree, v.degree
        if dn < dd:
            return Poly([0.0]), p
        n = dn - dd + 1
        rv = reverse(v)
        inv = _series_inverse(rv.coeffs, n)
        rq = np.convolve(reverse(p).coeffs[:n], inv)[:n]
        q = Poly(rq[::-1])
        r = p - q * v
        return q, Poly(r.coeffs[:dd] if r.degree >= dd else r.coeffs)
    if method == "evalinterp":
        d = degree_of(p)
        dd = v.degree
        if d < dd:
            return Poly([0.0]), (p if isinstance(p, Poly) else None)
        n = d - dd + 1
        # sample p/v on a circle holding all of v's roots well inside: there
        # p/v = q + r/v and the Laurent tail of r/v aliases into the kept
        # slots only through the (root bound / R)**K decay, which the
        # oversampled K buries.  Quotients much longer than ~50 terms lose
        # accuracy to the R**n slot growth; the dense route has no such cap.
        root_bound = _tight_r1(v)
        R = max(1.25 * root_bound, 1.0)
        K = next_pow2(max(d + 1, n + 160))
        pts = R * np.exp(2j * np.pi * np.arange(K) / K)
        vv = np.array([v(z) for z in pts], dtype=np.complex128)
        with np.errstate(over="ignore", invalid="ignore"):
            pv = np.array([eval_any(p, z)[0] for z in pts], dtype=np.complex128)
        if not np.all(np.isfinite(pv.view(np.float64))):
            raise ArithmeticError("p overflows at the evaluation points")
        q = Poly(dft(pv / vv, inverse=True)[:n] / R ** np.arange(n))
        if isinstance(p, Poly):
            full = p - q * v
            return q, Poly(full.coeffs[:dd])
        K2 = next_pow2(d + 1)
        ws = np.exp(2j * np.pi * np.arange(K2) / K2)
        rvals = np.array([eval_any(p, z)[0] - q(z) * v(z) for z in ws])
        rc = dft(rvals, inverse=True)
        return q, Poly(rc[:dd])
    raise ValueError(f"unknown division method {method!r}")


# --------------------------------------------------------------- refinement

def make_split(p: Poly, factors, cofactors_h=None) -> SplitState:
    """Package factors (monic, pairwise root-disjoint) into a SplitState.

    Without explicit cofactors, h_j is interpolated so that at each root y of
    f_j it equals 1 / prod_{i != j} f_i(y), the partial-fraction residue."""
    factors = [f.monic() for f in factors]
    if cofactors_h is None:
        cofactors_h = []
        for j, f in enumerate(factors):
            ys = _small_roots(f)
            vals = []
            for y in ys:
                prod = 1.0 + 0j
                for i, g in enumerate(factors):
                    if i != j:
                        prod *= g(y)
                if abs(prod) == 0.0:
                    raise ArithmeticError("factors share a root; split is degenerate")
                vals.append(1.0 / prod)
            cofactors_h.append(_lagrange(ys, vals) if ys else Poly([0.0]))
    delta, sigma = _split_defects(p, factors, cofactors_h)
    return SplitState(factors=factors, cofactors_h=list(cofactors_h), delta=delta, sigma=sigma)


def _split_defects(p: Poly, factors, hs):
    prod = Poly([1.0])
    for f in factors:
        prod = prod * f
    delta = norm(p - prod, "one") / max(norm(p, "one"), 1e-300)
    acc = Poly([0.0])
    for f, h in zip(factors, hs):
        q, _ = _poly_divmod(prod, f)
        acc = acc + h * q
    sigma = norm(Poly([1.0]) - acc, "one")
    return float(delta), float(sigma)


def refine_factorization(p: Poly, state: SplitState, iterations: int = 1) -> SplitState:
    """Newton refinement of a splitting p ~ prod f_j.

    Per iteration and factor: h_j <- (2 - h_j q_j) h_j mod f_j with q_j the
    cofactor product, then f_j <- f_j + (h_j p mod f_j).  delta and sigma are
    recomputed every pass and appended to the history; a delta above 10x the
    starting value aborts with a divergence error.
    """
    factors = [Poly(f.coeffs) for f in state.factors]
    hs = [Poly(h.coeffs) for h in state.cofactors_h]
    if len(hs) != len(factors):
        raise ValueError("need one cofactor per factor")
    delta0 = max(state.delta, 1e-300)
    history = list(state.history)
    delta, sigma = state.delta, state.sigma
    for _ in range(iterations):
        prod = Poly([1.0])
        for f in factors:
            prod = prod * f
        new_factors = []
        new_hs = []
        for j, f in enumerate(factors):
            q_j, _ = _poly_divmod(prod, f)
            h = hs[j]
            h = _poly_mod((Poly([2.0]) - h * _poly_mod(q_j, f)) * h, f)
            corr = _poly_mod(h * p, f)
            new_factors.append(f + corr)
            new_hs.append(h)
        factors, hs = new_factors, new_hs
        delta, sigma = _split_defects(p, factors, hs)
        history.append((delta, sigma))
        if delta > 10.0 * max(delta0, 1e-14):
            raise ArithmeticError(f"refinement diverged: delta {delta:.3e} from {state.delta:.3e}")
    return SplitState(factors=factors, cofactors_h=hs, delta=delta, sigma=sigma, history=history)


# -------------------------------------------------------------------- policy

def deflation_policy(component_degree: int, total_degree: int, nu: float = 2.0,
                     cap: int = SMALL_FACTOR_CAP) -> bool:
    """Deflate a component iff the degree drop is worth it: the total-to-
    component ratio reaches nu (boundary inclusive) and the component is
    small enough to solve directly."""
    if nu <= 1.0:
        raise ValueError("nu must be > 1")
    if component_degree < 1 or total_degree < component_degree:
        raise ValueError("need 1 <= component_degree <= total_degree")
    return total_degree / component_degree >= nu and component_degree <= cap
