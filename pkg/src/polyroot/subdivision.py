"""Quad-tree subdivision solver over a suspect square.

Each level splits every suspect square into four children, discards the ones
an exclusion test proves root-free, groups the survivors into connected
components, and counts roots per component.  Components either shrink to the
target radius, get finished early by multiplicity-aware Newton iteration once
they are isolated, or (when counting breaks down) feed a wild-factor
deflation at the end.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .counting import UndecidedCountError, count_roots, exclusion_test
from .polycore import Disc, Poly, degree_of, eval_any, norm
from .powersums import ContourRootError, power_sums_disc
from .radii import annuli_cover, r1_coefficient_bounds, turan_r1

SQRT2 = math.sqrt(2.0)
POPULATION_CAP_FACTOR = 8
WILD_CAP = 64
# dilation of each child's superscribing disc before testing, so sibling
# tests overlap and a root on a shared edge cannot slip between them
TEST_DILATION = 4.0 / 3.0
MIN_HALF_WIDTH = 1e-12

__all__ = [
    "Component",
    "NewtonResult",
    "RootApprox",
    "RootReport",
    "SolverConfig",
    "Square",
    "initial_square",
    "newton_accelerate",
    "root_radius_upper",
    "skip_exclusion",
    "solve",
    "subdivide_step",
]


@dataclass(frozen=True)
class Square:
    """Axis-aligned square |Re(x-c)| <= h, |Im(x-c)| <= h."""

    center: complex
    half_width: float

    def __post_init__(self):
        if not self.half_width > 0.0:
            raise ValueError("half_width must be positive")

    def disc(self) -> Disc:
        """Superscribing disc (through the corners)."""
        return Disc(self.center, self.half_width * SQRT2)

    def children(self):
        h = 0.5 * self.half_width
        c = self.center
        return [
            Square(c + h * (sx + 1j * sy), h)
            for sx in (-1.0, 1.0)
            for sy in (-1.0, 1.0)
        ]


@dataclass
class Component:
    """Edge/corner-connected group of suspect squares."""

    squares: list
    cover: Disc
    root_count: Optional[int] = None
    isolation: Optional[float] = None


@dataclass
class SolverConfig:
    """Knobs for the subdivision solver.

    epsilon is the target root radius; exclusion_mode and q0 feed the
    counting module; newton_isolation_threshold gates the accelerated
    finish (certified theory wants ~3d, anything >= 4 works on benign
    inputs); skip flags enable the two exclusion-avoiding recipes.
    """

    epsilon: float = 1e-10
    q0: int = 8
    qmax: Optional[int] = None
    exclusion_mode: str = "probabilistic"
    newton_isolation_threshold: float = 4.0
    deflation_nu: float = 2.0
    max_subdivisions: int = 80
    skip_annuli_cover: bool = True
    skip_cauchy: bool = True

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if self.newton_isolation_threshold < 2.0:
            raise ValueError("newton_isolation_threshold must be >= 2")


@dataclass(frozen=True)
class RootApprox:
    approx: complex
    radius: float
    multiplicity: int
    method: str


@dataclass
class RootReport:
    """Solver output: approximations with certified radii plus run counters.

    Sum of multiplicities plus residual_roots_missing equals the number of
    roots the solve was responsible for (degree, or the in-region count).
    """

    roots: list
    residual_roots_missing: int
    stats: dict = field(default_factory=dict)


@dataclass(frozen=True)
class NewtonResult:
    status: str  # "converged" | "rejected"
    root: Optional[complex] = None
    radius: Optional[float] = None
    iterations: int = 0


# -------------------------------------------------------------- initial square

def root_radius_upper(p) -> float:
    """Upper bound on the largest root modulus: coefficient bounds for dense
    p, Turan power-sum bounds over a doubling enclosing disc for black
    boxes."""
    d = degree_of(p)
    if isinstance(p, Poly):
        b = r1_coefficient_bounds(p)
        return min(b.upper, b.euclid_upper if b.euclid_upper is not None else math.inf)
    radius = 1.0
    for _ in range(48):
        try:
            if count_roots(p, Disc(0.0, radius), q0=16).count == d:
                est = power_sums_disc(p, Disc(0.0, radius), 64)
                sums = [est.values[8 * g] for g in range(1, 5)]
                _, upper = turan_r1(sums, d, 8)
                return float(upper)
        except (UndecidedCountError, ContourRootError, ArithmeticError):
            pass
        radius *= 2.0
    raise ArithmeticError("could not bracket the root radius for the black box")


def initial_square(p) -> Square:
    """Origin-centered square containing every root, from the root-radius
    upper bound dilated by 1.25."""
    hw = root_radius_upper(p)
    return Square(0.0 + 0.0j, 1.25 * max(float(hw), MIN_HALF_WIDTH))


# -------------------------------------------------------------- skip heuristics

def skip_exclusion(p, square: Square, cover=None, mode: str = "cauchy_skip") -> str:
    """Cheap pre-test: "discard" (provably root-free by the annuli cover),
    "suspect_without_test" (a root is provably close, skip the test), or
    "needs_test".

    Mode "annuli_cover" discards squares whose modulus range misses every
    root-modulus annulus (dilated x2 for the estimates' bracket).  Mode
    "cauchy_skip" keeps squares where d|p(c)/p'(c)| <= h*sqrt(2), since that
    inclusion radius already pins a root inside the superscribing disc.
    """
    if mode == "annuli_cover":
        if cover is None:
            return "needs_test"
        rad = square.half_width * SQRT2
        lo = max(0.0, abs(square.center) - rad)
        hi = abs(square.center) + rad
        for a in cover.annuli:
            if a.inner / 2.0 <= hi and lo <= a.outer * 2.0:
                return "needs_test"
        return "discard"
    if mode == "cauchy_skip":
        d = degree_of(p)
        pv, dpv = eval_any(p, square.center)
        if abs(pv) == 0.0:
            return "suspect_without_test"
        if abs(dpv) == 0.0:
            return "needs_test"
        if d * abs(pv / dpv) <= square.half_width * SQRT2:
            return "suspect_without_test"
        return "needs_test"
    raise ValueError(f"unknown skip mode {mode!r}")


# -------------------------------------------------------------- subdivide step

def _group_components(squares):
    """8-adjacency grouping: squares of one level share an edge or corner
    iff their centers differ by <= 2h in each axis."""
    n = len(squares)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        hi = squares[i].half_width
        for j in range(i + 1, n):
            lim = (squares[i].half_width + squares[j].half_width) * (1.0 + 1e-9)
            dz = squares[i].center - squares[j].center
            if abs(dz.real) <= lim and abs(dz.imag) <= lim:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(squares[i])
    comps = [_build_component(members) for members in groups.values()]
    # covers overshoot non-convex square groups, and a cover that reaches
    # into another component's squares would double-count that root; merge
    # such pairs until the covers partition the suspect set
    merged = True
    while merged and len(comps) > 1:
        merged = False
        for i, ci in enumerate(comps):
            for j, cj in enumerate(comps):
                if i == j:
                    continue
                reach = ci.cover.radius
                if any(abs(s.center - ci.cover.center) <= reach + s.half_width * SQRT2 + 1e-12
                       for s in cj.squares):
                    rest = [c for k, c in enumerate(comps) if k != i and k != j]
                    comps = rest + [_build_component(ci.squares + cj.squares)]
                    merged = True
                    break
            if merged:
                break
    return comps


def _build_component(members):
    xs = [s.center.real for s in members]
    ys = [s.center.imag for s in members]
    c = complex(0.5 * (min(xs) + max(xs)), 0.5 * (min(ys) + max(ys)))
    rad = max(abs(s.center - c) + s.half_width * SQRT2 for s in members)
    return Component(squares=members, cover=Disc(c, rad))


def _attach_counts_and_isolation(p, comps, config):
    for comp in comps:
        try:
            res = count_roots(p, comp.cover, q0=config.q0, qmax=config.qmax)
            comp.root_count = res.count
        except (UndecidedCountError, ContourRootError, ArithmeticError):
            comp.root_count = None
    for i, comp in enumerate(comps):
        if len(comps) == 1:
            comp.isolation = math.inf
            continue
        gap = math.inf
        for j, other in enumerate(comps):
            if j == i:
                continue
            gap = min(gap, abs(comp.cover.center - other.cover.center) - other.cover.radius)
        comp.isolation = max(gap, 0.0) / max(comp.cover.radius, 1e-300)


def subdivide_step(squares, p, config: SolverConfig, cover=None, stats=None):
    """One level: split, exclude (or skip), regroup.

    Returns (kept_squares, components).  Counters are accumulated into the
    caller's stats dict when given.
    """
    if not squares:
        raise ValueError("no suspect squares to subdivide")
    if stats is None:
        stats = {}
    stats.setdefault("squares_tested", 0)
    stats.setdefault("exclusions_run", 0)
    stats.setdefault("exclusions_skipped", 0)
    d = degree_of(p)
    kept = []
    for sq in squares:
        for child in sq.children():
            stats["squares_tested"] += 1
            verdict = "needs_test"
            if config.skip_annuli_cover and cover is not None:
                verdict = skip_exclusion(p, child, cover=cover, mode="annuli_cover")
                if verdict == "discard":
                    stats["exclusions_skipped"] += 1
                    continue
            if verdict == "needs_test" and config.skip_cauchy:
                verdict = skip_exclusion(p, child, mode="cauchy_skip")
                if verdict == "suspect_without_test":
                    stats["exclusions_skipped"] += 1
                    kept.append(child)
                    continue
            stats["exclusions_run"] += 1
            res = exclusion_test(p, child.disc().dilate(TEST_DILATION),
                                 mode=config.exclusion_mode)
            if not res.excluded:
                kept.append(child)
    if len(kept) > POPULATION_CAP_FACTOR * d:
        raise ArithmeticError(
            f"exclusion-test breakdown: {len(kept)} suspect squares exceed "
            f"{POPULATION_CAP_FACTOR}*{d}"
        )
    comps = _group_components(kept)
    _attach_counts_and_isolation(p, comps, config)
    return kept, comps


# ---------------------------------------------------------- newton acceleration

def _certify_count(p, x, r_start, r_cap, m, config):
    """Smallest disc radius from r_start (escalating x10 up to r_cap) whose
    root count reads exactly m, or None.

    The escalation matters for multiple roots: on a disc of radius r around
    an m-fold root the contour values scale like r^m, and below the rounding
    floor the count is unreadable no matter how accurate the approximation.
    """
    r = r_start
    while True:
        try:
            if count_roots(p, Disc(x, r), q0=config.q0, qmax=config.qmax).count == m:
                return r
        except (UndecidedCountError, ContourRootError, ArithmeticError):
            pass
        if r >= r_cap:
            return None
        r = min(10.0 * r, r_cap)


def newton_accelerate(p, component, m: int, start, config: SolverConfig) -> NewtonResult:
    """Multiplicity-m Newton finish: x <- x - m*p/p'.

    Converged when the step shrinks under epsilon/4 and a root count near
    the iterate confirms exactly m roots; the counting disc starts at
    2*step and may grow a few decades (staying well under the local scale)
    until the count is readable, and the certified radius is the one
    reported.  Rejected when the step grows three times in a row, the
    derivative vanishes, or 64 iterations pass.
    """
    if m < 1:
        raise ValueError("multiplicity must be >= 1")
    x = complex(start)
    prev = math.inf
    grow = 0
    step = math.inf
    for it in range(1, 65):
        pv, dpv = eval_any(p, x)
        if abs(pv) == 0.0:
            step = 0.0
        else:
            if abs(dpv) == 0.0:
                return NewtonResult("rejected", iterations=it)
            dz = m * pv / dpv
            x -= dz
            step = abs(dz)
        if step < 0.25 * config.epsilon:
            r_chk = max(2.0 * step, 0.5 * config.epsilon)
            # never escalate past ~1e-3 of the local scale: that clears the
            # rounding floor of any float-certifiable multiplicity, while a
            # component holding genuinely separate roots fails the count
            # there and goes back to subdivision instead of "certifying" a
            # disc that swallows its neighbors
            r_cap = max(10.0 * r_chk, 1e-3 * (1.0 + abs(x)))
            r_ok = _certify_count(p, x, r_chk, r_cap, m, config)
            if r_ok is None:
                return NewtonResult("rejected", iterations=it)
            return NewtonResult("converged", root=x, radius=r_ok, iterations=it)
        if step >= prev:
            grow += 1
            if grow >= 3:
                return NewtonResult("rejected", iterations=it)
        else:
            grow = 0
        prev = step
    return NewtonResult("rejected", iterations=64)


# ----------------------------------------------------------------------- solve

def _certified_emit(p, center, radius, m, config):
    """Final per-root check: the epsilon-disc (or the cover, if larger) must
    count exactly m roots."""
    r_cert = max(config.epsilon, radius)
    try:
        got = count_roots(p, Disc(center, r_cert), q0=config.q0, qmax=config.qmax).count
    except (UndecidedCountError, ContourRootError, ArithmeticError):
        return False
    return got == m


def _deflate_wild(p, roots, missing, config):
    """Recover the roots the subdivision lost: deflate the degree-`missing`
    factor over the found (tame) roots and solve it with deflation disabled."""
    from .deflation import deflate_evalinterp, deflate_powersum

    tame = []
    for r in roots:
        tame.extend([r.approx] * r.multiplicity)
    try:
        defl = deflate_powersum(p, tame, missing)
    except ArithmeticError:
        defl = deflate_evalinterp(p, tame, missing)
    inner = solve(defl.factor, None, config, _allow_deflation=False)
    return [
        RootApprox(r.approx, r.radius, r.multiplicity, "deflated")
        for r in inner.roots
    ]


def solve(p, region: Optional[Disc] = None, config: Optional[SolverConfig] = None,
          trace=None, _allow_deflation: bool = True) -> RootReport:
    """Approximate all roots (of the region, or everywhere) within
    config.epsilon.

    Per level, resolved components leave the suspect set: either their cover
    shrank to the target radius, or an isolated component converged under
    Newton.  Roots found outside a requested region are dropped at the end;
    a shortfall against the expected count triggers one wild-factor deflation
    pass when permitted.
    """
    if config is None:
        config = SolverConfig()
    d = degree_of(p)
    eval0 = getattr(p, "eval_count", None)
    if region is None:
        sq0 = initial_square(p)
        expected = d
    else:
        sq0 = Square(complex(region.center), float(region.radius))
        expected = count_roots(p, region, q0=config.q0, qmax=config.qmax).count
    cover = None
    if config.skip_annuli_cover and isinstance(p, Poly):
        try:
            cover = annuli_cover(p)
        except (ArithmeticError, ValueError):
            cover = None
    stats = {
        "squares_tested": 0,
        "exclusions_run": 0,
        "exclusions_skipped": 0,
        "levels": 0,
        "newton_attempts": 0,
    }
    suspects = [sq0]
    roots = []
    level = 0
    while suspects and level < config.max_subdivisions:
        suspects, comps = subdivide_step(suspects, p, config, cover=cover, stats=stats)
        next_squares = []
        for comp in comps:
            m = comp.root_count
            if m == 0:
                continue
            if m is not None and comp.cover.radius <= config.epsilon:
                if _certified_emit(p, comp.cover.center, comp.cover.radius, m, config):
                    roots.append(RootApprox(comp.cover.center, max(comp.cover.radius, 0.0),
                                            m, "subdivision"))
                    continue
            if (
                m is not None
                and m >= 1
                and comp.isolation is not None
                and comp.isolation >= config.newton_isolation_threshold
            ):
                stats["newton_attempts"] += 1
                res = newton_accelerate(p, comp, m, comp.cover.center, config)
                if res.status == "converged":
                    roots.append(RootApprox(res.root, res.radius, m, "newton"))
                    continue
            next_squares.extend(comp.squares)
        if trace is not None:
            trace.write(json.dumps({
                "level": level,
                "suspect_squares": len(suspects),
                "kept_squares": len(next_squares),
                "exclusions_run": stats["exclusions_run"],
                "exclusions_skipped": stats["exclusions_skipped"],
                "components": [
                    {
                        "center": [comp.cover.center.real, comp.cover.center.imag],
                        "radius": comp.cover.radius,
                        "count": comp.root_count,
                    }
                    for comp in comps
                ],
            }, sort_keys=True) + "\n")
        suspects = next_squares
        level += 1
    stats["levels"] = level
    if region is not None:
        tol = 1e-9 * max(region.radius, 1.0)
        roots = [r for r in roots if abs(r.approx - region.center) <= region.radius + tol]
    found = sum(r.multiplicity for r in roots)
    missing = expected - found
    if (
        missing > 0
        and _allow_deflation
        and region is None
        and roots
        and missing <= WILD_CAP
    ):
        try:
            extra = _deflate_wild(p, roots, missing, config)
            roots = roots + extra
            found = sum(r.multiplicity for r in roots)
            missing = expected - found
        except (ArithmeticError, ValueError):
            pass
    if eval0 is not None:
        stats["evaluations"] = p.eval_count - eval0
    return RootReport(roots=roots, residual_roots_missing=max(missing, 0), stats=stats)
