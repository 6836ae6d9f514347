"""Simultaneous root iterations.

Classical Ehrlich sweeps (all approximations updated together from the
current configuration), a secular-equation variant that carries rational
weights between sweeps instead of re-evaluating the polynomial, annuli-seeded
initialization, and a tame/wild partition: approximations that stop moving
are frozen, and a small leftover wild set is deflated into a low-degree
factor and finished by the subdivision solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .counting import UndecidedCountError, count_roots
from .polycore import Disc, NonFiniteEvaluationError, Poly, degree_of, eval_any
from .powersums import ContourRootError
from .radii import annuli_cover, cauchy_inclusion_radius
from .subdivision import RootApprox, RootReport, SolverConfig, root_radius_upper
from .subdivision import solve as _solve_by_subdivision

EPS_MACH = float(np.finfo(float).eps)
GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
COLLISION_REL = 1e-12
STALL_SWEEPS = 3
MAX_SWEEPS = 100

__all__ = [
    "SimState",
    "ehrlich_step",
    "initialize",
    "secular_step",
    "solve_all",
    "wild_cap",
]


@dataclass
class SimState:
    """One snapshot of a simultaneous iteration.

    z holds the d current approximations; tame marks the frozen ones (a tame
    entry never moves again, but keeps repelling the others); residuals are
    |p(z_j)|.  stall counts consecutive sweeps during which an entry moved
    less than its tameness tolerance, and v carries the secular weights
    between secular sweeps.
    """

    z: np.ndarray
    tame: np.ndarray
    iteration: int = 0
    residuals: np.ndarray = None
    stall: np.ndarray = None
    res_window: np.ndarray = None
    v: Optional[np.ndarray] = None

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=complex)
        self.tame = np.asarray(self.tame, dtype=bool)
        if self.tame.shape != self.z.shape:
            raise ValueError("tame mask must match z in length")
        if self.residuals is None:
            self.residuals = np.full(self.z.size, np.inf)
        if self.stall is None:
            self.stall = np.zeros(self.z.size, dtype=int)
        if self.res_window is None:
            self.res_window = np.tile(self.residuals, (STALL_SWEEPS, 1))

    @classmethod
    def from_points(cls, p, pts) -> "SimState":
        z = np.asarray([complex(x) for x in pts])
        res = np.array([abs(eval_any(p, x)[0]) for x in z])
        return cls(z=z, tame=np.zeros(z.size, dtype=bool), iteration=0,
                   residuals=res)


def wild_cap(d: int) -> int:
    """Largest wild set the solver will deflate rather than flag."""
    return max(16, d // 50)


def _tol_tame(zj, d: int, epsilon: float) -> float:
    return 4.0 * EPS_MACH * abs(zj) * d + epsilon / 8.0


def _separate(z: np.ndarray) -> np.ndarray:
    """Perturb coinciding approximations by 1e-12 of the configuration scale
    so the pairwise differences in the repulsion sums stay nonzero."""
    z = z.copy()
    scale = max(1.0, float(np.max(np.abs(z))))
    tol = COLLISION_REL * scale
    for j in range(1, z.size):
        while np.any(np.abs(z[:j] - z[j]) < tol):
            z[j] += tol * (1.0 + j) * np.exp(2j * np.pi * j / z.size)
    return z


# ---------------------------------------------------------------- initialize

def initialize(p, d: int, cover=None, seed: int = 0) -> list:
    """d starting points: on the root-moduli annuli (proportionally to their
    estimated counts, golden-angle phase offsets between annuli) when a cover
    is given, else equally spaced on the circle of the r1 upper bound.

    Deterministic for a fixed seed; the seed only rotates the whole
    configuration.
    """
    if d < 1:
        raise ValueError("need d >= 1")
    rng = np.random.default_rng(seed)
    base = rng.uniform(0.0, 2.0 * np.pi)
    pts: list[complex] = []
    if cover is not None and len(cover.annuli) > 0:
        counts = cover.counts
        if counts is None:
            counts = [0] * len(cover.annuli)
        counts = [int(c) for c in counts]
        short = d - sum(counts)
        if short != 0:
            # distribute any unattributed points round-robin
            k = 0
            while short > 0:
                counts[k % len(counts)] += 1
                short -= 1
                k += 1
            while short < 0:
                k -= 1
                j = k % len(counts)
                take = min(counts[j], -short)
                counts[j] -= take
                short += take
        for k, (a, n) in enumerate(zip(cover.annuli, counts)):
            if n <= 0:
                continue
            r = math.sqrt(max(a.inner, 1e-300) * max(a.outer, 1e-300))
            if a.outer == 0.0:
                r = 0.0
            phase0 = base + k * GOLDEN_ANGLE
            for j in range(n):
                pts.append(r * np.exp(1j * (phase0 + 2.0 * np.pi * j / n)))
        return pts
    r = float(root_radius_upper(p))
    return [r * np.exp(1j * (base + 2.0 * np.pi * j / d)) for j in range(d)]


# -------------------------------------------------------------- ehrlich sweep

def _advance_bookkeeping(state: SimState, z_new, updates, res_new, d, epsilon):
    """Shared tame/stall update.

    An entry is frozen once it has moved less than its tolerance for three
    consecutive sweeps while the residual stagnated over that window (no
    4x improvement versus three sweeps ago).  The window comparison matters:
    at the rounding floor residuals cycle rather than settle, and a
    sweep-to-sweep test never sees them as stagnant.
    """
    tame = state.tame.copy()
    stall = state.stall.copy()
    lag = state.res_window[0]
    for j in range(d):
        if tame[j]:
            continue
        tol = _tol_tame(z_new[j], d, epsilon)
        if abs(updates[j]) <= tol:
            stall[j] += 1
        else:
            stall[j] = 0
        if stall[j] >= STALL_SWEEPS and res_new[j] >= 0.25 * lag[j]:
            tame[j] = True
    window = np.vstack([state.res_window[1:], res_new])
    return tame, stall, window


def ehrlich_step(p, state: SimState, config: Optional[SolverConfig] = None) -> SimState:
    """One simultaneous sweep z_j <- z_j - E_j with

        1/E_j = p'(z_j)/p(z_j) - sum_{i != j} 1/(z_j - z_i)

    and E_j = 0 at an exact root.  All non-tame entries update from the same
    old configuration (Jacobi style); tame entries stay frozen but keep
    contributing to the repulsion sums.
    """
    if config is None:
        config = SolverConfig()
    d = state.z.size
    z = _separate(state.z)
    updates = np.zeros(d, dtype=complex)
    for j in range(d):
        if state.tame[j]:
            continue
        pv, dpv = eval_any(p, z[j])
        if abs(pv) == 0.0:
            continue
        if not (np.isfinite(pv) and np.isfinite(dpv)):
            raise NonFiniteEvaluationError(
                f"p'/p not finite at {z[j]!r} during an Ehrlich sweep")
        repulse = np.sum(1.0 / (z[j] - np.delete(z, j)))
        den = dpv / pv - repulse
        if den == 0.0 or not np.isfinite(den):
            raise NonFiniteEvaluationError(
                f"Ehrlich correction undefined at {z[j]!r}")
        updates[j] = 1.0 / den
    z_new = z - updates
    res_new = np.array([abs(eval_any(p, x)[0]) for x in z_new])
    tame, stall, window = _advance_bookkeeping(state, z_new, updates, res_new,
                                               d, config.epsilon)
    return SimState(z=z_new, tame=tame, iteration=state.iteration + 1,
                    residuals=res_new, stall=stall, res_window=window)


# -------------------------------------------------------------- secular sweep

def _fresh_weights(p, z: np.ndarray) -> np.ndarray:
    d = z.size
    v = np.zeros(d, dtype=complex)
    for j in range(d):
        pv, _ = eval_any(p, z[j])
        v[j] = pv / np.prod(z[j] - np.delete(z, j))
    return v


def _secular_sweep(z, v, tame, d):
    """One secular update: the Ehrlich correction expressed through the
    weights, E_j = v_j / (1 + sum_{k != j} v_k/(z_j - z_k)), followed by the
    weight refresh. The refresh is the paper's product formula with the pole
    at the k = j term removed algebraically, which makes it exactly the
    fresh weight at the new nodes:

        v_j_new = prod_{i != j} (z_j_new - z_i)/(z_j_new - z_i_new)
                  * [v_j + (z_j_new - z_j) * (1 + sum_{k != j} v_k/(z_j_new - z_k))]

    Returns (z_new, v_new, residuals) or raises ZeroDivisionError on a
    denominator collision.
    """
    updates = np.zeros(d, dtype=complex)
    for j in range(d):
        if tame[j]:
            continue
        others = np.delete(np.arange(d), j)
        s = np.sum(v[others] / (z[j] - z[others]))
        den = 1.0 + s
        if den == 0.0 or not np.isfinite(den):
            raise ZeroDivisionError("secular denominator vanished")
        updates[j] = v[j] / den
    z_new = z - updates
    v_new = np.zeros(d, dtype=complex)
    res = np.zeros(d)
    for j in range(d):
        others = np.delete(np.arange(d), j)
        num = z_new[j] - z[others]
        dwn = z_new[j] - z_new[others]
        if np.any(num == 0.0) or np.any(dwn == 0.0):
            raise ZeroDivisionError("secular node collision")
        t = np.sum(v[others] / num)
        v_new[j] = np.prod(num / dwn) * (v[j] + (z_new[j] - z[j]) * (1.0 + t))
        res[j] = abs(v_new[j]) * float(np.prod(np.abs(dwn)))
        if not np.isfinite(v_new[j]):
            raise ZeroDivisionError("secular weight overflow")
    return z_new, v_new, res


def secular_step(p, state: SimState, config: Optional[SolverConfig] = None) -> SimState:
    """One sweep of the secular-equation variant.

    Weights start as v_j = p(z_j) / prod_{i != j}(z_j - z_i) and afterwards
    are carried between sweeps by the product-formula refresh, so the sweep
    costs no polynomial evaluations; residuals come from the secular
    identity |p(z_j)| = |v_j| * prod |z_j - z_i|.  A node collision is
    perturbed and retried once, then raised.
    """
    if config is None:
        config = SolverConfig()
    d = state.z.size
    z = _separate(state.z)
    v = state.v if state.v is not None and state.v.size == d else _fresh_weights(p, z)
    try:
        z_new, v_new, res_new = _secular_sweep(z, v, state.tame, d)
    except ZeroDivisionError:
        scale = max(1.0, float(np.max(np.abs(z))))
        z = z + COLLISION_REL * scale * np.exp(2j * np.pi * np.arange(d) / max(d, 1))
        v = _fresh_weights(p, z)
        try:
            z_new, v_new, res_new = _secular_sweep(z, v, state.tame, d)
        except ZeroDivisionError as exc:
            raise ArithmeticError("secular sweep hit a node collision twice") from exc
    updates = z - z_new
    tame, stall, window = _advance_bookkeeping(state, z_new, updates, res_new,
                                               d, config.epsilon)
    return SimState(z=z_new, tame=tame, iteration=state.iteration + 1,
                    residuals=res_new, stall=stall, res_window=window, v=v_new)


# ------------------------------------------------------------------ solve_all

def _certified_radius(p, x, floor: float = 0.0) -> float:
    """Inclusion radius at x that an evaluation can actually support.

    The Cauchy radius d|p/p'| is extended by the noise horizon eta/|p'|,
    where eta bounds the rounding error of evaluating p at x (coefficient
    sum for dense p, value scale for a black box): within that distance the
    computed p(x) cannot be told from zero, so no smaller radius is honest.
    Near a multiple root the Cauchy radius alone collapses to 0 whenever the
    evaluation accidentally rounds to zero.
    """
    pv, dpv = eval_any(p, x)
    if isinstance(p, Poly):
        # forward error of Horner evaluation: ~2n ulps on the modulus sum
        mods = np.abs(np.asarray(x)) ** np.arange(p.coeffs.size)
        eta = 2.0 * p.coeffs.size * EPS_MACH * float(np.sum(np.abs(p.coeffs) * mods))
    else:
        eta = 2.0 * degree_of(p) * EPS_MACH * max(1.0, abs(pv))
    r = floor
    if abs(dpv) > 0.0:
        if abs(pv) > 0.0:
            r = max(r, degree_of(p) * abs(pv / dpv))
        r = max(r, eta / abs(dpv))
    return float(r)


def _cluster_points(p, z: np.ndarray, radii: list) -> list:
    """Group approximations whose certified inclusion discs overlap; returns
    a list of (center, radius, member_count) clusters."""
    d = z.size
    parent = list(range(d))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(d):
        for j in range(i + 1, d):
            if abs(z[i] - z[j]) <= 2.0 * (radii[i] + radii[j]):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups: dict[int, list[int]] = {}
    for i in range(d):
        groups.setdefault(find(i), []).append(i)
    out = []
    for members in groups.values():
        pts = z[members]
        c = complex(np.mean(pts))
        spread = max(abs(x - c) for x in pts)
        r = spread + max(radii[i] for i in members)
        out.append((c, r, len(members)))
    return out


def solve_all(p, config: Optional[SolverConfig] = None, method: str = "ehrlich",
              seed: int = 0, max_sweeps: int = MAX_SWEEPS) -> RootReport:
    """Approximate all d roots by simultaneous sweeps.

    Runs the chosen stepper until every approximation is tame or the sweep
    cap is hit.  A small leftover wild set (at most wild_cap(d)) is deflated
    against the tame roots and the factor is finished by the subdivision
    solver; a large one is reported as missing with stats["flagged"] set.
    Coinciding tame approximations are merged into clusters whose
    multiplicity is settled by a root count.
    """
    if config is None:
        config = SolverConfig()
    if method not in ("ehrlich", "secular"):
        raise ValueError(f"unknown method {method!r}")
    d = degree_of(p)
    if d < 1:
        raise ValueError("need degree >= 1")
    eval0 = getattr(p, "eval_count", None)
    cover = None
    if isinstance(p, Poly):
        try:
            cover = annuli_cover(p)
        except (ArithmeticError, ValueError):
            cover = None
    state = SimState.from_points(p, initialize(p, d, cover, seed))
    stepper = ehrlich_step if method == "ehrlich" else secular_step
    while state.iteration < max_sweeps and not bool(np.all(state.tame)):
        state = stepper(p, state, config)
    wild = int(np.sum(~state.tame))
    stats = {
        "sweeps": state.iteration,
        "tame": d - wild,
        "wild": wild,
        "method": method,
        "flagged": False,
    }
    roots: list[RootApprox] = []
    tame_pts = state.z[state.tame]
    if tame_pts.size:
        radii = []
        for x in tame_pts:
            rho = cauchy_inclusion_radius(p, x)
            # the freeze criterion cannot place a root more precisely than
            # the tameness tolerance it stopped at
            floor = _tol_tame(x, d, config.epsilon)
            if rho is not None:
                floor = max(floor, rho)
            radii.append(_certified_radius(p, x, floor=floor))
        for c, r, k in _cluster_points(p, tame_pts, radii):
            mult = k
            if k > 1:
                try:
                    got = count_roots(p, Disc(c, max(2.0 * r, config.epsilon)),
                                      q0=config.q0, qmax=config.qmax)
                    mult = got.count
                except (UndecidedCountError, ContourRootError, ArithmeticError):
                    mult = k
            roots.append(RootApprox(complex(c), float(r), mult, method))
    if wild > 0:
        handled = False
        if 0 < wild <= wild_cap(d) and tame_pts.size:
            from .deflation import deflate_evalinterp, deflate_powersum

            tame_list = [complex(x) for x in tame_pts]
            try:
                try:
                    defl = deflate_powersum(p, tame_list, wild)
                except ArithmeticError:
                    defl = deflate_evalinterp(p, tame_list, wild)
                inner = _solve_by_subdivision(defl.factor, None, config,
                                              _allow_deflation=False)
                roots.extend(
                    RootApprox(r.approx,
                               _certified_radius(p, r.approx, floor=r.radius),
                               r.multiplicity, "deflated")
                    for r in inner.roots
                )
                handled = True
            except (ArithmeticError, ValueError):
                handled = False
        if not handled:
            stats["flagged"] = True
    found = sum(r.multiplicity for r in roots)
    if eval0 is not None:
        stats["evaluations"] = p.eval_count - eval0
    return RootReport(roots=roots, residual_roots_missing=max(d - found, 0),
                      stats=stats)
