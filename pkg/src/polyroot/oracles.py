"""Reference implementations and corpus builders for tests and benches.

Ground truth everywhere is a constructed root multiset: polynomials are built
from known roots, and every oracle here works directly off those roots or off
schoolbook algorithms.  No external root-finder is consulted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .polycore import Disc, Poly, norm

RESIDUAL_TOL = 1e-8

__all__ = [
    "Corpus",
    "brute_power_sums",
    "build_from_roots",
    "expand_family",
    "long_division",
    "random_roots",
    "separated_roots",
]


def build_from_roots(roots) -> Poly:
    """Monic polynomial with the given root multiset.

    Factors multiply in descending-modulus order (ties broken by angle), which
    keeps the running product's coefficient error damped and makes the result
    deterministic for a fixed multiset.
    """
    rs = [complex(r) for r in roots]
    if not rs:
        return Poly([1.0])
    rs.sort(key=lambda z: (-abs(z), math.atan2(z.imag, z.real)))
    coeffs = np.array([1.0 + 0j])
    for r in rs:
        coeffs = np.convolve(coeffs, np.array([-r, 1.0 + 0j]))
    return Poly(coeffs)


def brute_power_sums(roots, disc: Disc, qmax: int) -> list:
    """Centered power sums from an explicit root list.

    Entry h is ``sum of (x_j - center)**h`` over the roots lying in the closed
    disc, for h = 0..qmax-1.  This is what the contour-based estimators
    approximate, so it serves as their ground truth.
    """
    sel = [complex(r) - disc.center for r in roots if abs(complex(r) - disc.center) <= disc.radius]
    out = []
    for h in range(qmax):
        out.append(sum(z**h for z in sel) if sel else 0j)
    return out


def long_division(p: Poly, v: Poly):
    """Schoolbook polynomial division: returns (quotient, remainder).

    Independent of the production division routes; used to cross-check them.
    """
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


def expand_family(name: str, k: int) -> Poly:
    """Dense expansion of a recurrence family, for degrees up to 256.

    Names: "mandelbrot" (p0=1, p1=x, p_{i+1}=x*p_i^2+1), "mandelbrot-map"
    (p0=0, p1=x, p_{i+1}=p_i^2+x), "iterated-square" (p0=x, p_{i+1}=p_i^2+2).
    """
    x = Poly([0.0, 1.0])
    one = Poly([1.0])
    if name == "mandelbrot":
        if k < 0:
            raise ValueError("k must be >= 0")
        if 2**k - 1 > 256:
            raise ValueError("dense expansion capped at degree 256")
        if k == 0:
            return one
        p = x
        for _ in range(k - 1):
            p = x * p * p + one
        return p
    if name == "mandelbrot-map":
        if k < 1:
            raise ValueError("k must be >= 1")
        if 2 ** (k - 1) > 256:
            raise ValueError("dense expansion capped at degree 256")
        p = Poly([0.0])
        for _ in range(k):
            p = p * p + x
        return p
    if name == "iterated-square":
        if k < 0:
            raise ValueError("k must be >= 0")
        if 2**k > 256:
            raise ValueError("dense expansion capped at degree 256")
        p = x
        two = Poly([2.0])
        for _ in range(k):
            p = p * p + two
        return p
    raise ValueError(f"unknown family {name!r}")


def random_roots(rng: np.random.Generator, n: int, inner=None, outer=None) -> np.ndarray:
    """n roots with uniformly random angles and moduli drawn from the given
    ranges; ``inner``/``outer`` are (lo, hi) modulus ranges and the split
    between them is as even as the counts allow when both are given."""
    if inner is None and outer is None:
        raise ValueError("need at least one modulus range")
    mods = []
    if inner is not None and outer is not None:
        n_in = rng.integers(0, n + 1)
        mods.extend(rng.uniform(inner[0], inner[1], size=int(n_in)))
        mods.extend(rng.uniform(outer[0], outer[1], size=n - int(n_in)))
    else:
        lo, hi = inner if inner is not None else outer
        mods.extend(rng.uniform(lo, hi, size=n))
    mods = np.asarray(mods)
    angles = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return mods * np.exp(1j * angles)


def separated_roots(rng: np.random.Generator, n: int, box: float = 1.0, min_sep: float = 0.05, max_tries: int = 20000) -> np.ndarray:
    """n roots in the square [-box, box]^2 with pairwise separation >= min_sep
    (rejection sampling; raises if the box cannot host them)."""
    pts: list[complex] = []
    tries = 0
    while len(pts) < n:
        tries += 1
        if tries > max_tries:
            raise RuntimeError(f"could not place {n} roots at separation {min_sep}")
        z = complex(rng.uniform(-box, box), rng.uniform(-box, box))
        if all(abs(z - w) >= min_sep for w in pts):
            pts.append(z)
    return np.asarray(pts)


@dataclass
class Corpus:
    """A batch of constructed test polynomials with their known roots.

    Every entry is checked at build time: the residual |p(root)| must stay
    below RESIDUAL_TOL * |p|_1 * (1 + |root|)^d, else construction failed and
    the corpus refuses to ship it.
    """

    seed: int
    polys: list = field(default_factory=list)
    roots: list = field(default_factory=list)

    def add(self, p: Poly, roots) -> None:
        rs = np.asarray([complex(r) for r in roots])
        d = p.degree
        bound = RESIDUAL_TOL * norm(p, "one")
        for r in rs:
            res = abs(p(r))
            if res > bound * (1.0 + abs(r)) ** d:
                raise AssertionError(
                    f"corpus self-check failed: |p({r})| = {res:.3e} exceeds "
                    f"{bound * (1.0 + abs(r)) ** d:.3e}"
                )
        self.polys.append(p)
        self.roots.append(rs)

    def __len__(self) -> int:
        return len(self.polys)

    def __iter__(self):
        return iter(zip(self.polys, self.roots))

    def to_json(self) -> list:
        return [
            {
                "coeffs": [[c.real, c.imag] for c in p.coeffs],
                "roots": [[r.real, r.imag] for r in rs],
            }
            for p, rs in self
        ]
