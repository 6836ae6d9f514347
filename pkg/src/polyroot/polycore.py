"""Dense and black-box polynomial primitives.

Complex polynomials are stored densely in the monomial basis, lowest degree
first.  Evaluation-only polynomials (recurrence families, wrapped handles) go
through :class:`BlackBoxPoly`.  Everything downstream builds on the kernels
here: fused Horner evaluation, radix-2 DFT, evaluation at scaled roots of
unity, Taylor shift, reversal, trailing coefficients from a black box, norms,
and the coefficient file format.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

EPS = float(np.finfo(np.float64).eps)
TINY = 1e-290

__all__ = [
    "EPS",
    "Annulus",
    "BlackBoxPoly",
    "Disc",
    "NonFiniteEvaluationError",
    "Poly",
    "ZeroPolynomialError",
    "blackbox_from_poly",
    "degree_of",
    "dft",
    "eval_any",
    "eval_at_roots_of_unity",
    "eval_horner",
    "iterated_square",
    "load_coefficients",
    "mandelbrot",
    "mandelbrot_map",
    "norm",
    "reverse",
    "save_coefficients",
    "shift_scale",
    "trailing_coeffs_blackbox",
]


class ZeroPolynomialError(ValueError):
    """The zero polynomial reached an operation that needs roots."""


class NonFiniteEvaluationError(ArithmeticError):
    """An evaluation overflowed or produced NaN."""


class Poly:
    """Dense polynomial ``sum_i coeffs[i] * x**i``, lowest degree first.

    Trailing exact zeros are trimmed on construction.  The zero polynomial is
    representable (``is_zero`` set) but rejected by root-facing operations.

    Parameters
    ----------
    coeffs : sequence of complex
        Coefficients, index i holding the degree-i coefficient.
    """

    __slots__ = ("coeffs", "_py")

    def __init__(self, coeffs):
        a = np.atleast_1d(np.asarray(coeffs, dtype=np.complex128)).ravel()
        if a.size == 0:
            a = np.zeros(1, dtype=np.complex128)
        n = a.size
        while n > 1 and a[n - 1] == 0:
            n -= 1
        a = a[:n].copy()
        a.setflags(write=False)
        self.coeffs = a
        self._py = None

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0

    @property
    def py_coeffs(self) -> list:
        """Coefficients as a cached list of python complex (generic-scalar path)."""
        if self._py is None:
            self._py = [complex(c) for c in self.coeffs]
        return self._py

    def monic(self) -> "Poly":
        if self.is_zero:
            raise ZeroPolynomialError("zero polynomial has no monic form")
        return Poly(self.coeffs / self.coeffs[-1])

    def derivative(self) -> "Poly":
        if self.degree == 0:
            return Poly([0.0])
        k = np.arange(1, self.coeffs.size)
        return Poly(self.coeffs[1:] * k)

    def __call__(self, x):
        return eval_horner(self, x)[0]

    def __mul__(self, other):
        if isinstance(other, Poly):
            if self.is_zero or other.is_zero:
                return Poly([0.0])
            return Poly(np.convolve(self.coeffs, other.coeffs))
        return Poly(self.coeffs * other)

    __rmul__ = __mul__

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(a.size, b.size)
        out = np.zeros(n, dtype=np.complex128)
        out[: a.size] += a
        out[: b.size] += b
        return Poly(out)

    def __sub__(self, other):
        return self + Poly(-other.coeffs)

    def __neg__(self):
        return Poly(-self.coeffs)

    def __repr__(self):
        return f"Poly(degree={self.degree})"


@dataclass(frozen=True)
class Disc:
    """Closed disc ``|x - center| <= radius``."""

    center: complex
    radius: float

    def __post_init__(self):
        if not (self.radius >= 0.0) or not math.isfinite(self.radius):
            raise ValueError(f"disc radius must be finite and >= 0, got {self.radius}")

    def contains(self, x, rtol: float = 0.0) -> bool:
        return abs(x - self.center) <= self.radius * (1.0 + rtol)

    def dilate(self, factor: float) -> "Disc":
        return Disc(self.center, self.radius * factor)


@dataclass(frozen=True)
class Annulus:
    """Closed annulus ``inner <= |x - center| <= outer``."""

    center: complex
    inner: float
    outer: float

    def __post_init__(self):
        if not (0.0 <= self.inner <= self.outer):
            raise ValueError(f"need 0 <= inner <= outer, got [{self.inner}, {self.outer}]")

    def contains(self, x) -> bool:
        r = abs(x - self.center)
        return self.inner <= r <= self.outer


@dataclass
class BlackBoxPoly:
    """Evaluation-only polynomial handle.

    ``eval_fn(x)`` must return ``(value, derivative)`` deterministically.  The
    handle tracks how many evaluations were issued (`eval_count`); callers that
    care about oracle complexity read it off after a run.

    Attributes
    ----------
    degree : int
        Exact degree of the represented polynomial.
    eval_fn : callable
        Map x -> (p(x), p'(x)).  Must accept complex scalars; the recurrence
        families also accept any scalar type with * and + (high precision).
    kind : str
        One of "dense", "mandelbrot", "mandelbrot_map", "iterated_square",
        "custom".
    sequential_only : bool
        True when evaluations must not be issued concurrently.
    meta : dict
        Family parameters (k, wrapped Poly, ...).
    """

    degree: int
    eval_fn: Callable
    kind: str = "custom"
    sequential_only: bool = False
    meta: dict = field(default_factory=dict)
    eval_count: int = field(default=0, init=False)

    def eval(self, x):
        self.eval_count += 1
        return self.eval_fn(x)

    def reset_count(self):
        self.eval_count = 0


def blackbox_from_poly(p: Poly) -> BlackBoxPoly:
    """Wrap a dense polynomial as a black-box handle."""
    if p.is_zero:
        raise ZeroPolynomialError("cannot wrap the zero polynomial")
    return BlackBoxPoly(
        degree=p.degree,
        eval_fn=lambda x, _p=p: eval_horner(_p, x),
        kind="dense",
        meta={"poly": p},
    )


def mandelbrot(k: int) -> BlackBoxPoly:
    """Family p_0 = 1, p_1 = x, p_{i+1} = x * p_i**2 + 1; degree 2**k - 1."""
    if k < 0:
        raise ValueError("k must be >= 0")

    def ev(x, _k=k):
        if _k == 0:
            return 1.0 + 0j, 0.0 + 0j
        v, dv = x, 1.0 + 0j
        for _ in range(_k - 1):
            v, dv = x * v * v + 1.0, v * v + 2.0 * x * v * dv
        return v, dv

    return BlackBoxPoly(degree=2**k - 1, eval_fn=ev, kind="mandelbrot", meta={"k": k})


def mandelbrot_map(k: int) -> BlackBoxPoly:
    """Family p_0 = 0, p_1 = x, p_{i+1} = p_i**2 + x; degree 2**(k-1)."""
    if k < 1:
        raise ValueError("k must be >= 1 (p_0 is the zero polynomial)")

    def ev(x, _k=k):
        v, dv = 0.0 + 0j, 0.0 + 0j
        for _ in range(_k):
            v, dv = v * v + x, 2.0 * v * dv + 1.0
        return v, dv

    return BlackBoxPoly(degree=2 ** (k - 1), eval_fn=ev, kind="mandelbrot_map", meta={"k": k})


def iterated_square(k: int) -> BlackBoxPoly:
    """Family p_0 = x, p_{i+1} = p_i**2 + 2; degree 2**k."""
    if k < 0:
        raise ValueError("k must be >= 0")

    def ev(x, _k=k):
        v, dv = x, 1.0 + 0j
        for _ in range(_k):
            v, dv = v * v + 2.0, 2.0 * v * dv
        return v, dv

    return BlackBoxPoly(degree=2**k, eval_fn=ev, kind="iterated_square", meta={"k": k})


def degree_of(p) -> int:
    """Degree of a dense or black-box polynomial."""
    if isinstance(p, Poly):
        if p.is_zero:
            raise ZeroPolynomialError("zero polynomial has no degree")
        return p.degree
    return p.degree


def eval_any(p, x):
    """Evaluate dense or black-box p at one point, returning (value, derivative)."""
    if isinstance(p, Poly):
        return eval_horner(p, x)
    return p.eval(x)


def eval_horner(p: Poly, x):
    """Fused Horner evaluation of value and first derivative.

    Parameters
    ----------
    p : Poly
    x : scalar or ndarray
        Numpy arrays evaluate vectorized; builtin/numpy scalars run a python
        loop over cached complex coefficients; any other scalar type with
        + and * (e.g. a high-precision complex) works through the same loop.

    Returns
    -------
    (value, derivative)
        Same shape as x.
    """
    if isinstance(x, np.ndarray):
        b = np.zeros_like(x, dtype=np.complex128)
        db = np.zeros_like(b)
        for c in p.coeffs[::-1]:
            db = db * x + b
            b = b * x + c
        return b, db
    if isinstance(x, (int, float, complex, np.integer, np.floating, np.complexfloating)):
        x = complex(x)
        b = 0j
        db = 0j
        for c in reversed(p.py_coeffs):
            db = db * x + b
            b = b * x + c
        return b, db
    # generic scalar (duck-typed arithmetic, coefficients promoted by the scalar)
    b = 0 * x
    db = 0 * x
    for c in reversed(p.py_coeffs):
        db = db * x + b
        b = b * x + c
    return b, db


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def next_pow2(n: int) -> int:
    """Smallest power of 2 that is >= max(n, 1)."""
    n = max(int(n), 1)
    return 1 << (n - 1).bit_length()


def dft(values, inverse: bool = False) -> np.ndarray:
    """Radix-2 discrete Fourier transform.

    Forward convention: ``out[g] = sum_h values[h] * zeta**(g*h)`` with
    ``zeta = exp(2j*pi/q)``; the inverse divides by q and conjugates the
    kernel, so ``dft(dft(v), inverse=True) == v``.

    Parameters
    ----------
    values : sequence of complex, length a power of 2
    inverse : bool

    Returns
    -------
    ndarray of complex128
    """
    a = np.asarray(values, dtype=np.complex128)
    q = a.size
    if not _is_pow2(q):
        raise ValueError(f"length must be a power of 2, got {q}")
    if inverse:
        return np.fft.fft(a) / q
    return np.fft.ifft(a) * q


def eval_at_roots_of_unity(p, center, radius: float, q: int, rotation=None):
    """Evaluate p and p' at the q scaled roots of unity on |x - center| = radius.

    Points are ``center + radius * rotation * zeta**g`` for g = 0..q-1 with
    ``zeta = exp(2j*pi/q)`` and ``rotation`` a unimodular twist (default 1).

    Dense polynomials with center 0 and power-of-2 q use coefficient wrapping
    plus one DFT per output; otherwise a batched Horner pass runs over all q
    points.  Black-box handles cost exactly q evaluations.

    Returns
    -------
    (values, derivs) : ndarray pairs of length q
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    rot = 1.0 + 0j if rotation is None else complex(rotation)
    if isinstance(p, Poly):
        if p.is_zero:
            raise ZeroPolynomialError("cannot evaluate the zero polynomial on a contour")
        if center == 0 and _is_pow2(q):
            out = _wrapped_dft_eval(p, radius * rot, q)
            if out is not None:
                return out
        zeta = np.exp(2j * np.pi * np.arange(q) / q)
        pts = center + radius * rot * zeta
        values, derivs = eval_horner(p, pts)
    else:
        zeta = np.exp(2j * np.pi * np.arange(q) / q)
        pts = center + radius * rot * zeta
        values = np.empty(q, dtype=np.complex128)
        derivs = np.empty(q, dtype=np.complex128)
        for g in range(q):
            v, dv = p.eval(pts[g])
            values[g] = v
            derivs[g] = dv
    if not (np.all(np.isfinite(values.view(np.float64))) and np.all(np.isfinite(derivs.view(np.float64)))):
        raise NonFiniteEvaluationError("evaluation on the contour overflowed or returned NaN")
    return values, derivs


def _wrapped_dft_eval(p: Poly, scale: complex, q: int):
    """Wrapped-coefficient fast path; returns None when scaling overflows."""
    n = p.coeffs.size
    with np.errstate(over="ignore", invalid="ignore"):
        powers = scale ** np.arange(n)
        scaled = p.coeffs * powers
    if not np.all(np.isfinite(scaled.view(np.float64))):
        return None
    values = dft(_wrap(scaled, q))
    dcoeffs = p.coeffs[1:] * np.arange(1, n)
    if dcoeffs.size == 0:
        derivs = np.zeros(q, dtype=np.complex128)
    else:
        with np.errstate(over="ignore", invalid="ignore"):
            dscaled = dcoeffs * powers[: n - 1]
        if not np.all(np.isfinite(dscaled.view(np.float64))):
            return None
        derivs = dft(_wrap(dscaled, q))
    return values, derivs


def _wrap(coeffs: np.ndarray, q: int) -> np.ndarray:
    pad = (-coeffs.size) % q
    a = np.concatenate([coeffs, np.zeros(pad, dtype=np.complex128)])
    return a.reshape(-1, q).sum(axis=0)


def shift_scale(p: Poly, c, rho) -> Poly:
    """Compose ``t(x) = p(c + rho*x)`` in one Horner pass over polynomials.

    rho = 0 is rejected (the composition would collapse to a constant).
    """
    if p.is_zero:
        return Poly([0.0])
    if rho == 0:
        raise ValueError("rho must be nonzero")
    c = complex(c)
    rho = complex(rho)
    n = p.coeffs.size
    buf = np.zeros(n, dtype=np.complex128)
    used = 1
    buf[0] = p.coeffs[-1]
    for coeff in p.coeffs[-2::-1]:
        head = buf[:used]
        shifted = np.zeros(used + 1, dtype=np.complex128)
        shifted[1:] = rho * head
        shifted[:used] += c * head
        shifted[0] += coeff
        used = min(used + 1, n)
        buf[:used] = shifted[:used]
    return Poly(buf[:used])


def reverse(p: Poly) -> Poly:
    """Reversal ``x**d * p(1/x)``: coefficients flipped end to end."""
    return Poly(p.coeffs[::-1])


def trailing_coeffs_blackbox(p, c, w: int, eps: float = 1e-4) -> np.ndarray:
    """First w Taylor coefficients of p at the point c.

    Dense inputs (and dense-wrapped handles) shift exactly.  The named
    recurrence families run their recurrence on series truncated to w terms,
    which is exact up to rounding.  Custom black boxes fall back to divided
    differences with step ``eps``; a magnitude-ratio guard raises when
    cancellation destroys all significant digits.

    Returns
    -------
    ndarray of length w, entry k holding the degree-k coefficient of p(c + y).
    """
    if w < 1:
        raise ValueError("w must be >= 1")
    if isinstance(p, Poly):
        return _trailing_exact(p, c, w)
    if p.kind == "dense":
        return _trailing_exact(p.meta["poly"], c, w)
    if p.kind in ("mandelbrot", "mandelbrot_map", "iterated_square"):
        return _trailing_family(p, c, w)
    return _trailing_divided_difference(p, c, w, eps)


def _trailing_exact(p: Poly, c, w: int) -> np.ndarray:
    t = shift_scale(p, c, 1.0)
    out = np.zeros(w, dtype=np.complex128)
    m = min(w, t.coeffs.size)
    out[:m] = t.coeffs[:m]
    return out


def _trailing_family(p: BlackBoxPoly, c, w: int) -> np.ndarray:
    k = p.meta["k"]
    c = complex(c)
    # series arithmetic truncated to w terms, in y where x = c + y
    x_ser = np.zeros(w, dtype=np.complex128)
    x_ser[0] = c
    if w > 1:
        x_ser[1] = 1.0

    def mul(a, b):
        return np.convolve(a, b)[:w]

    if p.kind == "mandelbrot":
        if k == 0:
            v = np.zeros(w, dtype=np.complex128)
            v[0] = 1.0
            return v
        v = x_ser.copy()
        for _ in range(k - 1):
            v = mul(x_ser, mul(v, v))
            v[0] += 1.0
    elif p.kind == "mandelbrot_map":
        v = np.zeros(w, dtype=np.complex128)
        for _ in range(k):
            v = mul(v, v) + x_ser
    else:
        v = x_ser.copy()
        for _ in range(k):
            v = mul(v, v)
            v[0] += 2.0
    return v


def _trailing_divided_difference(p: BlackBoxPoly, c, w: int, eps: float) -> np.ndarray:
    if eps <= 0:
        raise ValueError("eps must be positive")
    out = np.zeros(w, dtype=np.complex128)
    out[0] = p.eval(c)[0]
    if w == 1:
        return out
    probe = p.eval(c + eps)[0]
    scale = max(abs(out[0]), abs(probe))
    if scale > 0 and abs(probe - out[0]) <= 4.0 * EPS * scale and eps < 1e-8:
        raise ValueError(
            "cancellation guard: eps is below the relative resolution of p near c, "
            "all significant digits of the divided differences are lost"
        )
    for k in range(1, w):
        acc = probe
        mag = abs(probe)
        epow = 1.0
        for i in range(k):
            term = out[i] * epow
            acc -= term
            mag = max(mag, abs(term))
            epow *= eps
        if mag > 0 and abs(acc) <= 8.0 * EPS * mag:
            out[k] = 0.0
        else:
            out[k] = acc / epow
    return out


def norm(p: Poly, which: str = "one") -> float:
    """Coefficient norm: "one" (l1), "inf" (max), or "two" (l2)."""
    a = np.abs(p.coeffs)
    if which == "one":
        return float(a.sum())
    if which == "inf":
        return float(a.max())
    if which == "two":
        return float(np.sqrt((a * a).sum()))
    raise ValueError(f"unknown norm {which!r}")


def load_coefficients(path) -> Poly:
    """Read the coefficient file format: one "re im" pair per line, lowest
    degree first, blank lines and # comments ignored."""
    coeffs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 're im', got {raw.rstrip()!r}")
            try:
                re_part, im_part = float(parts[0]), float(parts[1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric coefficient") from exc
            coeffs.append(complex(re_part, im_part))
    if not coeffs:
        raise ValueError(f"{path}: no coefficients found")
    return Poly(coeffs)


def save_coefficients(p: Poly, path) -> None:
    """Write a Poly in the coefficient file format (lowest degree first)."""
    with open(path, "w", encoding="utf-8") as fh:
        for c in p.coeffs:
            fh.write(f"{float(c.real)!r} {float(c.imag)!r}\n")
