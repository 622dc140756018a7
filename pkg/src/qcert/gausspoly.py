"""Phase-space distributions as finite sums of polynomial x Gaussian terms.

Every term is a product of two one-dimensional factors of the form

    sum_m  b_m G_m(u) exp(-u**2 / s),        u = x - x0 (or p - p0),

where the polynomials G_m are generated by ``exp(2 c u t - kappa t**2)``.
For ``kappa > 0`` this is ``kappa**(m/2) H_m(c u / sqrt(kappa))`` with H_m the
physicists' Hermite polynomials, for ``kappa == 0`` it is ``(2 c u)**m`` and
for ``kappa < 0`` a Hermite polynomial of imaginary argument (all coefficients
nonnegative).  The family is closed under Gaussian convolution: smearing a
term by ``dT`` only rescales the table by ``sqrt(s / (s + dT))`` per axis and
moves ``(s, c, kappa)``, so the smearing map is exact and never converts
between bases.  With ``c = 1/sqrt(s)`` and ``kappa = 1`` this is the usual
Hermite damping identity.

Units: the vacuum Wigner function is ``exp(-(x**2 + p**2)) / pi`` and a
distribution at smearing level T has vacuum peak ``1 / (pi T)``.
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DegreeTooLarge,
    FockOrderTooLarge,
    LevelMismatch,
    NegativeSmearing,
    NonHermitian,
    NonPositiveWidth,
    NotNormalized,
    OrderTooLarge,
    SubWignerLevel,
    WeightOutOfRange,
    WeightsNotNormalized,
)

MAX_DEGREE = 64
MAX_FOCK = 32
MAX_SUPERPOSITION = 8


class PhasePoint(NamedTuple):
    x: float
    p: float


@dataclass(frozen=True)
class AxisBasis:
    """Gaussian ``exp(-u**2/width)`` and the polynomial family ``G_m``."""

    width: float
    scale: float
    kappa: float

    def __post_init__(self):
        if not (self.width > 0 and math.isfinite(self.width)):
            raise NonPositiveWidth(f"width must be positive, got {self.width!r}")

    @classmethod
    def hermite(cls, width: float) -> AxisBasis:
        """Width-matched Hermite basis H_m(u / sqrt(width))."""
        return cls(width, 1.0 / math.sqrt(width), 1.0)

    def smeared(self, dT: float) -> AxisBasis:
        s, c = self.width, self.scale
        s_new = s + dT
        return AxisBasis(s_new, c * s / s_new, self.kappa - c * c * s * dT / s_new)

    def values(self, u: np.ndarray, degree: int) -> np.ndarray:
        """Rows ``G_0(u) .. G_degree(u)`` via the three-term recurrence."""
        out = np.empty((degree + 1,) + u.shape)
        out[0] = 1.0
        if degree >= 1:
            two_cu = 2.0 * self.scale * u
            out[1] = two_cu
            for m in range(1, degree):
                out[m + 1] = two_cu * out[m] - (2.0 * m * self.kappa) * out[m - 1]
        return out

    def moments(self, degree: int) -> np.ndarray:
        # int G_m exp(-u^2/s) du = sqrt(pi s) (2l)!/l! (c^2 s - kappa)^l for m = 2l
        s = self.width
        q = self.scale**2 * s - self.kappa
        out = np.zeros(degree + 1)
        base = math.sqrt(math.pi * s)
        for m in range(0, degree + 1, 2):
            l = m // 2
            out[m] = base * math.factorial(m) / math.factorial(l) * q**l
        return out

    def monomial_matrix(self, degree: int) -> np.ndarray:
        """``A[m, j]`` = coefficient of ``u**j`` in ``G_m``."""
        A = np.zeros((degree + 1, degree + 1))
        A[0, 0] = 1.0
        if degree >= 1:
            A[1, 1] = 2.0 * self.scale
            for m in range(1, degree):
                A[m + 1, 1:] = 2.0 * self.scale * A[m, :-1]
                A[m + 1] -= 2.0 * m * self.kappa * A[m - 1]
        return A


def _as_real_table(table) -> np.ndarray:
    arr = np.asarray(table)
    if np.iscomplexobj(arr):
        scale = float(np.max(np.abs(arr))) if arr.size else 0.0
        if np.max(np.abs(arr.imag), initial=0.0) > 1e-12 * max(scale, 1e-300):
            raise NonHermitian("coefficient table has a non-negligible imaginary part")
        arr = arr.real
    arr = np.array(arr, dtype=float, copy=True)
    if arr.ndim != 2:
        raise ValueError("coefficient table must be two-dimensional")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GaussPolyTerm:
    """One polynomial x Gaussian term centred at ``center``.

    ``offsets`` records later displacements, newest first.  They are
    subtracted from the probe point one at a time instead of being folded
    into the centre, so a shifted term evaluated at ``q`` performs exactly
    the floating-point operations of the original term at ``q - v``.
    """

    coeffs: np.ndarray
    center: PhasePoint
    axis_x: AxisBasis
    axis_p: AxisBasis
    offsets: tuple = ()

    def __post_init__(self):
        table = _as_real_table(self.coeffs)
        if max(table.shape) - 1 > MAX_DEGREE:
            raise DegreeTooLarge(f"degree {max(table.shape) - 1} exceeds {MAX_DEGREE}")
        object.__setattr__(self, "coeffs", table)
        object.__setattr__(self, "_nonzero", tuple(zip(*np.nonzero(table))))
        object.__setattr__(self, "center", PhasePoint(float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "offsets", tuple((float(a), float(b)) for a, b in self.offsets))

    @classmethod
    def from_monomials(cls, table, center=(0.0, 0.0), width_x=1.0, width_p=1.0):
        """Term ``sum c[j,k] (x-x0)^j (p-p0)^k exp(-(x-x0)^2/wx - (p-p0)^2/wp)``."""
        # scale 1/2 with kappa 0 makes G_m(u) = u**m
        return cls(table, PhasePoint(*center), AxisBasis(width_x, 0.5, 0.0),
                   AxisBasis(width_p, 0.5, 0.0))

    @property
    def origin(self) -> PhasePoint:
        """Centre of the term including all displacements."""
        return PhasePoint(self.center.x + math.fsum(o[0] for o in self.offsets),
                          self.center.p + math.fsum(o[1] for o in self.offsets))

    @property
    def width_x(self) -> float:
        return self.axis_x.width

    @property
    def width_p(self) -> float:
        return self.axis_p.width

    @property
    def degrees(self) -> tuple[int, int]:
        return self.coeffs.shape[0] - 1, self.coeffs.shape[1] - 1

    def monomials(self) -> np.ndarray:
        """Coefficient table in powers of ``(x - x0)`` and ``(p - p0)``.

        Conversion to monomials is ill-conditioned at high degree; evaluation
        never goes through this table.
        """
        dx, dp = self.degrees
        Ax = self.axis_x.monomial_matrix(dx)
        Ap = self.axis_p.monomial_matrix(dp)
        return Ax.T @ self.coeffs @ Ap

    def evaluate(self, x, p) -> np.ndarray:
        u = np.asarray(x, dtype=float)
        v = np.asarray(p, dtype=float)
        for ox, op in self.offsets:
            u = u - ox
            v = v - op
        u = u - self.center.x
        v = v - self.center.p
        u, v = np.broadcast_arrays(u, v)
        dx, dp = self.degrees
        gx = self.axis_x.values(u.ravel(), dx)
        gp = self.axis_p.values(v.ravel(), dp)
        # elementwise accumulation in a fixed order: values do not depend on
        # array length or chunking, so grid and point evaluations agree bitwise
        poly = np.zeros(u.size)
        for j, k in self._nonzero:
            poly += self.coeffs[j, k] * (gx[j] * gp[k])
        gauss = np.exp(-(u.ravel() ** 2) / self.axis_x.width - v.ravel() ** 2 / self.axis_p.width)
        return (poly * gauss).reshape(u.shape)

    def integral(self) -> float:
        dx, dp = self.degrees
        return float(self.axis_x.moments(dx) @ self.coeffs @ self.axis_p.moments(dp))

    def smeared(self, dT: float) -> GaussPolyTerm:
        ax, ap = self.axis_x, self.axis_p
        factor = math.sqrt(ax.width / (ax.width + dT)) * math.sqrt(ap.width / (ap.width + dT))
        return GaussPolyTerm(self.coeffs * factor, self.center, ax.smeared(dT), ap.smeared(dT),
                             self.offsets)

    def shifted(self, dx: float, dp: float) -> GaussPolyTerm:
        return GaussPolyTerm(self.coeffs, self.center, self.axis_x, self.axis_p,
                             ((dx, dp),) + self.offsets)

    def scaled(self, w: float) -> GaussPolyTerm:
        return GaussPolyTerm(self.coeffs * w, self.center, self.axis_x, self.axis_p, self.offsets)


@dataclass(frozen=True, eq=False)
class Distribution:
    """Sum of terms at smearing level ``level`` (1 = Wigner, 2 = Husimi).

    Smeared copies requested through :meth:`at_level` are memoized on the
    instance; the cache is guarded by a lock so concurrent readers are safe.
    """

    terms: tuple[GaussPolyTerm, ...]
    level: float = 1.0
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False,
                                  compare=False)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "level", float(self.level))
        if not self.level >= 1.0:
            raise SubWignerLevel(f"level must be >= 1 (Wigner), got {self.level}")

    def __call__(self, x, p):
        return evaluate(self, x, p)

    def at_level(self, T: float) -> Distribution:
        T = float(T)
        if T < self.level:
            raise SubWignerLevel(f"cannot un-smear from level {self.level} to {T}")
        if T == self.level:
            return self
        with self._lock:
            hit = self._cache.get(T)
        if hit is None:
            hit = smear(self, T - self.level)
            with self._lock:
                hit = self._cache.setdefault(T, hit)
        return hit

    @property
    def max_degree(self) -> int:
        return max((max(t.degrees) for t in self.terms), default=0)


# ---------------------------------------------------------------- builders

def _monomial_to_hermite(a: int) -> list[tuple[int, Fraction]]:
    """``X**a = sum coef * H_deg(X)`` with exact rational coefficients."""
    out = []
    for i in range(a // 2 + 1):
        coef = Fraction(math.factorial(a), 2**a * math.factorial(i) * math.factorial(a - 2 * i))
        out.append((a - 2 * i, coef))
    return out


@lru_cache(maxsize=None)
def _dyad_table(m: int, n: int) -> np.ndarray:
    """Hermite table of the Wigner function of ``|m><n|`` (n >= m), times pi.

    The dyad is ``(-1)^m sqrt(m!/n!) (X + iP)^(n-m) L_m^(n-m)(X^2 + P^2)``
    in ``X = sqrt(2) x``, ``P = sqrt(2) p``; the table holds coefficients of
    ``H_j(X) H_k(P)`` and excludes the common ``exp(-x^2 - p^2) / pi``.
    """
    d = n - m
    poly: dict[tuple[int, int], list[Fraction]] = {}

    def add(key, re, im):
        cur = poly.setdefault(key, [Fraction(0), Fraction(0)])
        cur[0] += re
        cur[1] += im

    for j in range(m + 1):
        lag = Fraction((-1) ** j * math.comb(m + d, m - j), math.factorial(j))
        for i in range(j + 1):
            radial = lag * math.comb(j, i)
            for l in range(d + 1):
                # (iP)^l = i^l P^l
                phase = [(1, 0), (0, 1), (-1, 0), (0, -1)][l % 4]
                c = radial * math.comb(d, l)
                add((2 * i + d - l, 2 * (j - i) + l), c * phase[0], c * phase[1])

    size = m + n + 1
    re_tab = [[Fraction(0)] * size for _ in range(size)]
    im_tab = [[Fraction(0)] * size for _ in range(size)]
    for (a, b), (re, im) in poly.items():
        if re == 0 and im == 0:
            continue
        for ha, ca in _monomial_to_hermite(a):
            for hb, cb in _monomial_to_hermite(b):
                w = ca * cb
                re_tab[ha][hb] += re * w
                im_tab[ha][hb] += im * w
    pref = (-1) ** m * math.sqrt(math.factorial(m) / math.factorial(n))
    table = np.array([[float(r) for r in row] for row in re_tab]) \
        + 1j * np.array([[float(r) for r in row] for row in im_tab])
    return pref * table


@lru_cache(maxsize=None)
def _fock_table(n: int) -> np.ndarray:
    # (-1)^n L_n(X^2+P^2) = sum_k C(n,k) H_2k(X) H_2n-2k(P) / (4^n n!)
    table = np.zeros((2 * n + 1, 2 * n + 1))
    denom = 4**n * math.factorial(n)
    for k in range(n + 1):
        table[2 * k, 2 * n - 2 * k] = float(Fraction(math.comb(n, k), denom))
    table.setflags(write=False)
    return table


_FOCK_AXIS = AxisBasis(1.0, math.sqrt(2.0), 1.0)


def build_fock_wigner(n: int, x0: float = 0.0, p0: float = 0.0) -> Distribution:
    """Wigner function of the Fock state ``|n>`` displaced to ``(x0, p0)``."""
    if n < 0 or int(n) != n:
        raise ValueError(f"Fock order must be a nonnegative integer, got {n!r}")
    if n > MAX_FOCK:
        raise FockOrderTooLarge(f"n={n} exceeds the cap {MAX_FOCK}")
    term = GaussPolyTerm(_fock_table(int(n)) / math.pi, PhasePoint(x0, p0), _FOCK_AXIS, _FOCK_AXIS)
    return Distribution((term,), 1.0)


def build_gaussian(sx: float, sp: float, x0: float = 0.0, p0: float = 0.0) -> Distribution:
    """Axis-aligned Gaussian ``exp(-(x-x0)^2/sx - (p-p0)^2/sp) / (pi sqrt(sx sp))``.

    ``sx = sp = 1`` is the vacuum; squeezing by ``zeta`` with thermal factor
    ``nu`` corresponds to ``sx = nu e^{-2 zeta}``, ``sp = nu e^{2 zeta}``.
    """
    if not (sx > 0 and sp > 0):
        raise NonPositiveWidth(f"widths must be positive, got sx={sx!r}, sp={sp!r}")
    if sx * sp < 1.0 - 1e-12:
        warnings.warn(f"sx*sp = {sx * sp:.6g} < 1 is not a valid quantum state", stacklevel=2)
    norm = 1.0 / (math.pi * math.sqrt(sx * sp))
    term = GaussPolyTerm(np.array([[norm]]), PhasePoint(x0, p0),
                         AxisBasis.hermite(sx), AxisBasis.hermite(sp))
    return Distribution((term,), 1.0)


def squeezed_widths(zeta: float, nu: float = 1.0) -> tuple[float, float]:
    return nu * math.exp(-2.0 * zeta), nu * math.exp(2.0 * zeta)


def build_fock_superposition(coeffs: Sequence[complex], x0: float = 0.0,
                             p0: float = 0.0) -> Distribution:
    """Wigner function of the pure state ``sum_n coeffs[n] |n>`` displaced to ``(x0, p0)``."""
    c = np.asarray(coeffs, dtype=complex)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("coeffs must be a non-empty sequence")
    if c.size - 1 > MAX_SUPERPOSITION:
        raise OrderTooLarge(f"highest Fock order {c.size - 1} exceeds {MAX_SUPERPOSITION}")
    norm = float(np.sum(np.abs(c) ** 2))
    if abs(norm - 1.0) > 1e-12:
        raise NotNormalized(f"sum |c_n|^2 = {norm!r}, expected 1")
    top = c.size - 1
    size = 2 * top + 1
    table = np.zeros((size, size), dtype=complex)
    for m in range(c.size):
        for n in range(m, c.size):
            w = c[m] * np.conj(c[n])
            if w == 0:
                continue
            dyad = _dyad_table(m, n)
            a, b = dyad.shape
            if n == m:
                table[:a, :b] += w.real * dyad
            else:
                # |n><m| contributes the complex conjugate
                table[:a, :b] += 2.0 * (w * dyad).real
    term = GaussPolyTerm(table / math.pi, PhasePoint(x0, p0), _FOCK_AXIS, _FOCK_AXIS)
    return Distribution((term,), 1.0)


# -------------------------------------------------------------- operations

def mix(parts: Sequence[tuple[Distribution, float]]) -> Distribution:
    """Convex combination of distributions sharing one smearing level."""
    parts = list(parts)
    if not parts:
        raise ValueError("mix needs at least one part")
    level = parts[0][0].level
    total = 0.0
    terms: list[GaussPolyTerm] = []
    for d, w in parts:
        if d.level != level:
            raise LevelMismatch(f"levels {level} and {d.level} differ")
        if not 0.0 <= w <= 1.0:
            raise WeightOutOfRange(f"weight {w!r} outside [0, 1]")
        total += w
        terms.extend(t.scaled(w) for t in d.terms)
    if abs(total - 1.0) > 1e-12:
        raise WeightsNotNormalized(f"weights sum to {total!r}")
    return Distribution(tuple(terms), level)


def smear(d: Distribution, dT: float) -> Distribution:
    """Convolve with ``exp(-((x-x')^2 + (p-p')^2)/dT) / (pi dT)``; level rises by dT."""
    dT = float(dT)
    if dT < 0 or not math.isfinite(dT):
        raise NegativeSmearing(f"smearing must be a finite nonnegative number, got {dT!r}")
    if dT == 0.0:
        return d
    return Distribution(tuple(t.smeared(dT) for t in d.terms), d.level + dT)


def shift(d: Distribution, dx: float, dp: float) -> Distribution:
    """Displace by ``(dx, dp)``.

    ``evaluate(shift(d, dx, dp), x, p)`` equals ``evaluate(d, x - dx, p - dp)``
    bit for bit, also after smearing.
    """
    return Distribution(tuple(t.shifted(dx, dp) for t in d.terms), d.level)


def evaluate(d: Distribution, x, p):
    """Value of ``d`` at ``(x, p)``; scalars in, float out; arrays broadcast."""
    xa = np.asarray(x, dtype=float)
    pa = np.asarray(p, dtype=float)
    shape = np.broadcast_shapes(xa.shape, pa.shape)
    total = np.zeros(shape)
    for t in d.terms:
        total = total + t.evaluate(xa, pa)
    if total.ndim == 0:
        return float(total)
    return total


def integrate(d: Distribution) -> float:
    """Exact phase-space integral from per-term Gaussian moments."""
    return float(math.fsum(t.integral() for t in d.terms))
