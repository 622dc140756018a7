"""Brute-force reference values for tests and diagnostics.

Nothing here goes through the closed-form smearing algebra: convolutions are
done by equal-spacing trapezoid quadrature of the smearing integral, and
Wigner functions are computed directly from Fock-basis wavefunctions.  The
routines are deliberately simple and slow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import KernelUnderResolved
from .gausspoly import Distribution, evaluate


@dataclass(frozen=True)
class QuadratureSettings:
    truncation_radius: float = 12.0
    points_per_axis: int = 801

    def __post_init__(self):
        if self.truncation_radius < 8:
            raise ValueError("truncation_radius must be >= 8")
        if self.points_per_axis < 3 or self.points_per_axis % 2 == 0:
            raise ValueError("points_per_axis must be odd and >= 3")

    @property
    def spacing(self) -> float:
        return 2.0 * self.truncation_radius / (self.points_per_axis - 1)

    def halved(self) -> QuadratureSettings:
        return QuadratureSettings(self.truncation_radius, 2 * self.points_per_axis - 1)


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def _nodes(center: float, settings: QuadratureSettings) -> np.ndarray:
    R = settings.truncation_radius
    return np.linspace(center - R, center + R, settings.points_per_axis)


def _check_kernel(dT: float, settings: QuadratureSettings) -> None:
    # kernel standard deviation sqrt(dT/2) must span several nodes
    if dT <= 1e-3 or math.sqrt(dT / 2.0) < 4.0 * settings.spacing:
        raise KernelUnderResolved(
            f"dT={dT!r} is too narrow for node spacing {settings.spacing:.3g}")


def _kernel_1d(q: np.ndarray, nodes: np.ndarray, dT: float) -> np.ndarray:
    return np.exp(-((q[:, None] - nodes[None, :]) ** 2) / dT) / math.sqrt(math.pi * dT)


def quadrature_smear(d: Distribution, dT: float, x: float, p: float,
                     settings: QuadratureSettings = QuadratureSettings()) -> float:
    """``int int d(x', p') exp(-((x-x')^2 + (p-p')^2)/dT) / (pi dT) dx' dp'``.

    The truncation square is centred on the probe point.
    """
    _check_kernel(dT, settings)
    xs, ps = _nodes(x, settings), _nodes(p, settings)
    h = settings.spacing
    X, P = np.meshgrid(xs, ps, indexing="ij")
    integrand = evaluate(d, X, P) * np.exp(-((x - X) ** 2 + (p - P) ** 2) / dT) / (math.pi * dT)
    wx = _trapezoid_weights(xs.size, h)
    wp = _trapezoid_weights(ps.size, h)
    return float(wx @ integrand @ wp)


def quadrature_smear_grid(d: Distribution, dT: float, qx: Sequence[float], qp: Sequence[float],
                          settings: QuadratureSettings = QuadratureSettings(),
                          center: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """Same integral on a probe grid, ``out[i, j]`` at ``(qx[i], qp[j])``.

    The kernel factorizes per axis, so the double sum is two matrix
    products over one shared sample of ``d`` on a square around ``center``.
    """
    _check_kernel(dT, settings)
    qx = np.asarray(qx, dtype=float)
    qp = np.asarray(qp, dtype=float)
    xs, ps = _nodes(center[0], settings), _nodes(center[1], settings)
    h = settings.spacing
    X, P = np.meshgrid(xs, ps, indexing="ij")
    D = evaluate(d, X, P)
    Kx = _kernel_1d(qx, xs, dT) * _trapezoid_weights(xs.size, h)
    Kp = _kernel_1d(qp, ps, dT) * _trapezoid_weights(ps.size, h)
    return Kx @ D @ Kp.T


def quadrature_integrate(d: Distribution, settings: QuadratureSettings = QuadratureSettings(),
                         center: tuple[float, float] = (0.0, 0.0)) -> float:
    xs, ps = _nodes(center[0], settings), _nodes(center[1], settings)
    h = settings.spacing
    X, P = np.meshgrid(xs, ps, indexing="ij")
    return float(_trapezoid_weights(xs.size, h) @ evaluate(d, X, P) @ _trapezoid_weights(ps.size, h))


# ---------------------------------------------------- wavefunction route

def hermite_functions(n_max: int, x: np.ndarray) -> np.ndarray:
    """Normalized oscillator eigenfunctions psi_0..psi_n_max at ``x``."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = math.pi**-0.25 * np.exp(-0.5 * x**2)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def wigner_from_wavefunction(coeffs: Sequence[complex], x: float, p: float,
                             radius: float = 12.0, points: int = 2401) -> float:
    """``(1/pi) int psi*(x + y) psi(x - y) exp(2 i p y) dy`` for ``psi = sum c_n psi_n``."""
    c = np.asarray(coeffs, dtype=complex)
    y = np.linspace(-radius, radius, points)
    h = y[1] - y[0]
    plus = c @ hermite_functions(c.size - 1, x + y)
    minus = c @ hermite_functions(c.size - 1, x - y)
    integrand = np.conj(plus) * minus * np.exp(2j * p * y)
    val = _trapezoid_weights(points, h) @ integrand / math.pi
    return float(val.real)
