"""Pointwise nonclassicality certification functionals.

All functionals use the smearing level T >= 1 (T = 1 Wigner, T = 2 Husimi):

    xi(T)        = P(T) - 4 pi T P(2T)^2
    S(T, dT)     = P(T) - (1/T) pi^(dT/T) [(T + dT) P(T + dT)]^((T + dT)/T)
    xi_k(T, k)   = P(T) - pi T / (k (1 - k)) P(T/k) P(T/(1 - k))

Each vanishes identically on coherent states; a negative value anywhere
certifies nonclassicality, a nonnegative one is inconclusive.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import KOutOfRange, NegativeBase, PowerDomainViolation, SubWignerLevel
from .gausspoly import Distribution, evaluate

VANISH_TOL = 1e-12
_INTEGER_TOL = 1e-12


class Kind(str, enum.Enum):
    XI = "xi"
    BIGS = "bigs"
    XIK = "xik"


def _check_level(T: float) -> float:
    T = float(T)
    if not T >= 1.0:
        raise SubWignerLevel(f"T must be >= 1 (Wigner or smoother), got {T!r}")
    return T


def _finish(values):
    if np.ndim(values) == 0:
        return float(values)
    return values


def eval_p(state: Distribution, T: float, x, p):
    """The distribution smeared to level ``T``, evaluated at ``(x, p)``."""
    T = _check_level(T)
    return evaluate(state.at_level(T), x, p)


def eval_xi(state: Distribution, T: float, x, p):
    T = _check_level(T)
    p_t = np.asarray(eval_p(state, T, x, p))
    p_2t = np.asarray(eval_p(state, 2.0 * T, x, p))
    return _finish(p_t - 4.0 * math.pi * T * p_2t**2)


def _integer_exponent(e: float) -> Optional[int]:
    r = round(e)
    return int(r) if abs(e - r) < _INTEGER_TOL else None


def check_power_domain(T: float, dT: float) -> None:
    """Raise :class:`PowerDomainViolation` unless S(T, dT) has a real value everywhere."""
    T = _check_level(T)
    if not dT >= 0.0:
        raise PowerDomainViolation(f"dT must be >= 0, got {dT!r}")
    if _integer_exponent((T + dT) / T) is None and T + dT < 2.0:
        raise PowerDomainViolation(
            f"exponent (T+dT)/T = {(T + dT) / T:.6g} is non-integer and T+dT = {T + dT:.6g} < 2")


def eval_bigs(state: Distribution, T: float, dT: float, x, p, strict: bool = True):
    """S(T, dT) at (x, p).

    ``strict=False`` waives the T + dT >= 2 rule for non-integer exponents;
    evaluation then fails with :class:`NegativeBase` wherever the smeared
    distribution is actually negative.
    """
    if strict:
        check_power_domain(T, dT)
    elif not (T >= 1.0 and dT >= 0.0):
        raise PowerDomainViolation(f"need T >= 1 and dT >= 0, got T={T!r}, dT={dT!r}")
    T, dT = float(T), float(dT)
    expo = (T + dT) / T
    base = (T + dT) * np.asarray(eval_p(state, T + dT, x, p))
    n = _integer_exponent(expo)
    if n is not None:
        powered = base ** float(n)
    else:
        if np.any(base < -VANISH_TOL):
            raise NegativeBase(f"base {float(np.min(base))!r} < 0 under exponent {expo!r}")
        powered = np.maximum(base, 0.0) ** expo
    p_t = np.asarray(eval_p(state, T, x, p))
    return _finish(p_t - math.pi ** (dT / T) / T * powered)


def eval_xik(state: Distribution, T: float, k: float, x, p):
    T = _check_level(T)
    if not 0.0 < k < 1.0:
        raise KOutOfRange(f"k must lie in (0, 1), got {k!r}")
    p_t = np.asarray(eval_p(state, T, x, p))
    p_a = np.asarray(eval_p(state, T / k, x, p))
    p_b = np.asarray(eval_p(state, T / (1.0 - k), x, p))
    return _finish(p_t - math.pi * T / (k * (1.0 - k)) * p_a * p_b)


@dataclass(frozen=True, eq=False)
class FunctionalSpec:
    """A functional bound to a state and its parameters; callable on (x, p)."""

    kind: Kind
    state: Distribution
    T: float = 1.0
    dT: Optional[float] = None
    k: Optional[float] = None
    strict: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        _check_level(self.T)
        if self.kind is Kind.BIGS:
            if self.dT is None:
                raise ValueError("BIGS needs dT")
            if self.strict:
                check_power_domain(self.T, self.dT)
        elif self.kind is Kind.XIK:
            if self.k is None or not 0.0 < self.k < 1.0:
                raise KOutOfRange(f"k must lie in (0, 1), got {self.k!r}")

    def __call__(self, x, p):
        if self.kind is Kind.XI:
            return eval_xi(self.state, self.T, x, p)
        if self.kind is Kind.BIGS:
            return eval_bigs(self.state, self.T, self.dT, x, p, self.strict)
        return eval_xik(self.state, self.T, self.k, x, p)

    def with_state(self, state: Distribution) -> FunctionalSpec:
        return FunctionalSpec(self.kind, state, self.T, self.dT, self.k, self.strict)

    def with_dT(self, dT: float) -> FunctionalSpec:
        return FunctionalSpec(self.kind, self.state, self.T, dT, self.k, self.strict)

    def describe(self) -> dict:
        out = {"functional": self.kind.value, "T": self.T}
        if self.kind is Kind.BIGS:
            out["dT"] = self.dT
        if self.kind is Kind.XIK:
            out["k"] = self.k
        return out
