"""Detection experiments: global minimization, dT scans, weight thresholds."""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import BracketInvalid, MonotonicityViolation, QCertError, WeightOutOfRange
from .functionals import FunctionalSpec, Kind
from .gausspoly import Distribution, PhasePoint, build_fock_wigner, mix

DETECTION_TOL = 1e-10
DEFAULT_GRID = 241
DEFAULT_SEEDS = 8
BORDER_S = math.pi / 20


def worker_count(workers: Optional[int] = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("QCERT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Region:
    x_min: float
    x_max: float
    p_min: float
    p_max: float
    nx: int = DEFAULT_GRID
    np_: int = DEFAULT_GRID

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.p_min < self.p_max):
            raise ValueError(f"empty region {self}")
        if self.nx < 3 or self.np_ < 3:
            raise ValueError("grids need at least 3 points per axis")

    @classmethod
    def default(cls, border: bool = False, n: int = DEFAULT_GRID) -> Region:
        # border family: vacua at x = -0.05 and 1.85 plus a 4-sigma margin
        if border:
            return cls(-4.0, 6.0, -4.0, 4.0, n, n)
        return cls(-4.0, 4.0, -4.0, 4.0, n, n)

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.linspace(self.x_min, self.x_max, self.nx),
                np.linspace(self.p_min, self.p_max, self.np_))

    def refined(self, factor: int = 2) -> Region:
        return Region(self.x_min, self.x_max, self.p_min, self.p_max,
                      factor * (self.nx - 1) + 1, factor * (self.np_ - 1) + 1)

    def clip(self, x: float, p: float) -> tuple[float, float]:
        return (min(max(x, self.x_min), self.x_max), min(max(p, self.p_min), self.p_max))

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "nx": self.nx,
                "p_min": self.p_min, "p_max": self.p_max, "np": self.np_}


@dataclass(frozen=True)
class MinResult:
    value: float
    argmin: PhasePoint
    evals: int
    converged: bool

    def to_dict(self) -> dict:
        return {"value": self.value, "argmin": {"x": self.argmin.x, "p": self.argmin.p},
                "evals": self.evals, "converged": self.converged}


class Verdict(str, enum.Enum):
    NEGATIVE_FOUND = "NEGATIVE_FOUND"
    NOT_FOUND_AT_RESOLUTION = "NOT_FOUND_AT_RESOLUTION"


@dataclass(frozen=True)
class Certificate:
    """Outcome of a negativity search.

    ``NOT_FOUND_AT_RESOLUTION`` is inconclusive: it says nothing about
    classicality, only that no negative value was found on this grid.
    """

    verdict: Verdict
    witness: Optional[PhasePoint]
    witness_value: Optional[float]
    resolution: Region

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "witness": None if self.witness is None else {"x": self.witness.x, "p": self.witness.p},
            "witness_value": self.witness_value,
            "resolution": self.resolution.to_dict(),
        }


def sample_grid(spec: Callable, region: Region, workers: Optional[int] = None):
    """Values on the region grid, shape ``(nx, np)``; row ``i`` is ``x = xs[i]``."""
    xs, ps = region.axes()
    n = worker_count(workers)
    if n == 1 or region.nx < 2 * n:
        X, P = np.meshgrid(xs, ps, indexing="ij")
        return xs, ps, np.asarray(spec(X, P), dtype=float)
    chunks = np.array_split(np.arange(region.nx), n)

    def rows(idx):
        X, P = np.meshgrid(xs[idx], ps, indexing="ij")
        return np.asarray(spec(X, P), dtype=float)

    with ThreadPoolExecutor(n) as pool:
        parts = list(pool.map(rows, chunks))
    return xs, ps, np.concatenate(parts, axis=0)


def minimize_functional(spec: Callable, region: Region, seeds: int = DEFAULT_SEEDS,
                        xatol: float = 1e-7, fatol: float = 1e-14,
                        workers: Optional[int] = None) -> MinResult:
    """Coarse grid scan followed by Nelder-Mead refinement from the best cells.

    ``spec`` is any callable ``(x, p) -> values``, normally a
    :class:`FunctionalSpec`.  Refinement is clipped to the region, and the
    reported value never exceeds the best grid sample.
    """
    xs, ps, V = sample_grid(spec, region, workers)
    X, P = np.meshgrid(xs, ps, indexing="ij")
    flat_v, flat_x, flat_p = V.ravel(), X.ravel(), P.ravel()
    # ties broken lexicographically on (x, p)
    order = np.lexsort((flat_p, flat_x, flat_v))
    best_i = order[0]
    best = (float(flat_v[best_i]), PhasePoint(float(flat_x[best_i]), float(flat_p[best_i])))
    evals = V.size
    hx = (region.x_max - region.x_min) / (region.nx - 1)
    hp = (region.p_max - region.p_min) / (region.np_ - 1)

    def objective(z):
        x, p = region.clip(float(z[0]), float(z[1]))
        return spec(x, p)

    converged = True
    for i in order[:seeds]:
        x0 = np.array([flat_x[i], flat_p[i]])
        simplex = np.array([x0, x0 + [hx, 0.0], x0 + [0.0, hp]])
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"xatol": xatol, "fatol": fatol, "initial_simplex": simplex,
                                "maxiter": 4000, "maxfev": 8000})
        evals += res.nfev
        converged = converged and bool(res.success)
        if res.fun < best[0]:
            x, p = region.clip(float(res.x[0]), float(res.x[1]))
            best = (float(spec(x, p)), PhasePoint(x, p))
    return MinResult(best[0], best[1], evals, converged)


def certify_negativity(spec: Callable, region: Region, tol: float = DETECTION_TOL,
                       **kwargs) -> Certificate:
    if not tol > 0:
        raise ValueError("tol must be positive")
    res = minimize_functional(spec, region, **kwargs)
    if res.value < -tol:
        value = float(spec(res.argmin.x, res.argmin.p))
        return Certificate(Verdict.NEGATIVE_FOUND, res.argmin, value, region)
    return Certificate(Verdict.NOT_FOUND_AT_RESOLUTION, None, None, region)


def build_border_family(w1: float, s: float = BORDER_S) -> Distribution:
    """Weak single-photon admixture on two incoherently overlapping vacua.

    ``w1 W1(x + 1/20, p) + (1 - w1) [cos^2 s W0(x + 1/20, p) + sin^2 s W0(x - 37/20, p)]``
    """
    if not 0.0 <= w1 <= 1.0:
        raise WeightOutOfRange(f"w1 must lie in [0, 1], got {w1!r}")
    c2 = math.cos(s) ** 2
    weights = (w1, (1.0 - w1) * c2, (1.0 - w1) * (1.0 - c2))
    return mix([
        (build_fock_wigner(1, -0.05, 0.0), weights[0]),
        (build_fock_wigner(0, -0.05, 0.0), weights[1]),
        (build_fock_wigner(0, 1.85, 0.0), weights[2]),
    ])


def border_weights(w1: float, s: float = BORDER_S) -> tuple[float, float, float]:
    c2 = math.cos(s) ** 2
    return w1, (1.0 - w1) * c2, (1.0 - w1) * math.sin(s) ** 2


@dataclass(frozen=True)
class ScanEntry:
    dT: float
    result: Optional[MinResult]
    error: Optional[str] = None

    @property
    def valid(self) -> bool:
        return self.result is not None


def default_dTs(lo: float = 1.0, hi: float = 3.0, n: int = 9) -> list[float]:
    return [float(v) for v in np.linspace(lo, hi, n)]


def scan_delta_t(state: Distribution, T: float, dTs: Sequence[float], region: Region,
                 workers: Optional[int] = None, strict: bool = True, **kwargs) -> list[ScanEntry]:
    """Global minimum of S(T, dT) for each dT; invalid entries are kept and marked."""

    def one(dT):
        try:
            spec = FunctionalSpec(Kind.BIGS, state, T, dT, strict=strict)
            return ScanEntry(float(dT), minimize_functional(spec, region, workers=1, **kwargs))
        except QCertError as exc:
            return ScanEntry(float(dT), None, f"{type(exc).__name__}: {exc}")

    ordered = sorted(float(d) for d in dTs)
    # warm the smear cache before threads share it
    state.at_level(T)
    n = worker_count(workers)
    if n == 1:
        return [one(d) for d in ordered]
    with ThreadPoolExecutor(n) as pool:
        return list(pool.map(one, ordered))


def best_scan_entry(entries: Sequence[ScanEntry]) -> Optional[ScanEntry]:
    valid = [e for e in entries if e.valid]
    if not valid:
        return None
    return min(valid, key=lambda e: (e.result.value, e.dT))


# -------------------------------------------------------------- thresholds

@dataclass(frozen=True)
class TraceStep:
    w: float
    detected: bool
    min_value: float


@dataclass(frozen=True)
class ThresholdResult:
    w_star: float
    w_lo: float
    w_hi: float
    trace: list[TraceStep] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"w_star": self.w_star, "bracket": [self.w_lo, self.w_hi],
                "trace": [{"w": t.w, "detected": t.detected, "min": t.min_value}
                          for t in self.trace]}


def border_detector(kind: Kind | str = Kind.XI, T: float = 1.0, dT: Optional[float] = None,
                    dTs: Optional[Sequence[float]] = None, k: Optional[float] = None,
                    s: float = BORDER_S, region: Optional[Region] = None,
                    tol: float = DETECTION_TOL, workers: Optional[int] = None,
                    ) -> Callable[[float], tuple[bool, float]]:
    """Return ``detect(w1) -> (detected, global minimum)`` on the border family.

    For ``kind="bigs"`` with ``dTs`` the minimum is taken over the whole scan.
    """
    kind = Kind(kind)
    region = region or Region.default(border=True)

    def detect(w1: float) -> tuple[bool, float]:
        state = build_border_family(w1, s)
        if kind is Kind.BIGS and dTs is not None:
            best = best_scan_entry(scan_delta_t(state, T, dTs, region, workers))
            if best is None:
                raise QCertError("no valid dT in scan")
            value = best.result.value
        else:
            spec = FunctionalSpec(kind, state, T, dT, k)
            value = minimize_functional(spec, region, workers=workers).value
        return value < -tol, value

    return detect


def _check_monotone(trace: Sequence[TraceStep]) -> None:
    hits = [t.w for t in trace if t.detected]
    misses = [t.w for t in trace if not t.detected]
    if hits and misses and min(hits) <= max(misses):
        raise MonotonicityViolation(
            f"detected at w={min(hits):.6g} but not at larger w={max(misses):.6g}")


def weight_threshold(detect: Callable[[float], tuple[bool, float]], w_lo: float, w_hi: float,
                     tol_w: float = 1e-4) -> ThresholdResult:
    """Bisect for the smallest detected weight; detection must rise with w."""
    if not (w_lo < w_hi and tol_w > 0):
        raise BracketInvalid(f"need w_lo < w_hi and tol_w > 0, got {w_lo}, {w_hi}, {tol_w}")
    trace = []
    for w in (w_lo, w_hi):
        hit, value = detect(w)
        trace.append(TraceStep(w, hit, value))
    if trace[0].detected == trace[1].detected:
        state = "detected" if trace[0].detected else "not detected"
        raise BracketInvalid(f"both ends {state} on [{w_lo}, {w_hi}]")
    _check_monotone(trace)
    lo, hi = w_lo, w_hi
    while hi - lo > tol_w:
        mid = 0.5 * (lo + hi)
        hit, value = detect(mid)
        trace.append(TraceStep(mid, hit, value))
        _check_monotone(trace)
        if hit:
            hi = mid
        else:
            lo = mid
    return ThresholdResult(0.5 * (lo + hi), lo, hi, trace)
