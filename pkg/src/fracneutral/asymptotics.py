"""Asymptotic-periodicity diagnostics on uniformly sampled functions.

All quantities are built from the deviation d(t) = ||f(t + omega) - f(t)||,
where the norm is |.| for scalars and the max-coefficient norm for vectors.
Limits at infinity are replaced by curves over four checkpoints plus a
decrease test.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.ndimage import maximum_filter1d

THRESHOLD_ENV = "FRACNEUTRAL_THRESHOLD"
_GRID_RTOL = 1e-9


@dataclass(frozen=True)
class SampledFunction:
    """Values of a function at t0, t0 + h, ..., one row per node."""

    values: np.ndarray
    h: float
    t0: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim not in (1, 2) or v.shape[0] < 2:
            raise ValueError("need at least two samples of a scalar or vector function")
        if not np.all(np.isfinite(v)):
            raise ValueError("sampled values must be finite")
        if not self.h > 0:
            raise ValueError("step must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, fn, T: float, h: float, t0: float = 0.0) -> "SampledFunction":
        n = _steps(T - t0, h, "horizon")
        t = t0 + h * np.arange(n + 1)
        return cls(np.asarray(fn(t), dtype=float), h, t0)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(len(self.values))

    @property
    def horizon(self) -> float:
        return self.t0 + self.h * (len(self.values) - 1)

    def norms(self) -> np.ndarray:
        v = self.values
        return np.abs(v) if v.ndim == 1 else np.max(np.abs(v), axis=1)

    def index(self, t: float) -> int:
        return _steps(t - self.t0, self.h, f"time {t}")

    def shifted(self, s: float) -> "SampledFunction":
        """The translate t -> f(t + s), re-based at t0."""
        k = _steps(s, self.h, "shift")
        return SampledFunction(self.values[k:], self.h, self.t0)

    def from_zero(self) -> "SampledFunction":
        return self if self.t0 == 0 else SampledFunction(self.values[self.index(0.0):], self.h, 0.0)


def _steps(length: float, h: float, what: str) -> int:
    k = length / h
    n = round(k)
    if abs(k - n) > _GRID_RTOL * max(1.0, abs(k)) or n < 0:
        raise ValueError(f"{what} = {length} is not a non-negative multiple of the step {h}")
    return int(n)


def _deviation(f: SampledFunction, omega: float) -> np.ndarray:
    """d(t_i) = ||f(t_i + omega) - f(t_i)|| for nodes t_i >= 0 with t_i + omega in range."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    f = f.from_zero()
    k = _steps(omega, f.h, "omega")
    if k >= len(f.values):
        raise ValueError("horizon is shorter than omega")
    diff = f.values[k:] - f.values[:-k]
    return np.abs(diff) if diff.ndim == 1 else np.max(np.abs(diff), axis=1)


def _window_sup(d: np.ndarray, m: int) -> np.ndarray:
    """W[i] = max(d[i-m..i]) for i >= m, indexed so that W[j] belongs to node m + j."""
    full = maximum_filter1d(d, size=m + 1, origin=m // 2, mode="nearest")
    return full[m:]


def sap_tail(f: SampledFunction, omega: float) -> float:
    """Sup of the deviation over the last 10% of [0, T - omega]."""
    d = _deviation(f, omega)
    f = f.from_zero()
    span = f.horizon - omega
    if span < 0.1 * f.horizon:
        raise ValueError("horizon too short for a tail estimate")
    start = math.floor(0.9 * (len(d) - 1) + 1e-9)
    return float(np.max(d[start:]))


def psap_mean(f: SampledFunction, omega: float, T: float, start: float = 0.0) -> float:
    """(1/T) times the integral of the deviation over [start, T] (trapezoid).

    ``start`` defaults to 0; a positive start matches the class-r normalization.
    """
    d = _deviation(f, omega)
    n = _steps(T, f.h, "T")
    i0 = _steps(start, f.h, "start")
    if n >= len(d):
        raise ValueError("T + omega exceeds the sampled horizon")
    if not 0 <= i0 <= n or T <= 0:
        raise ValueError("need 0 <= start <= T and T > 0")
    return float(trapezoid(d[i0:n + 1], dx=f.h) / T)


def _window_curve(f: SampledFunction, omega: float, r: float, T: float):
    d = _deviation(f, omega)
    m = _steps(r, f.h, "r")
    n = _steps(T, f.h, "T")
    if m == 0:
        raise ValueError("r must be positive")
    if n < m:
        raise ValueError("T must be at least r")
    if n >= len(d):
        raise ValueError("T + omega exceeds the sampled horizon")
    return _window_sup(d[:n + 1], m), m


def class_r_mean(f: SampledFunction, omega: float, r: float, T: float, start: float | None = None) -> float:
    """(1/T) times the integral over [start, T] of sup_{[s-r, s]} of the deviation.

    ``start`` defaults to r. Passing a common start lets means for different
    window lengths be compared on the same integration range.
    """
    W, m = _window_curve(f, omega, r, T)
    i0 = m if start is None else _steps(start, f.h, "start")
    if i0 < m:
        raise ValueError("start must be at least r")
    return float(trapezoid(W[i0 - m:], dx=f.h) / T)


def ergodic_set_measure(f: SampledFunction, omega: float, r: float, eps: float, T: float) -> float:
    """Fraction of [r, T] (per grid cell, left endpoint) where the window sup is >= eps."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    W, _ = _window_curve(f, omega, r, T)
    return float(np.count_nonzero(W[:-1] >= eps) * f.h / T)


def stepanov_norm(f: SampledFunction, p: float) -> float:
    """sup over window starts t of (integral over [t, t+1] of ||f||^p)^(1/p)."""
    if not p >= 1:
        raise ValueError("Stepanov exponent must be >= 1")
    if f.horizon - f.t0 < 1.0 - 1e-12:
        raise ValueError("Stepanov norm needs a horizon of at least 1")
    w = _steps(1.0, f.h, "unit window")
    g = f.norms() ** p
    cum = np.concatenate(([0.0], np.cumsum(0.5 * f.h * (g[1:] + g[:-1]))))
    windows = cum[w:] - cum[:-w]
    return float(np.max(np.maximum(windows, 0.0)) ** (1.0 / p))


@dataclass(frozen=True)
class Thresholds:
    """Absolute thresholds per space plus the relative decay ratio."""

    sap: float = 1e-3
    psap: float = 1e-3
    class_r: float = 1e-3
    decay_ratio: float = 0.5

    @classmethod
    def from_env(cls, **overrides) -> "Thresholds":
        raw = os.environ.get(THRESHOLD_ENV)
        base = {}
        if raw:
            try:
                value = float(raw)
            except ValueError:
                raise ValueError(f"{THRESHOLD_ENV} must be a number, got {raw!r}") from None
            base = dict(sap=value, psap=value, class_r=value)
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)


def decreasing_to_zero(curve, threshold: float, ratio: float = 0.5) -> bool:
    """Finite-horizon stand-in for a limit of zero.

    True when the last value is below ``threshold``, or when the curve never
    increases and its last value is at most ``ratio`` times the first.
    """
    vals = [v for _, v in curve]
    if vals[-1] <= threshold:
        return True
    monotone = all(b <= a for a, b in zip(vals, vals[1:]))
    return monotone and vals[-1] <= ratio * vals[0]


@dataclass
class PeriodicityReport:
    omega: float
    sap_tail: float
    psap_mean_curve: list
    class_r_mean_curve: list
    ergodic_measure_curve: list
    verdicts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        pairs = lambda c: [[float(t), float(v)] for t, v in c]
        return {
            "omega": float(self.omega),
            "sap_tail": float(self.sap_tail),
            "psap_mean_curve": pairs(self.psap_mean_curve),
            "class_r_mean_curve": pairs(self.class_r_mean_curve),
            "ergodic_measure_curve": pairs(self.ergodic_measure_curve),
            "verdicts": self.verdicts,
        }


def checkpoints(f: SampledFunction, omega: float) -> list:
    """Grid-snapped {T/4, T/2, 3T/4, T} with T the largest usable mean horizon."""
    f = f.from_zero()
    n = len(f.values) - 1 - _steps(omega, f.h, "omega")
    if n < 4:
        raise ValueError("horizon too short for checkpoint curves")
    return [f.h * round(q * n) for q in (0.25, 0.5, 0.75)] + [f.h * n]


def classify(f: SampledFunction, omega: float, r: float, eps: float, thresholds: Thresholds | None = None) -> PeriodicityReport:
    th = thresholds or Thresholds.from_env()
    cps = checkpoints(f, omega)
    if cps[0] < r:
        raise ValueError("first checkpoint falls inside the delay window; extend the horizon")
    tail = sap_tail(f, omega)
    psap = [(T, psap_mean(f, omega, T)) for T in cps]
    cls_r = [(T, class_r_mean(f, omega, r, T)) for T in cps]
    ergo = [(T, ergodic_set_measure(f, omega, r, eps, T)) for T in cps]

    sap_ok = tail <= th.sap
    class_r_ok = sap_ok or decreasing_to_zero(cls_r, th.class_r, th.decay_ratio)
    psap_ok = class_r_ok or decreasing_to_zero(psap, th.psap, th.decay_ratio)
    verdicts = {
        "sap": {"verdict": bool(sap_ok), "threshold": th.sap},
        "class_r": {"verdict": bool(class_r_ok), "threshold": th.class_r},
        "psap": {"verdict": bool(psap_ok), "threshold": th.psap},
        "decay_ratio": th.decay_ratio,
        "epsilon": float(eps),
        "r": float(r),
    }
    return PeriodicityReport(omega, tail, psap, cls_r, ergo, verdicts)
