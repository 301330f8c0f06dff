"""Diagonal sectorial operators and their fractional solution operators.

The state space is represented by coefficients in an eigenbasis, so the
solution operator acts mode by mode as S(t) = diag(E_{alpha,1}(lambda_n t^alpha)).
Operator norms are taken in the sup-coefficient sense.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mlf import MlfParams, mlf_eval_batch


@dataclass(frozen=True)
class FractionalOrder:
    """Order alpha of the equation, restricted to the open interval (1, 2)."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (math.isfinite(a) and 1.0 < a < 2.0):
            raise ValueError(f"fractional order must lie in (1, 2), got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    @property
    def decay_factor(self) -> float:
        """pi / (alpha sin(pi/alpha)) = integral of 1/(1+s^alpha) over [0, inf)."""
        a = self.alpha
        return math.pi / (a * math.sin(math.pi / a))

    @property
    def sector_angle_bound(self) -> float:
        return math.pi * (1.0 - self.alpha / 2.0)

    @property
    def mlf(self) -> MlfParams:
        return MlfParams(self.alpha, 1.0)


def _as_alpha(alpha) -> float:
    return alpha.alpha if isinstance(alpha, FractionalOrder) else float(alpha)


@dataclass(frozen=True)
class SectorialSpectrum:
    """Strictly negative eigenvalues of a diagonal operator.

    ``mu`` is the largest eigenvalue. ``C`` and ``M`` are the constants of the
    decay bound ||S(t)|| <= C M / (1 + |mu| t^alpha); they default to 1 and are
    usually replaced by :func:`fit_decay_constant`.
    """

    eigenvalues: tuple
    C: float = 1.0
    M: float = 1.0
    mu: float = field(init=False)

    def __post_init__(self):
        ev = tuple(float(v) for v in np.ravel(self.eigenvalues))
        if not ev:
            raise ValueError("spectrum needs at least one eigenvalue")
        if not all(math.isfinite(v) and v < 0.0 for v in ev):
            raise ValueError("eigenvalues must be finite and strictly negative")
        if not (self.C > 0.0 and self.M > 0.0):
            raise ValueError("C and M must be positive")
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "mu", max(ev))

    @classmethod
    def dirichlet_heat(cls, modes: int, damping: float, **kw) -> "SectorialSpectrum":
        """Eigenvalues -(n^2 + c), n = 1..N, of d^2/dx^2 - c on (0, pi) with Dirichlet ends."""
        if modes < 1:
            raise ValueError("mode count must be at least 1")
        if not damping > 0.0:
            raise ValueError("damping c must be positive")
        n = np.arange(1, modes + 1, dtype=float)
        return cls(tuple(-(n * n + damping)), **kw)

    @property
    def size(self) -> int:
        return len(self.eigenvalues)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.eigenvalues)

    def with_constants(self, C: float, M: float = 1.0) -> "SectorialSpectrum":
        return SectorialSpectrum(self.eigenvalues, C=C, M=M)


def solution_multipliers(spec: SectorialSpectrum, alpha, t) -> np.ndarray:
    """E_{alpha,1}(lambda_n t^alpha) for every mode, shape ``t.shape + (N,)``."""
    a = _as_alpha(alpha)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0) or not np.all(np.isfinite(t)):
        raise ValueError("time must be finite and non-negative")
    z = t[..., None] ** a * spec.array
    return mlf_eval_batch(MlfParams(a, 1.0), z)


def apply_solution_operator(spec: SectorialSpectrum, alpha, t: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.size,):
        raise ValueError(f"state has shape {x.shape}, spectrum has {spec.size} modes")
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    if t == 0:
        return x.copy()
    return solution_multipliers(spec, alpha, t) * x


def operator_norm(spec: SectorialSpectrum, alpha, t: float) -> float:
    """max_n |E_{alpha,1}(lambda_n t^alpha)|."""
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    return float(np.max(np.abs(solution_multipliers(spec, alpha, t))))


def fit_decay_constant(spec: SectorialSpectrum, alpha, t_grid) -> float:
    """Smallest C (with M = 1) such that ||S(t)|| (1 + |mu| t^alpha) <= C on the grid."""
    t = np.asarray(t_grid, dtype=float).ravel()
    if t.size == 0:
        raise ValueError("time grid is empty")
    a = _as_alpha(alpha)
    norms = np.max(np.abs(solution_multipliers(spec, a, t)), axis=-1)
    return float(np.max(norms * (1.0 + abs(spec.mu) * t ** a)))


def decay_integral(C: float, M: float, mu: float, alpha) -> float:
    """Closed form of the integral of C M / (1 + |mu| s^alpha) over [0, inf)."""
    a = _as_alpha(alpha)
    if not 1.0 < a < 2.0:
        raise ValueError(f"decay integral needs alpha in (1, 2), got {a}")
    if not (C > 0 and M > 0 and mu < 0):
        raise ValueError("need C > 0, M > 0 and mu < 0")
    return C * M * abs(mu) ** (-1.0 / a) * math.pi / (a * math.sin(math.pi / a))
