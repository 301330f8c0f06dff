"""Neutral fractional delay systems and their mild solutions.

The mild solution is the fixed point of

    (Phi u)(t) = S(t)[phi(0) - g(0, phi)] + g(t, u_t) + int_0^t S(t - s) f(s, u_s) ds

on a uniform grid over [-r, T]. The convolution uses the composite
trapezoid rule on grid nodes; the kernel S is bounded with S(0) = I, so
no graded mesh is needed.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy.signal import fftconvolve

from .asymptotics import SampledFunction, _steps
from .operator import FractionalOrder, SectorialSpectrum, solution_multipliers

_DIRECT_CONV_MAX = 512


@dataclass(frozen=True)
class TimeGrid:
    """Uniform nodes on [-r, T] with -r, 0 and T all on the grid."""

    r: float
    T: float
    h: float

    def __post_init__(self):
        if not (self.h > 0 and self.r > 0):
            raise ValueError("need h > 0 and r > 0")
        if not self.T > self.r:
            raise ValueError(f"horizon T={self.T} must exceed the delay r={self.r}")
        _steps(self.r, self.h, "delay r")
        _steps(self.T, self.h, "horizon T")

    @property
    def n_hist(self) -> int:
        return round(self.r / self.h)

    @property
    def n_steps(self) -> int:
        return round(self.T / self.h)

    @property
    def size(self) -> int:
        return self.n_hist + self.n_steps + 1

    @property
    def times(self) -> np.ndarray:
        return self.h * np.arange(-self.n_hist, self.n_steps + 1)

    @property
    def forward_times(self) -> np.ndarray:
        return self.h * np.arange(self.n_steps + 1)

    @property
    def history_times(self) -> np.ndarray:
        return self.h * np.arange(-self.n_hist, 1)

    def index(self, t: float) -> int:
        k = t / self.h
        n = round(k)
        if abs(k - n) > 1e-9 * max(1.0, abs(k)):
            raise ValueError(f"time {t} is not a grid node")
        i = n + self.n_hist
        if not 0 <= i < self.size:
            raise ValueError(f"time {t} lies outside [-r, T]")
        return i


@dataclass(frozen=True)
class HistorySegment:
    """Samples of u on [t - r, t], oldest first."""

    samples: np.ndarray
    h: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim == 1:
            s = s[:, None]
        if s.ndim != 2 or len(s) < 2:
            raise ValueError("a history segment needs at least two samples")
        object.__setattr__(self, "samples", s)

    @property
    def r(self) -> float:
        return self.h * (len(self.samples) - 1)

    def at(self, theta: float) -> np.ndarray:
        """u(t + theta) for an on-grid theta in [-r, 0]."""
        k = _steps(-theta, self.h, "lag")
        if k >= len(self.samples):
            raise ValueError(f"lag {-theta} exceeds the delay")
        return self.samples[-1 - k]

    @property
    def current(self) -> np.ndarray:
        return self.samples[-1]

    def integrate(self, kernel) -> np.ndarray:
        """Trapezoid value of int_{-r}^0 k(theta) u(t + theta) dtheta."""
        w = _trapezoid_weights(len(self.samples), self.h) * np.asarray(kernel, dtype=float)
        return w @ self.samples

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.samples)))


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


class Trajectory:
    """Node values of a trajectory on a :class:`TimeGrid`, one row per node."""

    def __init__(self, grid: TimeGrid, values):
        v = np.array(values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != grid.size:
            raise ValueError(f"expected {grid.size} rows, got {v.shape[0]}")
        if not np.all(np.isfinite(v)):
            raise ValueError("trajectory values must be finite")
        v.setflags(write=False)
        self.grid = grid
        self.values = v

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def at(self, t: float) -> np.ndarray:
        return self.values[self.grid.index(t)]

    @property
    def forward(self) -> np.ndarray:
        return self.values[self.grid.n_hist:]

    def sampled(self) -> SampledFunction:
        """The trajectory on [0, T] for the periodicity diagnostics."""
        return SampledFunction(self.forward, self.grid.h)

    def sup_distance(self, other: "Trajectory") -> float:
        return float(np.max(np.abs(self.values - other.values)))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["time"] + [f"coord_{i + 1}" for i in range(self.dim)])
            for t, row in zip(self.grid.times, self.values):
                w.writerow([_fmt(t)] + [_fmt(x) for x in row])


def _fmt(x: float) -> str:
    return repr(float(x))


def read_trajectory_csv(path):
    """Return ``(times, values)`` from a CSV written by :meth:`Trajectory.to_csv`."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "time" or len(rows) < 3:
        raise ValueError(f"{path}: not a trajectory CSV")
    data = np.array([[float(x) for x in row] for row in rows[1:] if row], dtype=float)
    return data[:, 0], data[:, 1:]


def segment_at(u: Trajectory, t: float) -> HistorySegment:
    if t < 0:
        raise ValueError("segments are only defined for t >= 0")
    i = u.grid.index(t)
    return HistorySegment(u.values[i - u.grid.n_hist:i + 1], u.grid.h)


# ---------------------------------------------------------------- maps

class ZeroMap:
    """The map (t, psi) -> 0."""

    def __init__(self, dim: int):
        self.dim = dim

    def __call__(self, t, seg):
        return np.zeros(self.dim)

    def over_trajectory(self, grid, values):
        return np.zeros((grid.n_steps + 1, values.shape[1]))


class LinearDelayMap:
    """(t, psi) -> sum_i A_i psi(-lag_i) + b with constant matrices."""

    def __init__(self, terms=(), offset=None, dim=None):
        self.terms = [(np.atleast_2d(np.asarray(A, dtype=float)), float(lag)) for A, lag in terms]
        if dim is None:
            dim = self.terms[0][0].shape[0] if self.terms else len(np.atleast_1d(offset))
        self.dim = dim
        self.offset = np.zeros(dim) if offset is None else np.broadcast_to(np.asarray(offset, float), (dim,)).copy()
        for A, lag in self.terms:
            if A.shape != (dim, dim) or lag < 0:
                raise ValueError("each term needs an N x N matrix and a non-negative lag")

    def __call__(self, t, seg: HistorySegment):
        out = self.offset.copy()
        for A, lag in self.terms:
            out += A @ seg.at(-lag)
        return out

    def over_trajectory(self, grid, values):
        m, K = grid.n_hist, grid.n_steps
        out = np.tile(self.offset, (K + 1, 1))
        for A, lag in self.terms:
            k = _steps(lag, grid.h, "lag")
            out += values[m - k:m - k + K + 1] @ A.T
        return out

    def lipschitz(self) -> float:
        """Sum of induced max-row-sum norms."""
        return float(sum(np.max(np.sum(np.abs(A), axis=1)) for A, _ in self.terms))


class KernelDelayMap:
    """(t, psi) -> a(t) int_{-r}^0 k(theta) psi(theta) dtheta, applied mode by mode.

    ``coef`` is a vectorized function of time and ``kernel`` a callable on [-r, 0].
    """

    def __init__(self, coef: Callable, kernel: Callable):
        self.coef = coef
        self.kernel = kernel

    def _weights(self, n: int, h: float) -> np.ndarray:
        theta = h * np.arange(-(n - 1), 1)
        return _trapezoid_weights(n, h) * np.asarray(self.kernel(theta), dtype=float)

    def __call__(self, t, seg: HistorySegment):
        w = self._weights(len(seg.samples), seg.h)
        return float(self.coef(np.asarray(t))) * (w @ seg.samples)

    def over_trajectory(self, grid, values):
        m, K = grid.n_hist, grid.n_steps
        w = self._weights(m + 1, grid.h)
        windows = np.lib.stride_tricks.sliding_window_view(values, m + 1, axis=0)
        integral = np.einsum("knj,j->kn", windows[:K + 1], w)
        return np.asarray(self.coef(grid.forward_times), dtype=float)[:, None] * integral


def evaluate_map(fn, grid: TimeGrid, values: np.ndarray) -> np.ndarray:
    """fn(t_k, u_{t_k}) at every forward node, shape (n_steps + 1, N)."""
    batch = getattr(fn, "over_trajectory", None)
    if batch is not None:
        out = np.asarray(batch(grid, values), dtype=float)
    else:
        m, h = grid.n_hist, grid.h
        out = np.array([fn(k * h, HistorySegment(values[k:k + m + 1], h)) for k in range(grid.n_steps + 1)], dtype=float)
    if out.shape != (grid.n_steps + 1, values.shape[1]):
        raise ValueError(f"map returned shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError("map produced non-finite values")
    return out


# ---------------------------------------------------------------- system

@dataclass(frozen=True)
class NeutralSystem:
    """Problem data: order, spectrum, delay, maps f and g, and initial history.

    ``phi`` is either a callable theta -> state (vectorized over theta in
    [-r, 0], returning shape (len(theta), N)) or a fixed :class:`HistorySegment`.
    """

    alpha: FractionalOrder
    spectrum: SectorialSpectrum
    r: float
    f_map: Callable
    g_map: Callable
    phi: object
    lipschitz: object = None

    def history(self, grid: TimeGrid) -> np.ndarray:
        if abs(grid.r - self.r) > 1e-12 * self.r:
            raise ValueError(f"grid delay {grid.r} differs from system delay {self.r}")
        if isinstance(self.phi, HistorySegment):
            s = self.phi.samples
            if len(s) != grid.n_hist + 1 or abs(self.phi.h - grid.h) > 1e-12 * grid.h:
                raise ValueError("initial history does not match the grid")
        else:
            s = np.asarray(self.phi(grid.history_times), dtype=float)
            if s.ndim == 1:
                s = s[:, None]
        if s.shape != (grid.n_hist + 1, self.spectrum.size):
            raise ValueError(f"initial history has shape {s.shape}, expected {(grid.n_hist + 1, self.spectrum.size)}")
        if not np.all(np.isfinite(s)):
            raise ValueError("initial history must be finite")
        return s

    def constant_extension(self, grid: TimeGrid) -> Trajectory:
        hist = self.history(grid)
        return Trajectory(grid, np.vstack([hist, np.tile(hist[-1], (grid.n_steps, 1))]))


@lru_cache(maxsize=16)
def _kernel_table(alpha: float, eigenvalues: tuple, h: float, n_steps: int) -> np.ndarray:
    spec = SectorialSpectrum(eigenvalues)
    table = solution_multipliers(spec, alpha, h * np.arange(n_steps + 1))
    table.setflags(write=False)
    return table


def _propagator(sys_or_alpha, spectrum, grid_h, n_steps):
    a = sys_or_alpha.alpha if isinstance(sys_or_alpha, FractionalOrder) else float(sys_or_alpha)
    return _kernel_table(a, spectrum.eigenvalues, float(grid_h), int(n_steps))


def _causal_convolution(kernel: np.ndarray, F: np.ndarray) -> np.ndarray:
    n = len(F)
    if n <= _DIRECT_CONV_MAX:
        return np.stack([np.convolve(kernel[:, j], F[:, j])[:n] for j in range(F.shape[1])], axis=1)
    return fftconvolve(kernel, F, axes=0)[:n]


def trapezoid_convolution(kernel: np.ndarray, F: np.ndarray, h: float) -> np.ndarray:
    """Q_k = trapezoid value of int_0^{t_k} K(t_k - s) F(s) ds at every node."""
    full = _causal_convolution(kernel, F)
    Q = h * (full - 0.5 * kernel * F[0] - 0.5 * kernel[0] * F)
    Q[0] = 0.0
    return Q


def convolve_solution_operator(spectrum: SectorialSpectrum, alpha, h: float, samples) -> np.ndarray:
    """kappa(t_k) = int_0^{t_k} S(t_k - s) u(s) ds for u sampled at 0, h, 2h, ..."""
    u = np.asarray(samples, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.shape[1] != spectrum.size:
        raise ValueError("sample dimension does not match the spectrum")
    kernel = _propagator(alpha, spectrum, h, len(u) - 1)
    return trapezoid_convolution(kernel, u, h)


def phi_alpha_apply(sys: NeutralSystem, u: Trajectory) -> Trajectory:
    grid = u.grid
    hist = sys.history(grid)
    m = grid.n_hist
    if u.dim != sys.spectrum.size:
        raise ValueError("trajectory dimension does not match the spectrum")
    if np.max(np.abs(u.values[:m + 1] - hist)) > 1e-12 * max(1.0, np.max(np.abs(hist))):
        raise ValueError("trajectory does not agree with the initial history on [-r, 0]")
    vals = u.values
    G = evaluate_map(sys.g_map, grid, vals)
    F = evaluate_map(sys.f_map, grid, vals)
    kernel = _propagator(sys.alpha, sys.spectrum, grid.h, grid.n_steps)
    # u_0 = phi, so G[0] is g(0, phi)
    out = kernel * (hist[-1] - G[0]) + G + trapezoid_convolution(kernel, F, grid.h)
    out[0] = hist[-1]
    return Trajectory(grid, np.vstack([hist, out[1:]]) if m else out)


class ConvergenceError(RuntimeError):
    """Picard iteration failed; ``residuals`` holds the history."""

    def __init__(self, message, residuals, diverged=False):
        super().__init__(message)
        self.residuals = list(residuals)
        self.diverged = diverged


class PicardResult(NamedTuple):
    trajectory: Trajectory
    iterations: int
    residual: float
    residuals: list

    def ratios(self) -> np.ndarray:
        r = np.asarray(self.residuals)
        with np.errstate(divide="ignore", invalid="ignore"):
            return r[1:] / r[:-1]


def solve_picard(sys: NeutralSystem, grid: TimeGrid, tol: float = 1e-10, max_iter: int = 200, initial=None) -> PicardResult:
    """Iterate u <- Phi(u) until ||Phi(u) - u||_sup <= tol.

    Returns the iterate ``u_k`` whose residual met the tolerance, with
    ``iterations = k`` applications of Phi used to produce it. The default
    initial guess extends phi(0) as a constant over (0, T].
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if initial is None:
        u = sys.constant_extension(grid)
    elif isinstance(initial, Trajectory):
        u = initial
    else:
        u = Trajectory(grid, initial)
    residuals = []
    for k in range(max_iter + 1):
        v = phi_alpha_apply(sys, u)
        res = u.sup_distance(v)
        if not math.isfinite(res):
            raise ConvergenceError("residual is not finite", residuals, diverged=True)
        residuals.append(res)
        if res <= tol:
            return PicardResult(u, k, res, residuals)
        if res > 10.0 * min(residuals):
            raise ConvergenceError(f"Picard iteration diverging at step {k}: residual {res:.3e}", residuals, diverged=True)
        u = v
    raise ConvergenceError(f"no convergence in {max_iter} iterations: residual {residuals[-1]:.3e}", residuals)


def sine_synthesis(coefficients, theta) -> np.ndarray:
    """v(t, theta) = sum_n c_n(t) sin(n theta) for each row of coefficients."""
    c = np.atleast_2d(np.asarray(coefficients, dtype=float))
    th = np.asarray(theta, dtype=float)
    n = np.arange(1, c.shape[1] + 1)
    return c @ np.sin(np.outer(n, th))
