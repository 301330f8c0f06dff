"""Scenario files: a YAML tree describing one neutral system and how to analyse it.

Example::

    alpha: 1.5
    spectrum: {modes: 8, damping: 1.0}
    delay: 1.0
    horizon: 40.0
    step: 0.01
    omega: 2.0
    epsilon: 0.01
    tolerance: 1.0e-10
    max_iter: 200
    forcing:
      form: kernel_delay
      h: {form: sine, mean: 0.1, amplitude: 0.05, period: 2.0}
      j: {form: sine, mean: 0.05, amplitude: 0.025, period: 2.0}
      k: {form: exponential, scale: 1.0, rate: 1.0}
      m: {form: constant, value: 1.0}
    history: {form: inverse_square, amplitude: 1.0}

Forcing forms are ``zero``, ``linear`` and ``kernel_delay``. Time functions
and kernels are given either as named closed forms or as inline ``samples``.
"""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .conditions import LipschitzData, kernel_lipschitz
from .dynamics import KernelDelayMap, LinearDelayMap, NeutralSystem, TimeGrid, ZeroMap
from .operator import FractionalOrder, SectorialSpectrum

_TOP_KEYS = ("alpha", "spectrum", "delay", "horizon", "step", "omega", "epsilon",
             "tolerance", "max_iter", "decay_constant", "forcing", "history", "thresholds", "theta")


class ConfigError(ValueError):
    pass


def _num(d, key, default=None, positive=False):
    if key not in d:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        v = float(d[key])
    except (TypeError, ValueError):
        raise ConfigError(f"{key!r} must be a number, got {d[key]!r}") from None
    if not math.isfinite(v) or (positive and v <= 0):
        raise ConfigError(f"{key!r} must be {'positive and ' if positive else ''}finite, got {v}")
    return v


def _vec(value, n, what):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,) or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{what} must be a number or a list of {n} numbers")
    return arr


# ------------------------------------------------------------ function specs

def _check_keys(spec, allowed, what):
    extra = set(spec) - set(allowed) - {"form"}
    if extra:
        raise ConfigError(f"{what}: unknown keys {sorted(extra)}")


def time_function(spec, what="time function"):
    """Return ``(fn, sup)`` for a time-function spec; ``fn`` is vectorized."""
    if not isinstance(spec, dict) or "form" not in spec:
        raise ConfigError(f"{what} must be a mapping with a 'form' key")
    form = spec["form"]
    if form == "constant":
        _check_keys(spec, ("value",), what)
        c = _num(spec, "value")
        return (lambda t: np.full(np.shape(t), c)), abs(c)
    if form == "sine":
        _check_keys(spec, ("mean", "amplitude", "period", "phase"), what)
        mean, amp = _num(spec, "mean", 0.0), _num(spec, "amplitude")
        period, phase = _num(spec, "period", positive=True), _num(spec, "phase", 0.0)
        fn = lambda t: mean + amp * np.sin(2 * np.pi * np.asarray(t) / period + phase)
        return fn, abs(mean) + abs(amp)
    if form == "samples":
        _check_keys(spec, ("step", "values"), what)
        step = _num(spec, "step", positive=True)
        vals = np.asarray(spec.get("values", []), dtype=float)
        if vals.ndim != 1 or vals.size < 2 or not np.all(np.isfinite(vals)):
            raise ConfigError(f"{what}: 'values' needs at least two finite numbers")
        grid = step * np.arange(vals.size)
        # linear interpolation, held constant past the last sample
        return (lambda t: np.interp(t, grid, vals)), float(np.max(np.abs(vals)))
    raise ConfigError(f"{what}: unknown form {form!r}")


def kernel_function(spec, r, what="kernel"):
    """Vectorized kernel on [-r, 0]."""
    if not isinstance(spec, dict) or "form" not in spec:
        raise ConfigError(f"{what} must be a mapping with a 'form' key")
    form = spec["form"]
    if form == "constant":
        _check_keys(spec, ("value",), what)
        c = _num(spec, "value")
        return lambda s: np.full(np.shape(s), c)
    if form == "exponential":
        _check_keys(spec, ("scale", "rate"), what)
        scale, rate = _num(spec, "scale", 1.0), _num(spec, "rate", 1.0)
        return lambda s: scale * np.exp(rate * np.asarray(s))
    if form == "samples":
        _check_keys(spec, ("values",), what)
        vals = np.asarray(spec.get("values", []), dtype=float)
        if vals.ndim != 1 or vals.size < 2 or not np.all(np.isfinite(vals)):
            raise ConfigError(f"{what}: 'values' needs at least two finite numbers")
        nodes = np.linspace(-r, 0.0, vals.size)
        return lambda s: np.interp(s, nodes, vals)
    raise ConfigError(f"{what}: unknown form {form!r}")


def _linear_map(spec, n, what):
    if spec is None:
        return LinearDelayMap(dim=n, offset=np.zeros(n))
    _check_keys(spec, ("terms", "offset"), what)
    terms = []
    for i, term in enumerate(spec.get("terms", [])):
        label = f"{what} term {i}"
        _check_keys(term, ("lag", "matrix", "diag", "scalar"), label)
        given = [k for k in ("matrix", "diag", "scalar") if k in term]
        if len(given) != 1:
            raise ConfigError(f"{label}: give exactly one of matrix, diag, scalar")
        if "matrix" in term:
            A = np.asarray(term["matrix"], dtype=float)
            if A.shape != (n, n):
                raise ConfigError(f"{label}: matrix must be {n} x {n}")
        elif "diag" in term:
            A = np.diag(_vec(term["diag"], n, label))
        else:
            A = _num(term, "scalar") * np.eye(n)
        terms.append((A, _num(term, "lag", 0.0)))
    offset = _vec(spec.get("offset", 0.0), n, f"{what} offset")
    return LinearDelayMap(terms, offset, dim=n)


def history_function(spec, n):
    if not isinstance(spec, dict) or "form" not in spec:
        raise ConfigError("history must be a mapping with a 'form' key")
    form = spec["form"]
    if form == "constant":
        _check_keys(spec, ("value",), "history")
        x0 = _vec(spec.get("value", 0.0), n, "history value")
        return lambda th: np.tile(x0, (len(th), 1))
    if form == "ramp":
        _check_keys(spec, ("value", "slope"), "history")
        x0 = _vec(spec.get("value", 0.0), n, "history value")
        slope = _vec(spec.get("slope", 0.0), n, "history slope")
        return lambda th: x0 + np.outer(th, slope)
    if form == "inverse_square":
        _check_keys(spec, ("amplitude",), "history")
        x0 = _num(spec, "amplitude", 1.0) / np.arange(1, n + 1) ** 2
        return lambda th: np.tile(x0, (len(th), 1))
    raise ConfigError(f"history: unknown form {form!r}")


# ------------------------------------------------------------ config

@dataclass
class ScenarioConfig:
    alpha: float
    modes: int
    damping: float
    delay: float
    horizon: float
    step: float
    omega: float
    epsilon: float = 0.01
    tolerance: float = 1e-10
    max_iter: int = 200
    decay_constant: float | None = None
    forcing: dict = field(default_factory=lambda: {"form": "zero"})
    history: dict = field(default_factory=lambda: {"form": "constant", "value": 1.0})
    thresholds: dict = field(default_factory=dict)
    theta: list = field(default_factory=list)

    @classmethod
    def from_dict(cls, d) -> "ScenarioConfig":
        if not isinstance(d, dict):
            raise ConfigError("scenario must be a mapping")
        extra = set(d) - set(_TOP_KEYS)
        if extra:
            raise ConfigError(f"unknown keys {sorted(extra)}")
        spec = d.get("spectrum")
        if not isinstance(spec, dict):
            raise ConfigError("'spectrum' must be a mapping with modes and damping")
        _check_keys(spec, ("modes", "damping"), "spectrum")
        modes = spec.get("modes")
        if not isinstance(modes, int) or isinstance(modes, bool) or modes < 1:
            raise ConfigError("spectrum.modes must be a positive integer")
        max_iter = d.get("max_iter", 200)
        if not isinstance(max_iter, int) or isinstance(max_iter, bool) or max_iter < 1:
            raise ConfigError("max_iter must be a positive integer")
        dc = d.get("decay_constant")
        thresholds = d.get("thresholds") or {}
        if not isinstance(thresholds, dict) or set(thresholds) - {"sap", "psap", "class_r", "decay_ratio"}:
            raise ConfigError("thresholds accepts sap, psap, class_r and decay_ratio")
        cfg = cls(
            alpha=_num(d, "alpha"),
            modes=modes,
            damping=_num(spec, "damping", positive=True),
            delay=_num(d, "delay", positive=True),
            horizon=_num(d, "horizon", positive=True),
            step=_num(d, "step", positive=True),
            omega=_num(d, "omega", positive=True),
            epsilon=_num(d, "epsilon", 0.01, positive=True),
            tolerance=_num(d, "tolerance", 1e-10, positive=True),
            max_iter=max_iter,
            decay_constant=None if dc is None else _num(d, "decay_constant", positive=True),
            forcing=copy.deepcopy(d.get("forcing", {"form": "zero"})),
            history=copy.deepcopy(d.get("history", {"form": "constant", "value": 1.0})),
            thresholds={k: float(v) for k, v in thresholds.items()},
            theta=[float(x) for x in d.get("theta", [])],
        )
        cfg.build()  # surface every problem at load time
        return cfg

    def to_dict(self) -> dict:
        d = {
            "alpha": self.alpha,
            "spectrum": {"modes": self.modes, "damping": self.damping},
            "delay": self.delay,
            "horizon": self.horizon,
            "step": self.step,
            "omega": self.omega,
            "epsilon": self.epsilon,
            "tolerance": self.tolerance,
            "max_iter": self.max_iter,
            "forcing": copy.deepcopy(self.forcing),
            "history": copy.deepcopy(self.history),
        }
        if self.decay_constant is not None:
            d["decay_constant"] = self.decay_constant
        if self.thresholds:
            d["thresholds"] = dict(self.thresholds)
        if self.theta:
            d["theta"] = list(self.theta)
        return d

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None)

    @classmethod
    def loads(cls, text: str) -> "ScenarioConfig":
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed scenario file: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
        return cls.loads(text)

    def build(self):
        """Return ``(system, grid, lipschitz)`` or raise :class:`ConfigError`."""
        try:
            return self._build()
        except ConfigError:
            raise
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(str(exc)) from None

    def _build(self):
        alpha = FractionalOrder(self.alpha)
        spectrum = SectorialSpectrum.dirichlet_heat(self.modes, self.damping)
        grid = TimeGrid(self.delay, self.horizon, self.step)
        n = spectrum.size
        fz = self.forcing
        if not isinstance(fz, dict) or "form" not in fz:
            raise ConfigError("forcing must be a mapping with a 'form' key")
        form = fz["form"]
        if form == "zero":
            _check_keys(fz, (), "forcing")
            f_map, g_map = ZeroMap(n), ZeroMap(n)
            lip = LipschitzData(0.0, 0.0)
        elif form == "linear":
            _check_keys(fz, ("f", "g"), "forcing")
            f_map = _linear_map(fz.get("f"), n, "forcing.f")
            g_map = _linear_map(fz.get("g"), n, "forcing.g")
            for mp_ in (f_map, g_map):
                for _, lag in mp_.terms:
                    if lag > self.delay + 1e-12:
                        raise ConfigError(f"lag {lag} exceeds the delay {self.delay}")
                    grid_lag = lag / self.step
                    if abs(grid_lag - round(grid_lag)) > 1e-9 * max(1.0, grid_lag):
                        raise ConfigError(f"lag {lag} is not a multiple of the step")
            lip = LipschitzData(g_map.lipschitz(), f_map.lipschitz())
        elif form == "kernel_delay":
            _check_keys(fz, ("h", "j", "k", "m"), "forcing")
            for key in ("h", "j", "k", "m"):
                if key not in fz:
                    raise ConfigError(f"kernel_delay forcing needs {key!r}")
            h_fn, h_sup = time_function(fz["h"], "forcing.h")
            j_fn, j_sup = time_function(fz["j"], "forcing.j")
            k_fn = kernel_function(fz["k"], self.delay, "forcing.k")
            m_fn = kernel_function(fz["m"], self.delay, "forcing.m")
            g_map = KernelDelayMap(h_fn, k_fn)
            f_map = KernelDelayMap(j_fn, m_fn)
            s = grid.history_times
            Lg, Lf = kernel_lipschitz(h_sup, j_sup, k_fn(s), m_fn(s), self.delay)
            lip = LipschitzData(Lg, Lf)
        else:
            raise ConfigError(f"forcing: unknown form {form!r}")
        phi = history_function(self.history, n)
        system = NeutralSystem(alpha, spectrum, self.delay, f_map, g_map, phi, lip)
        system.history(grid)
        if not self.omega < self.horizon:
            raise ConfigError("omega must be shorter than the horizon")
        if self.theta and not all(math.isfinite(x) for x in self.theta):
            raise ConfigError("theta values must be finite")
        return system, grid, lip


def preset(name: str = "small") -> ScenarioConfig:
    """Heat equation on (0, pi) with kernel-delay neutral and memory terms.

    ``small`` keeps the contraction constant well below 1; ``large`` scales
    both coefficient amplitudes by 100.
    """
    if name not in ("small", "large"):
        raise ConfigError(f"unknown preset {name!r}")
    scale = 1.0 if name == "small" else 100.0
    return ScenarioConfig(
        alpha=1.5, modes=8, damping=1.0, delay=1.0, horizon=40.0, step=0.01, omega=2.0,
        epsilon=0.01, tolerance=1e-10, max_iter=200,
        forcing={
            "form": "kernel_delay",
            "h": {"form": "sine", "mean": 0.1 * scale, "amplitude": 0.05 * scale, "period": 2.0},
            "j": {"form": "sine", "mean": 0.05 * scale, "amplitude": 0.025 * scale, "period": 2.0},
            "k": {"form": "exponential", "scale": 1.0, "rate": 1.0},
            "m": {"form": "constant", "value": 1.0},
        },
        history={"form": "inverse_square", "amplitude": 1.0},
    )
