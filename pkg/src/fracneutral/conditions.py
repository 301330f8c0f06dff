"""Lipschitz data and the contraction constants that guarantee a unique mild solution.

Four criteria are evaluated. Each is a left-hand side that must stay below 1:

* ``constant``: L_g + C M L_f D, with D = |mu|^(-1/alpha) pi / (alpha sin(pi/alpha)).
* ``bounded``: sup|L_g| + sup|L_f| C M D, for bounded Lipschitz functions.
* ``convolution``: sup|L_g| + sup_t C M int_0^t L_f(s) / (1 + |mu| (t-s)^alpha) ds.
* ``stepanov``: sup|L_g| + C M (1 + D) ||L_f||_{S^p}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .asymptotics import SampledFunction, stepanov_norm
from .dynamics import trapezoid_convolution
from .operator import decay_integral

# weakest hypothesis first; ties in the contraction constant go to the earlier one
CRITERIA = ("constant", "bounded", "convolution", "stepanov")

_APPLICABLE = {
    "constant": CRITERIA,
    "bounded": CRITERIA[1:],
    "integrable": CRITERIA[2:],
    "stepanov": CRITERIA[3:],
}


@dataclass(frozen=True)
class LipschitzData:
    """Lipschitz moduli of g and f.

    ``kind`` is one of ``constant`` (both moduli are numbers), ``bounded``
    (sampled bounded functions), ``integrable`` (sampled, used through the
    convolution criterion) or ``stepanov`` (sampled, controlled only in the
    Stepanov norm with exponent ``p``). Sampled moduli are
    :class:`SampledFunction` objects on [0, T].
    ``empirical`` marks sups taken from grid samples rather than known values.
    """

    Lg: object
    Lf: object
    kind: str = "constant"
    p: float = 1.0
    empirical: bool = False

    def __post_init__(self):
        if self.kind not in _APPLICABLE:
            raise ValueError(f"unknown Lipschitz variant {self.kind!r}")
        for name in ("Lg", "Lf"):
            val = getattr(self, name)
            if self.kind == "constant" and isinstance(val, SampledFunction):
                raise ValueError("constant Lipschitz data must be numbers")
            if _sup(val) < 0 or np.any(_samples(val) < 0):
                raise ValueError(f"{name} must be non-negative")
        if not self.p >= 1:
            raise ValueError("Stepanov exponent must be >= 1")

    @property
    def sup_g(self) -> float:
        return _sup(self.Lg)

    @property
    def sup_f(self) -> float:
        return _sup(self.Lf)


def _samples(v) -> np.ndarray:
    return v.values if isinstance(v, SampledFunction) else np.atleast_1d(float(v))


def _sup(v) -> float:
    return float(np.max(np.abs(_samples(v))))


def _require(lip: LipschitzData, criterion: str):
    if criterion not in _APPLICABLE[lip.kind]:
        raise ValueError(f"the {criterion!r} criterion does not apply to {lip.kind!r} Lipschitz data")


def constant_lhs(lip: LipschitzData, C, M, mu, alpha) -> float:
    _require(lip, "constant")
    return lip.sup_g + C * M * lip.sup_f * decay_integral(1.0, 1.0, mu, alpha)


def bounded_lhs(lip: LipschitzData, C, M, mu, alpha) -> float:
    _require(lip, "bounded")
    return lip.sup_g + lip.sup_f * decay_integral(C, M, mu, alpha)


def weighted_memory(Lf, C, M, mu, alpha, h: float | None = None, T: float | None = None) -> np.ndarray:
    """W(t_k) = C M int_0^{t_k} L_f(s) / (1 + |mu| (t_k - s)^alpha) ds at each node.

    ``Lf`` may be a constant, in which case ``h`` and ``T`` fix the grid.
    """
    if isinstance(Lf, SampledFunction):
        f = Lf.from_zero()
        h, vals = f.h, f.norms()
    else:
        if h is None or T is None:
            raise ValueError("a constant L_f needs a grid step and horizon")
        vals = np.full(round(T / h) + 1, float(Lf))
    a = getattr(alpha, "alpha", alpha)
    s = h * np.arange(len(vals))
    kernel = 1.0 / (1.0 + abs(mu) * s ** a)
    return C * M * trapezoid_convolution(kernel[:, None], vals[:, None], h)[:, 0]


def convolution_lhs(lip: LipschitzData, C, M, mu, alpha, grid=None, include_cm: bool = True) -> float:
    """sup_t W_f(t) + sup|L_g|.

    With ``include_cm=False`` the weight omits the C M factor, the literal
    form of the criterion; the default keeps it, as the estimate behind the
    criterion does.
    """
    _require(lip, "convolution")
    h = T = None
    if grid is not None:
        h, T = grid.h, grid.T
    elif not isinstance(lip.Lf, SampledFunction):
        raise ValueError("a grid is needed when L_f is constant")
    if not isinstance(lip.Lf, SampledFunction) and (h is None or T <= 0):
        raise ValueError("empty grid")
    cm = C * M if include_cm else 1.0
    W = weighted_memory(lip.Lf, cm, 1.0, mu, alpha, h, T)
    return lip.sup_g + float(np.max(W))


def stepanov_lhs(lip: LipschitzData, C, M, mu, alpha) -> float:
    _require(lip, "stepanov")
    if isinstance(lip.Lf, SampledFunction):
        norm = stepanov_norm(lip.Lf, lip.p)
    else:
        norm = float(lip.Lf)
    return lip.sup_g + C * M * (1.0 + decay_integral(1.0, 1.0, mu, alpha)) * norm


def kernel_lipschitz(h_sup: float, j_sup: float, k, m, r: float):
    """Lipschitz constants of the kernel-delay maps a(t) int k(s) psi(s) ds.

    L_g = sqrt(r) sup|h| ||k||_{L^2(-r,0)} and L_f likewise with j and m.
    ``k`` and ``m`` are samples on [-r, 0] (arrays or :class:`SampledFunction`).
    """
    if h_sup < 0 or j_sup < 0:
        raise ValueError("sup norms must be non-negative")
    out = []
    for amp, ker in ((h_sup, k), (j_sup, m)):
        vals = np.asarray(ker.values if isinstance(ker, SampledFunction) else ker, dtype=float)
        if vals.size < 2:
            raise ValueError("kernel needs at least two samples")
        step = r / (vals.size - 1)
        out.append(math.sqrt(r) * amp * math.sqrt(trapezoid(vals ** 2, dx=step)))
    return out[0], out[1]


@dataclass
class GuaranteeReport:
    criteria: dict = field(default_factory=dict)
    best: str = "none"
    contraction_constant: float = math.inf
    empirical: bool = False

    def to_dict(self) -> dict:
        return {
            "criteria": self.criteria,
            "best": self.best,
            "contraction_constant": self.contraction_constant,
            "empirical": self.empirical,
        }


def guarantee(lip: LipschitzData, C, M, mu, alpha, grid=None, include_cm: bool = True) -> GuaranteeReport:
    """Evaluate every criterion that applies to ``lip`` and pick the best one."""
    funcs = {
        "constant": lambda: constant_lhs(lip, C, M, mu, alpha),
        "bounded": lambda: bounded_lhs(lip, C, M, mu, alpha),
        "convolution": lambda: convolution_lhs(lip, C, M, mu, alpha, grid, include_cm),
        "stepanov": lambda: stepanov_lhs(lip, C, M, mu, alpha),
    }
    report = GuaranteeReport(empirical=lip.empirical)
    for name in _APPLICABLE[lip.kind]:
        if name == "convolution" and grid is None and not isinstance(lip.Lf, SampledFunction):
            continue
        if name == "stepanov" and isinstance(lip.Lf, SampledFunction) and lip.Lf.horizon - lip.Lf.t0 < 1:
            continue
        lhs = float(funcs[name]())
        report.criteria[name] = {"lhs": lhs, "threshold": 1.0, "satisfied": lhs < 1.0}
    if report.criteria:
        name = min(report.criteria, key=lambda n: (report.criteria[n]["lhs"], CRITERIA.index(n)))
        report.contraction_constant = report.criteria[name]["lhs"]
        if report.contraction_constant < 1.0:
            report.best = name
    return report
