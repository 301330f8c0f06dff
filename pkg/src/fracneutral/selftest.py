"""Built-in example table, one row per documented example of each module.

Reference values were produced by independent oracles (extended-precision
series, adaptive quadrature, closed forms) and frozen here.
"""
from __future__ import annotations

import math
import os

import numpy as np

from . import asymptotics as asy
from . import conditions as cond
from . import dynamics as dyn
from . import operator as op
from .mlf import MlfParams, mlf_eval, mlf_eval_batch

TOL_ENV = "FRACNEUTRAL_SELFTEST_TOL"

E15 = {  # E_{1.5,1}(z), 60+ digit power series
    -0.5: 0.6632367948724279,
    -1.0: 0.39662936531808807,
    -2.0: 0.02943068560282647,
    -4.0: -0.27242487890994055,
    -5.0: -0.3000820504131309,
    -500.0: -0.0005641599826205787,
    -1e4: -2.820947547489963e-05,
}
NORM_17 = 0.5246276684012322  # max(|E_1.7(-3^1.7)|, |E_1.7(-9 * 3^1.7)|)
DECAY_15 = 2.418399152312291  # quadrature of 1/(1+s^1.5) over [0, inf)
DECAY_16 = 0.39269908162287537  # quadrature at mu=-16, alpha=2-1e-9


def _mlf_rows():
    p15 = MlfParams(1.5)
    return [
        ("mlf", "exp", lambda: mlf_eval(MlfParams(1, 1), -1.0), math.exp(-1), 1e-12),
        ("mlf", "cos", lambda: mlf_eval(MlfParams(2, 1), -1.0), math.cos(1.0), 1e-12),
        ("mlf", "series-z-2", lambda: mlf_eval(p15, -2.0), E15[-2.0], 1e-12),
        ("mlf", "large-z-1e4", lambda: mlf_eval(p15, -1e4), E15[-1e4], 1e-12),
        ("mlf", "batch-zeros", lambda: mlf_eval_batch(p15, [0, 0, 0]), [1, 1, 1], 0.0),
        ("mlf", "batch-exp", lambda: mlf_eval_batch(MlfParams(1, 1), [-1, -2]), [math.exp(-1), math.exp(-2)], 1e-12),
        ("mlf", "batch-mixed", lambda: mlf_eval_batch(p15, [-0.5, -5, -500]), [E15[-0.5], E15[-5.0], E15[-500.0]], 1e-12),
    ]


def _operator_rows():
    two = op.SectorialSpectrum((-1.0, -4.0))
    return [
        ("operator", "identity-at-0", lambda: op.apply_solution_operator(two, 1.5, 0.0, [1.0, 2.0]), [1.0, 2.0], 0.0),
        ("operator", "exp-semigroup", lambda: op.apply_solution_operator(op.SectorialSpectrum((-1.0,)), 1.0, 2.0, [3.0]), [3 * math.exp(-2)], 1e-12),
        ("operator", "two-modes", lambda: op.apply_solution_operator(two, 1.5, 1.0, [1.0, 1.0]), [E15[-1.0], E15[-4.0]], 1e-12),
        ("operator", "norm-at-0", lambda: op.operator_norm(two, 1.5, 0.0), 1.0, 0.0),
        ("operator", "norm-exp", lambda: op.operator_norm(op.SectorialSpectrum((-1.0,)), 1.0, 1.0), math.exp(-1), 1e-12),
        ("operator", "norm-alpha-1.7", lambda: op.operator_norm(op.SectorialSpectrum((-1.0, -9.0)), 1.7, 3.0), NORM_17, 1e-12),
        ("operator", "fit-at-0", lambda: op.fit_decay_constant(op.SectorialSpectrum((-1.0,)), 1.0, [0.0]), 1.0, 0.0),
        ("operator", "decay-integral", lambda: op.decay_integral(1, 1, -1, 1.5), DECAY_15, 1e-12),
        ("operator", "decay-linear", lambda: op.decay_integral(2, 3, -1, 1.5), 6 * DECAY_15, 1e-11),
        ("operator", "decay-near-2", lambda: op.decay_integral(1, 1, -16, 2 - 1e-9), DECAY_16, 1e-8),
    ]


def _scalar_system(alpha, f_map, g_map, x0):
    return dyn.NeutralSystem(op.FractionalOrder(alpha), op.SectorialSpectrum((-1.0,)), 1.0, f_map, g_map,
                             lambda th: np.full((len(th), 1), x0))


def _dynamics_rows():
    grid = dyn.TimeGrid(1.0, 5.0, 0.01)
    t = grid.forward_times

    def free():
        sys_ = _scalar_system(1.5, dyn.ZeroMap(1), dyn.ZeroMap(1), 2.0)
        v = dyn.phi_alpha_apply(sys_, sys_.constant_extension(grid))
        return v.forward[:, 0] - 2.0 * mlf_eval_batch(MlfParams(1.5), -t ** 1.5)

    def variation_of_constants():
        sys_ = _scalar_system(1 + 1e-6, dyn.LinearDelayMap(offset=[0.7], dim=1), dyn.ZeroMap(1), 2.0)
        u = dyn.solve_picard(sys_, grid, 1e-12, 20).trajectory
        return u.forward[:, 0] - (2.0 * np.exp(-t) + 0.7 * (1 - np.exp(-t)))

    def neutral_constant():
        sys_ = _scalar_system(1.5, dyn.ZeroMap(1), dyn.LinearDelayMap(offset=[0.4], dim=1), 2.0)
        v = dyn.phi_alpha_apply(sys_, sys_.constant_extension(grid))
        return v.forward[1:, 0] - (1.6 * mlf_eval_batch(MlfParams(1.5), -t[1:] ** 1.5) + 0.4)

    def ramp_segment():
        g = dyn.TimeGrid(0.5, 2.0, 0.1)
        u = dyn.Trajectory(g, np.maximum(g.times, 0.0))
        return dyn.segment_at(u, 0.5).samples[:, 0] - np.linspace(0.0, 0.5, 6)

    return [
        ("dynamics", "free-evolution", free, 0.0, 1e-12),
        ("dynamics", "neutral-constant", neutral_constant, 0.0, 1e-12),
        ("dynamics", "variation-of-constants", variation_of_constants, 0.0, 1e-4),
        ("dynamics", "ramp-segment", ramp_segment, 0.0, 1e-12),
    ]


def _asymptotics_rows():
    h = 0.001
    ex = asy.SampledFunction.from_callable(lambda t: np.exp(-t), 101.0, h)
    sq = asy.SampledFunction.from_callable(lambda t: np.sin(2 * np.pi * t), 3.0, h)
    sine = asy.SampledFunction.from_callable(np.sin, 202.0, 0.01)
    meas = math.log(10 * (1 - math.exp(-1))) / 100
    return [
        ("asymptotics", "psap-exp-10", lambda: asy.psap_mean(ex, 1.0, 10.0), (1 - math.exp(-1)) * (1 - math.exp(-10)) / 10, 1e-6),
        ("asymptotics", "class-r-exp-100", lambda: asy.class_r_mean(ex, 1.0, 1.0, 100.0),
         (1 - math.exp(-1)) * math.e * (math.exp(-1) - math.exp(-100)) / 100, 1e-6),
        ("asymptotics", "ergodic-exp", lambda: asy.ergodic_set_measure(ex, 1.0, 1.0, 0.1, 100.0), meas, 2 * h / 100),
        ("asymptotics", "stepanov-sine", lambda: asy.stepanov_norm(sq, 2.0), math.sqrt(0.5), 1e-6),
        ("asymptotics", "stepanov-exp", lambda: asy.stepanov_norm(ex, 1.0), 1 - math.exp(-1), 1e-6),
        ("asymptotics", "psap-sine-bounded-away", lambda: asy.psap_mean(sine, 1.0, 200.0) > 0.5, True, 0.0),
    ]


def _conditions_rows():
    spike = asy.SampledFunction(np.where((np.arange(3001) >= 1000) & (np.arange(3001) < 1100), 1.0, 0.0), 0.001)
    lip_spike = cond.LipschitzData(0.0, spike, kind="stepanov", p=2.0)
    s = np.linspace(-1.0, 0.0, 1001)
    return [
        ("conditions", "bounded-zero", lambda: cond.bounded_lhs(cond.LipschitzData(0.0, 0.0), 1, 1, -1, 1.5), 0.0, 0.0),
        ("conditions", "bounded-small", lambda: cond.bounded_lhs(cond.LipschitzData(0.3, 0.1), 1, 1, -1, 1.5), 0.3 + 0.1 * DECAY_15, 1e-12),
        ("conditions", "bounded-large", lambda: cond.bounded_lhs(cond.LipschitzData(0.9, 1.0), 1, 1, -1, 1.5), 0.9 + DECAY_15, 1e-12),
        ("conditions", "stepanov-spike", lambda: cond.stepanov_lhs(lip_spike, 1, 1, -1, 1.5), (1 + DECAY_15) * math.sqrt(0.1), 1e-9),
        ("conditions", "kernel-unit", lambda: cond.kernel_lipschitz(1.0, 0.0, np.ones(11), np.zeros(11), 1.0)[0], 1.0, 1e-12),
        ("conditions", "kernel-exp", lambda: cond.kernel_lipschitz(0.2, 0.0, np.exp(s), np.zeros(3), 1.0)[0],
         0.2 * math.sqrt((1 - math.exp(-2)) / 2), 1e-6),
        ("conditions", "guarantee-zero", lambda: cond.guarantee(cond.LipschitzData(0.0, 0.0), 1, 1, -1, 1.5).best, "constant", 0.0),
        ("conditions", "guarantee-none", lambda: cond.guarantee(cond.LipschitzData(1.5, 0.0), 1, 1, -1, 1.5).best, "none", 0.0),
    ]


def example_table():
    return _mlf_rows() + _operator_rows() + _dynamics_rows() + _asymptotics_rows() + _conditions_rows()


def _matches(got, expected, tol) -> bool:
    if isinstance(expected, (str, bool)):
        return got == expected
    g = np.asarray(got, dtype=float)
    e = np.asarray(expected, dtype=float)
    return bool(np.all(np.abs(g - e) <= tol))


def run_selftest(force_alpha=None, out=print) -> int:
    if force_alpha is not None:
        try:
            op.FractionalOrder(force_alpha)
        except ValueError as exc:
            out(f"config error: {exc}")
            return 2
    override = os.environ.get(TOL_ENV)
    failures = 0
    for module, name, fn, expected, tol in example_table():
        if override is not None:
            tol = float(override)
        try:
            got = fn()
            ok = _matches(got, expected, tol)
            detail = "" if ok else f" got={np.asarray(got).tolist()} expected={expected}"
        except Exception as exc:  # report and keep going
            ok, detail = False, f" raised {type(exc).__name__}: {exc}"
        failures += not ok
        out(f"{'PASS' if ok else 'FAIL'} {module}/{name}{detail}")
    out(f"{failures} failure(s)")
    return 0 if failures == 0 else 4
