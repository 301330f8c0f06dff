"""Mild solutions of fractional neutral delay equations and their asymptotic periodicity."""

from .mlf import MlfParams, mlf_eval, mlf_eval_batch
from .operator import (
    FractionalOrder,
    SectorialSpectrum,
    apply_solution_operator,
    decay_integral,
    fit_decay_constant,
    operator_norm,
)
from .dynamics import (
    ConvergenceError,
    HistorySegment,
    NeutralSystem,
    TimeGrid,
    Trajectory,
    phi_alpha_apply,
    segment_at,
    solve_picard,
)
from .asymptotics import (
    PeriodicityReport,
    SampledFunction,
    Thresholds,
    class_r_mean,
    classify,
    ergodic_set_measure,
    psap_mean,
    sap_tail,
    stepanov_norm,
)
from .conditions import GuaranteeReport, LipschitzData, guarantee

__version__ = "0.1.0"
