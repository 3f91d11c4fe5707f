"""Learners for unknown FLOs behind a query-counting black box."""

from .active import ActiveResult, ChoiResult, active_tomo_base, choi_tomo_base
from .bootstrap import BootstrapDivergence, bootstrap, synthetic_base
from .box import QUERY, Access, ExperimentSpec, FloBlackBox, MalformedExperiment, QueryLedger
from .calibration import CALIBRATED, PAPER, Calibration
from .passive import DegenerateInputError, column_phases, passive_tomo_base, phase_est, phaseless_tomo
from .report import LearnerReport
from .state import gaussian_tomo, slater_tomo

__all__ = [
    "QUERY",
    "Access",
    "ActiveResult",
    "BootstrapDivergence",
    "CALIBRATED",
    "Calibration",
    "ChoiResult",
    "DegenerateInputError",
    "ExperimentSpec",
    "FloBlackBox",
    "LearnerReport",
    "MalformedExperiment",
    "PAPER",
    "QueryLedger",
    "active_tomo_base",
    "bootstrap",
    "choi_tomo_base",
    "column_phases",
    "gaussian_tomo",
    "passive_tomo_base",
    "phase_est",
    "phaseless_tomo",
    "slater_tomo",
    "synthetic_base",
]
