"""Post-hoc error evaluation against the sealed ground truth."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .. import foracle
from ..matlin import matrix_to_json, opnorm, phase_distance, skew_normal_form
from .box import FloBlackBox


class OracleCapWarning(UserWarning):
    pass


@dataclass
class LearnerReport:
    """One trial: what was learned, what it cost, and how far off it is."""

    scenario: str
    n: int
    trial: int
    seed: int
    estimate: np.ndarray
    queries: dict
    config: dict
    op_err: Optional[float] = None
    ph_err: Optional[float] = None
    diamond_err: Optional[float] = None
    success: Optional[bool] = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "n": self.n,
            "trial": self.trial,
            "seed": self.seed,
            "estimate": matrix_to_json(self.estimate),
            "queries": self.queries,
            "config": self.config,
            "op_err": self.op_err,
            "ph_err": self.ph_err,
            "diamond_err": self.diamond_err,
            "success": self.success,
            "extra": self.extra,
        }


def _within_cap(n: int, cap: int) -> bool:
    if n > cap:
        warnings.warn(
            f"n = {n} is above the oracle cap {cap}; reporting operator-norm errors only",
            OracleCapWarning,
            stacklevel=3,
        )
        return False
    return True


def unitary_errors(U_hat: np.ndarray, U: np.ndarray, cap: int = foracle.DEFAULT_CAP) -> dict:
    """Operator-norm, projective and diamond errors of a passive estimate."""
    n = U.shape[0]
    out = {"op_err": opnorm(U_hat - U), "ph_err": phase_distance(U_hat, U), "diamond_err": None}
    if _within_cap(n, cap):
        out["diamond_err"] = foracle.diamond_distance(U_hat, U, cap)
    return out


def orthogonal_errors(Q_hat: np.ndarray, Q: np.ndarray, cap: int = foracle.DEFAULT_CAP) -> dict:
    n = Q.shape[0] // 2
    out = {"op_err": opnorm(Q_hat - Q), "ph_err": None, "diamond_err": None}
    if _within_cap(n, cap):
        out["diamond_err"] = foracle.diamond_distance(Q_hat, Q, cap)
    return out


def state_trace_distance(gamma_hat: np.ndarray, gamma: np.ndarray, cap: int = foracle.DEFAULT_CAP) -> Optional[float]:
    """Exact trace distance of two pure Gaussian states, or ``None`` above the cap."""
    n = gamma.shape[0] // 2
    if not _within_cap(n, cap):
        return None
    states = []
    for g in (gamma_hat, gamma):
        W = skew_normal_form(g).W
        states.append(foracle.gaussian_from_orthogonal(W, cap=cap))
    return foracle.trace_distance(*states)


def hidden_truth(box: FloBlackBox) -> np.ndarray:
    """The report generator is the one place allowed to unseal the box."""
    return box.reveal()
