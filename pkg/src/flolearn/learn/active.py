"""Learners for general (active) FLOs: two-stage tomography and the Choi-state shortcut."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import gsim
from ..florep import embed_passive
from ..matlin import svd_round
from .box import Access, MalformedExperiment
from .calibration import CALIBRATED, Calibration
from .passive import PassiveResult, passive_tomo_base
from .state import access_source, gaussian_tomo


@dataclass(frozen=True)
class ActiveResult:
    Q: np.ndarray
    Q_act: np.ndarray
    passive: PassiveResult
    n_act: int
    n_pas: int
    n_ph: int

    @property
    def queries(self) -> int:
        n = self.Q.shape[0] // 2
        return self.n_act + 2 * n * self.n_pas + 2 * self.n_ph


def active_sizes(n: int, eps: float, delta: float, calibration: Calibration = CALIBRATED) -> tuple[int, int, int]:
    """Stage-1 copies, per-column stage-2 copies, and per-quadrature phase shots."""
    return (
        calibration.size("active_act", n=n, eps=eps, delta=delta),
        calibration.size("active_pas", n=n, eps=eps, delta=delta),
        calibration.size("active_ph", n=n, eps=eps, delta=delta),
    )


def active_tomo_base(
    access: Access,
    rng: np.random.Generator,
    eps: float,
    delta: float,
    *,
    calibration: Calibration = CALIBRATED,
    sizes: tuple[int, int, int] | None = None,
    stage: str = "",
) -> ActiveResult:
    """Learn ``Q`` in O(2n) to operator-norm error ``eps``.

    Stage 1 learns the Gaussian state ``Phi(Q)|0>``; its normal form fixes
    ``Q`` up to a passive factor. Stage 2 runs the passive learner on the
    word "query, then ``Q_act^T``", which is passive up to a small active
    perturbation.
    """
    n = access.n
    n_act, n_pas, n_ph = sizes if sizes is not None else active_sizes(n, eps, delta, calibration)
    prefix = f"{stage}/" if stage else ""
    est = gaussian_tomo(access_source(access, [0] * n, prefix + "gauss"), n, n_act, rng)
    Q_act = est.normal_form.W
    pas = passive_tomo_base(access.then(Q_act.T), rng, n_pas=n_pas, n_ph=n_ph, stage=prefix + "stage2")
    return ActiveResult(Q_act @ embed_passive(pas.U), Q_act, pas, n_act, n_pas, n_ph)


@dataclass(frozen=True)
class ChoiResult:
    Q: np.ndarray
    block: np.ndarray
    N: int

    @property
    def queries(self) -> int:
        return self.N


def choi_tomo_base(
    access: Access,
    rng: np.random.Generator,
    eps: float,
    delta: float,
    *,
    calibration: Calibration = CALIBRATED,
    N: int | None = None,
    stage: str = "",
) -> ChoiResult:
    """Learn ``Q`` from the covariance of its fermionic Choi state.

    Needs a box that allows ``n`` auxiliary modes; see
    :meth:`FloBlackBox.grant_choi_register`.
    """
    n = access.n
    if access.box.max_ancillas < n:
        raise MalformedExperiment("the Choi learner needs n auxiliary modes; grant the Choi register first")
    if N is None:
        N = calibration.size("choi", n=n, eps=eps, delta=delta)
    prefix = f"{stage}/" if stage else ""
    src = access_source(access, [0] * (2 * n), prefix + "choi", prepare=gsim.fepr_preparation(n))
    est = gaussian_tomo(src, 2 * n, N, rng)
    block = gsim.choi_blocks(est.mean)[: 2 * n, 2 * n :]
    Q = svd_round(block, "orthogonal") @ gsim.choi_sign(n)
    return ChoiResult(Q, block, N)
