"""Passive (number-conserving) FLO learners: column tomography, phase fixing, U(1) phase."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..florep import Gate, GateList, dft_matrix
from ..matlin import svd_round
from .box import Access
from .calibration import CALIBRATED, Calibration
from .state import access_source, slater_tomo


class DegenerateInputError(ValueError):
    """A division in the column-phase fix hit a (near) zero denominator."""


def phaseless_tomo(access: Access, N: int, rng: np.random.Generator, stage: str = "phaseless") -> np.ndarray:
    """Estimate the passive unitary of ``access`` up to column phases.

    Column ``j`` is the top eigenvector of a one-particle Slater tomography
    on ``access|1_j>`` with ``N`` copies, for ``n * N`` queries in total.
    """
    n = access.n
    cols = []
    for j in range(n):
        initial = np.zeros(n, dtype=int)
        initial[j] = 1
        est = slater_tomo(access_source(access, initial, stage), n, N, 1, rng)
        cols.append(est.orbitals[:, 0])
    return svd_round(np.stack(cols, axis=1), "unitary")


def column_phases(V: np.ndarray, G: np.ndarray, tiny: float = 1e-12) -> np.ndarray:
    """Fix the column phases of ``V`` using ``G``, an estimate of ``V F^dag``.

    With ``V ~ U e^{i psi}`` and ``G ~ U F^dag e^{i phi}``, the ratio
    ``(G^dag V / F)[j, k]`` is ``e^{i(psi_k - phi_j)}``. Dividing by column
    0 leaves ``e^{i(psi_k - psi_0)}`` in every row of column ``k``; a median
    down each column gives a robust estimate of that phase.
    """
    V = np.asarray(V, dtype=complex)
    G = np.asarray(G, dtype=complex)
    n = V.shape[0]
    F = dft_matrix(n)
    if np.min(np.abs(F)) < tiny:
        raise DegenerateInputError("DFT matrix has a vanishing entry")
    P = (G.conj().T @ V) / F
    ref = P[:, :1]
    if np.min(np.abs(ref)) < tiny:
        raise DegenerateInputError("reference column of G^dag V / F vanishes")
    ratio = P / ref
    x = np.median(ratio.real, axis=0)
    y = np.median(ratio.imag, axis=0)
    alpha = np.angle(x + 1j * y)
    return V * np.exp(-1j * alpha)[None, :]


def pair_preparation(m: int) -> np.ndarray:
    """Orthogonal matrix preparing ``(|0_0 0_a> + |1_0 1_a>)/sqrt 2`` from vacuum, ``a = m - 1``."""
    a = m - 1
    gates = [Gate("majorana", (0, a), -np.pi / 4), Gate("majorana", (m, a + m), np.pi / 4)]
    return GateList(m, gates).orthogonal()


@dataclass(frozen=True)
class PhaseEstimate:
    theta: float
    m_x: float
    m_y: float


def phase_from_means(m_x: float, m_y: float) -> float:
    return float(np.arctan2(m_y, m_x))


def phase_est(access: Access, N: int, rng: np.random.Generator, stage: str = "phase") -> PhaseEstimate:
    """Read the U(1) phase of a near-identity passive word through one ancilla.

    Uses ``N`` shots for each of the X and Y quadratures (``2N`` runs of the
    word in total).
    """
    m = access.n + 1
    initial = [0] * m
    prep = pair_preparation(m)
    means = []
    for obs in ("X", "Y"):
        label = f"{stage}_{obs.lower()}"
        if access.box.noiseless:
            g = access.box.exact_covariance(access.spec(initial, N, prep, None, obs, label))
            # <b_0 + b_a - 1> with p(b_j = 1) = (1 - g[j, j + m]) / 2
            means.append(float(-(g[0, m] + g[m - 1, 2 * m - 1]) / 2))
        else:
            out = access.run(initial, rng, shots=N, prepare=prep, measurement=obs, stage=label)
            means.append(float(out.mean()))
    m_x, m_y = means
    return PhaseEstimate(phase_from_means(m_x, m_y), m_x, m_y)


@dataclass(frozen=True)
class PassiveResult:
    """Output of :func:`passive_tomo_base`.

    ``U`` is the final estimate; in sector mode it equals ``U_star`` and
    ``theta`` is ``None``.
    """

    U: np.ndarray
    U_star: np.ndarray
    theta: Optional[float]
    n_phaseless: int
    n_phase: int

    @property
    def queries(self) -> int:
        n = self.U.shape[0]
        return 2 * n * self.n_phaseless + 2 * self.n_phase


def passive_sizes(n: int, eps: float, delta: float, calibration: Calibration = CALIBRATED) -> tuple[int, int]:
    """Per-column copies and per-quadrature phase shots for the base passive learner."""
    n_pas = calibration.size("single_particle", n=n, eps=eps / 175, delta=delta / 4)
    n_ph = calibration.size("phase_alg5", eps=eps, delta=delta)
    return n_pas, n_ph


def passive_tomo_base(
    access: Access,
    rng: np.random.Generator,
    eps: float | None = None,
    delta: float | None = None,
    *,
    mode: str = "diamond",
    n_pas: int | None = None,
    n_ph: int | None = None,
    calibration: Calibration = CALIBRATED,
    stage: str = "",
) -> PassiveResult:
    """Learn a passive FLO from query access.

    Give either ``(eps, delta)`` or explicit copy counts ``(n_pas, n_ph)``;
    the second form is how the active learner calls in. ``mode="sector"``
    stops after the column-phase fix and never touches an ancilla.
    """
    if mode not in ("diamond", "sector"):
        raise ValueError(f"unknown mode {mode!r}")
    n = access.n
    if n_pas is None or (n_ph is None and mode == "diamond"):
        if eps is None or delta is None:
            raise ValueError("pass either eps and delta or explicit sample counts")
        sizes = passive_sizes(n, eps, delta, calibration)
        n_pas = sizes[0] if n_pas is None else n_pas
        n_ph = sizes[1] if n_ph is None else n_ph
    prefix = f"{stage}/" if stage else ""
    F = dft_matrix(n)
    V = phaseless_tomo(access, n_pas, rng, prefix + "phaseless")
    G = phaseless_tomo(access.before(F.conj().T), n_pas, rng, prefix + "phaseless_dft")
    U_star = column_phases(V, G)
    if mode == "sector":
        return PassiveResult(U_star, U_star, None, n_pas, 0)
    est = phase_est(access.before(U_star.conj().T), n_ph, rng, prefix + "phase")
    return PassiveResult(np.exp(1j * est.theta) * U_star, U_star, est.theta, n_pas, n_ph)
