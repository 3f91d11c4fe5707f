"""Pure fermionic Gaussian states in the covariance-matrix picture.

``gamma[p, q] = -(i/2) <[g_p, g_q]>``; the vacuum is ``J = [[0, I], [-I, 0]]``
and mode ``j`` is occupied with probability ``(1 - gamma[j, j+n]) / 2``.

Sampling works on stacks of covariance matrices so that many independent
shots (each with its own random basis rotation) are simulated at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from . import florep
from .matlin import matrix_from_json, matrix_to_json, vacuum_form


class DegenerateMarginalError(RuntimeError):
    """Conditioning produced a marginal probability outside [0, 1]."""


@dataclass(frozen=True)
class GaussianState:
    n: int
    gamma: np.ndarray

    def __post_init__(self) -> None:
        g = np.asarray(self.gamma, dtype=float)
        if g.shape != (2 * self.n, 2 * self.n):
            raise ValueError("covariance has the wrong shape")
        if np.max(np.abs(g + g.T), initial=0.0) > 1e-9:
            raise ValueError("covariance is not skew-symmetric")
        object.__setattr__(self, "gamma", g)

    def purity_residual(self) -> float:
        return float(np.max(np.abs(self.gamma @ self.gamma.T - np.eye(2 * self.n))))

    def to_json(self) -> dict[str, Any]:
        return {"n": self.n, "gamma": matrix_to_json(self.gamma)}

    @staticmethod
    def from_json(obj: dict[str, Any]) -> "GaussianState":
        return GaussianState(int(obj["n"]), matrix_from_json(obj["gamma"]))


def vacuum_state(n: int) -> GaussianState:
    if n < 1:
        raise ValueError("n must be at least 1")
    return GaussianState(n, vacuum_form(n))


def fock_covariance(b: Sequence[int]) -> np.ndarray:
    b = np.asarray(b, dtype=int)
    n = b.size
    lam = 1.0 - 2.0 * b
    g = np.zeros((2 * n, 2 * n))
    idx = np.arange(n)
    g[idx, idx + n] = lam
    g[idx + n, idx] = -lam
    return g


def fock_basis_state(b: Sequence[int]) -> GaussianState:
    b = list(b)
    if any(x not in (0, 1) for x in b):
        raise ValueError("bitstring entries must be 0 or 1")
    return GaussianState(len(b), fock_covariance(b))


def apply_flo(s: GaussianState, Q: np.ndarray) -> GaussianState:
    Q = np.asarray(Q, dtype=float)
    if Q.shape != s.gamma.shape:
        raise ValueError("dimension mismatch")
    return GaussianState(s.n, Q @ s.gamma @ Q.T)


def append_vacuum_modes(s: GaussianState, k: int) -> GaussianState:
    """``s`` tensored with ``k`` vacuum modes, re-indexed to the split layout."""
    if k < 1:
        raise ValueError("k must be at least 1")
    m = s.n + k
    g = vacuum_form(m)
    idx = np.concatenate([np.arange(s.n), m + np.arange(s.n)])
    g[np.ix_(idx, idx)] = s.gamma
    return GaussianState(m, g)


# ---------------------------------------------------------------------------
# Fock measurement
# ---------------------------------------------------------------------------


def condition(gamma: np.ndarray, j: int, outcome: np.ndarray) -> np.ndarray:
    """Post-measurement covariances after observing ``b_j`` (batched, in place).

    ``gamma`` has shape ``(K, 2n, 2n)`` and ``outcome`` shape ``(K,)``. Uses
    ``G' = G + s (u v^T - v u^T) / (1 - s G[a, b])`` with ``a = j``,
    ``b = j + n``, ``s = +1`` for an occupied outcome; then the measured
    pair is reset to a definite occupation.
    """
    n = gamma.shape[-1] // 2
    a, b = j, j + n
    s = np.where(outcome == 1, 1.0, -1.0)
    denom = 1.0 - s * gamma[:, a, b]
    live = denom > 1e-12
    fac = np.where(live, s / np.where(live, denom, 1.0), 0.0)
    u = gamma[:, :, a].copy()
    v = gamma[:, :, b].copy()
    gamma += fac[:, None, None] * (u[:, :, None] * v[:, None, :] - v[:, :, None] * u[:, None, :])
    gamma[:, [a, b], :] = 0.0
    gamma[:, :, [a, b]] = 0.0
    gamma[:, a, b] = -s
    gamma[:, b, a] = s
    return gamma


def sample_fock_batch(
    gamma: np.ndarray, rng: np.random.Generator, check: bool = True
) -> np.ndarray:
    """Draw one bitstring per covariance matrix in the stack ``(K, 2n, 2n)``."""
    g = np.array(gamma, dtype=float, copy=True)
    if g.ndim == 2:
        g = g[None]
    K, d, _ = g.shape
    n = d // 2
    out = np.zeros((K, n), dtype=np.int8)
    u = rng.random((K, n))
    for j in range(n):
        p1 = 0.5 * (1.0 - g[:, j, j + n])
        if check and (np.any(p1 < -1e-9) or np.any(p1 > 1 + 1e-9)):
            raise DegenerateMarginalError("marginal probability left [0, 1]")
        bj = (u[:, j] < p1).astype(np.int8)
        out[:, j] = bj
        if j < n - 1:
            condition(g, j, bj)
    return out


def outcome_probabilities(gamma: np.ndarray, outcomes: np.ndarray) -> np.ndarray:
    """Exact probabilities of given bitstrings ``(K, n)`` under one covariance."""
    outcomes = np.asarray(outcomes, dtype=np.int8)
    if outcomes.ndim == 1:
        outcomes = outcomes[None]
    K, n = outcomes.shape
    g = np.broadcast_to(gamma, (K, 2 * n, 2 * n)).copy()
    prob = np.ones(K)
    for j in range(n):
        p1 = np.clip(0.5 * (1.0 - g[:, j, j + n]), 0.0, 1.0)
        bj = outcomes[:, j]
        prob *= np.where(bj == 1, p1, 1.0 - p1)
        condition(g, j, bj)
    return prob


def all_bitstrings(n: int) -> np.ndarray:
    """Every bitstring of length ``n`` in index order (mode 0 most significant)."""
    idx = np.arange(2**n)
    return np.stack([(idx >> (n - 1 - j)) & 1 for j in range(n)], axis=1).astype(np.int8)


def fock_probabilities(s: GaussianState) -> np.ndarray:
    """Full outcome distribution, indexed like the dense oracle's amplitudes."""
    return outcome_probabilities(s.gamma, all_bitstrings(s.n))


def measure_fock(s: GaussianState, rng: np.random.Generator) -> np.ndarray:
    return sample_fock_batch(s.gamma, rng)[0]


# ---------------------------------------------------------------------------
# Observables
# ---------------------------------------------------------------------------


def t_map(X: np.ndarray) -> np.ndarray:
    """``[[A, B], [C, D]] -> (B - C + i (A + D)) / 2``."""
    n = X.shape[0] // 2
    A, B, C, D = X[:n, :n], X[:n, n:], X[n:, :n], X[n:, n:]
    return 0.5 * (B - C + 1j * (A + D))


def rdm_from_covariance(s: GaussianState | np.ndarray) -> np.ndarray:
    """One-particle density matrix ``D[j, k] = <a_k^dag a_j>`` from the covariance."""
    g = s.gamma if isinstance(s, GaussianState) else np.asarray(s)
    n = g.shape[0] // 2
    D = 0.5 * (np.eye(n) - t_map(g))
    return 0.5 * (D + D.conj().T)


def covariance_from_rdm(D: np.ndarray) -> np.ndarray:
    """Inverse of :func:`rdm_from_covariance` for number-conserving states."""
    D = np.asarray(D, dtype=complex)
    n = D.shape[0]
    I = np.eye(n)
    return np.block([[-2 * D.imag, I - 2 * D.real], [-(I - 2 * D.real), -2 * D.imag]])


@dataclass(frozen=True)
class QuadraticObservable:
    """``sum_{p<q} c[p, q] i g_p g_q`` plus a constant, with ``c`` real."""

    coeffs: np.ndarray
    constant: float = 0.0

    @staticmethod
    def number(n: int, j: int) -> "QuadraticObservable":
        # n_j = (1 + i g_j g_{j+n}) / 2
        c = np.zeros((2 * n, 2 * n))
        c[j, j + n] = 0.5
        return QuadraticObservable(c, 0.5)

    @staticmethod
    def pair_quadrature(n: int, j: int, k: int, phi: float) -> "QuadraticObservable":
        """``e^{i phi} a_j^dag a_k^dag + e^{-i phi} a_k a_j``; ``phi = 0`` is X, ``pi/2`` is Y."""
        # a_j^dag a_k^dag + a_k a_j = -(i/2)(g_j g_{k+n} + g_{j+n} g_k)
        # i (a_j^dag a_k^dag - a_k a_j) = (i/2)(g_j g_k - g_{j+n} g_{k+n})
        c = np.zeros((2 * n, 2 * n))
        cx, cy = np.cos(phi), np.sin(phi)
        c[j, k + n] -= 0.5 * cx
        c[j + n, k] -= 0.5 * cx
        c[j, k] += 0.5 * cy
        c[j + n, k + n] -= 0.5 * cy
        return QuadraticObservable(c)


def quadratic_expectation(s: GaussianState, O: QuadraticObservable) -> float:
    """``<i g_p g_q> = -gamma[p, q]`` for ``p != q``, summed against the coefficients."""
    c = np.asarray(O.coeffs, dtype=float)
    if c.shape != s.gamma.shape:
        raise ValueError("observable does not match the state's mode count")
    if np.any(np.diag(c) != 0):
        raise ValueError("diagonal terms g_p g_p are not quadratic")
    return float(O.constant - np.sum(c * s.gamma))


# ---------------------------------------------------------------------------
# Fermionic EPR states
# ---------------------------------------------------------------------------
#
# The EPR register has n system and n auxiliary modes. Its natural Majorana
# order is "blocked": the 2n system Majoranas, then the 2n auxiliary ones.
# Everything below converts to the package's split order on 2n modes, where
# index j < 2n is the first Majorana of mode j and j + 2n the second.


def _blocked_to_split(n: int) -> np.ndarray:
    """Index map sending blocked position ``p`` to its split position."""
    j = np.arange(n)
    return np.concatenate([j, j + 2 * n, j + n, j + 3 * n])


def _from_blocked(M: np.ndarray, n: int) -> np.ndarray:
    L = _blocked_to_split(n)
    out = np.empty_like(M)
    out[np.ix_(L, L)] = M
    return out


def fepr_preparation(n: int) -> np.ndarray:
    """Orthogonal ``P_sigma P_pi`` (split order) mapping the vacuum to fEPR.

    In blocked order ``pi`` swaps Majoranas ``j + n`` and ``j + 2n`` for
    each ``j < n``, and ``sigma`` swaps ``j`` and ``j + 2n`` for even ``j``
    (zero-based).
    """
    d = 4 * n
    pi = np.arange(d)
    for j in range(n):
        pi[j + n], pi[j + 2 * n] = j + 2 * n, j + n
    sigma = np.arange(d)
    for j in range(0, 2 * n, 2):
        sigma[j], sigma[j + 2 * n] = j + 2 * n, j
    P = florep.permutation_majorana(sigma) @ florep.permutation_majorana(pi)
    return _from_blocked(P, n)


def fepr_state(n: int) -> GaussianState:
    return apply_flo(vacuum_state(2 * n), fepr_preparation(n))


def choi_sign(n: int) -> np.ndarray:
    """``S = diag(-1, 1, -1, ..., 1)`` of size ``2n``."""
    return np.diag(np.where(np.arange(2 * n) % 2 == 0, -1.0, 1.0))


def choi_blocks(gamma: np.ndarray) -> np.ndarray:
    """Covariance of a ``2n``-mode register rearranged into blocked order."""
    n = gamma.shape[0] // 4
    L = _blocked_to_split(n)
    return gamma[np.ix_(L, L)]


def fepr_covariance_of(Q: np.ndarray) -> GaussianState:
    """Closed form of ``(Phi(Q) x I)|fEPR>``: blocked covariance ``[[0, QS], [-(QS)^T, 0]]``."""
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0] // 2
    QS = Q @ choi_sign(n)
    Z = np.zeros_like(QS)
    return GaussianState(2 * n, _from_blocked(np.block([[Z, QS], [-QS.T, Z]]), n))


def choi_system_embedding(Q: np.ndarray) -> np.ndarray:
    """``Q`` on the ``n`` system modes of the ``2n``-mode EPR register."""
    return florep.extend_modes(np.asarray(Q, dtype=float), Q.shape[0])
