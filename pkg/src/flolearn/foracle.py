"""Brute-force Fock-space oracle under the Jordan-Wigner map.

Mode ``j`` is qubit ``j`` with mode 0 as the most significant bit of the
amplitude index. Majoranas are ``g_j = X_j Z_{<j}`` and
``g_{j+n} = Y_j Z_{<j}``. The basis vector for bitstring ``b`` is
``a^dag_{i1} ... a^dag_{ik} |0>`` with ``i1 < ... < ik``.

Exponential cost; intended for ``n`` up to about 10 and only as ground
truth for the covariance-matrix simulator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import florep
from .florep import Gate, GateList

DEFAULT_CAP = 10


class OracleCapError(ValueError):
    """Requested mode count exceeds the dense oracle's cap."""


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise OracleCapError(f"n = {n} exceeds the dense oracle cap {cap}")


@lru_cache(maxsize=None)
def _tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(2**n)
    bits = np.stack([(idx >> (n - 1 - j)) & 1 for j in range(n)])
    before = np.zeros_like(bits)
    if n > 1:
        before[1:] = np.cumsum(bits[:-1], axis=0) % 2
    return bits, before


def apply_majorana(p: int, psi: np.ndarray, n: int) -> np.ndarray:
    """``g_p`` applied along the first axis of ``psi``."""
    bits, before = _tables(n)
    j = p % n
    flip = np.arange(2**n) ^ (1 << (n - 1 - j))
    sign = (1 - 2 * before[j]).astype(complex)
    if p >= n:
        sign = sign * 1j * (1 - 2 * bits[j])
    out = np.empty_like(psi, dtype=complex)
    shape = (-1,) + (1,) * (psi.ndim - 1)
    out[flip] = sign.reshape(shape) * psi
    return out


def apply_annihilation(j: int, psi: np.ndarray, n: int) -> np.ndarray:
    return 0.5 * (apply_majorana(j, psi, n) + 1j * apply_majorana(j + n, psi, n))


def apply_creation(j: int, psi: np.ndarray, n: int) -> np.ndarray:
    return 0.5 * (apply_majorana(j, psi, n) - 1j * apply_majorana(j + n, psi, n))


def majorana_matrix(p: int, n: int) -> np.ndarray:
    return apply_majorana(p, np.eye(2**n, dtype=complex), n)


# ---------------------------------------------------------------------------
# States and gates
# ---------------------------------------------------------------------------


@dataclass
class DenseState:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.n,):
            raise ValueError("amplitude vector has the wrong length")
        if abs(np.linalg.norm(self.amplitudes) - 1.0) > 1e-10:
            raise ValueError("state is not normalized")


def bits_to_index(b) -> int:
    out = 0
    for x in b:
        out = (out << 1) | int(x)
    return out


def fock_state(b, cap: int = DEFAULT_CAP) -> DenseState:
    n = len(b)
    _check_cap(n, cap)
    amp = np.zeros(2**n, dtype=complex)
    amp[bits_to_index(b)] = 1.0
    return DenseState(n, amp)


def vacuum(n: int) -> DenseState:
    return fock_state([0] * n)


def _apply_gate(g: Gate, psi: np.ndarray, n: int) -> np.ndarray:
    def rot(p: int, q: int, t: float, v: np.ndarray) -> np.ndarray:
        # exp(-(t/2) g_p g_q) = cos(t/2) - sin(t/2) g_p g_q
        return np.cos(t / 2) * v - np.sin(t / 2) * apply_majorana(p, apply_majorana(q, v, n), n)

    if g.kind == "majorana":
        p, q = g.indices
        return rot(p, q, g.angle, psi)
    if g.kind == "givens":
        q, r = g.indices
        return rot(q + n, r + n, g.angle, rot(q, r, g.angle, psi))
    if g.kind == "phase":
        (q,) = g.indices
        bits, _ = _tables(n)
        ph = np.exp(-1j * g.angle * bits[q])
        return ph.reshape((-1,) + (1,) * (psi.ndim - 1)) * psi
    if g.kind == "reflection":
        return apply_majorana(0, psi, n)
    raise ValueError(f"unknown gate kind {g.kind!r}")


def dense_apply(gates: GateList, s: DenseState, cap: int = DEFAULT_CAP) -> DenseState:
    _check_cap(s.n, cap)
    psi = s.amplitudes
    for g in gates:
        psi = _apply_gate(g, psi, s.n)
    return DenseState(s.n, psi)


def dense_unitary(gates: GateList, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Full ``2^n x 2^n`` matrix of the compiled circuit."""
    n = gates.n
    _check_cap(n, cap)
    M = np.eye(2**n, dtype=complex)
    for g in gates:
        M = _apply_gate(g, M, n)
    return M


def flo_unitary(M: np.ndarray, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Canonical Fock-space unitary of an FLO given by ``Q`` (real) or ``U`` (complex)."""
    return dense_unitary(florep.compile_to_gates(M), cap)


def gaussian_from_orthogonal(Q: np.ndarray, b=None, cap: int = DEFAULT_CAP) -> DenseState:
    """``Phi(Q)|b>`` (vacuum by default) as a dense state."""
    n = np.asarray(Q).shape[0] // 2 if not np.iscomplexobj(Q) else np.asarray(Q).shape[0]
    s = fock_state([0] * n if b is None else b, cap)
    return dense_apply(florep.compile_to_gates(Q), s, cap)


# ---------------------------------------------------------------------------
# Exact quantities
# ---------------------------------------------------------------------------


def probabilities(s: DenseState) -> np.ndarray:
    return np.abs(s.amplitudes) ** 2


def covariance(s: DenseState) -> np.ndarray:
    """``G[p, q] = -i <g_p g_q>`` for ``p != q``."""
    n = s.n
    psi = s.amplitudes
    gpsi = np.stack([apply_majorana(p, psi, n) for p in range(2 * n)])
    G = -1j * (gpsi.conj() @ gpsi.T)  # <g_p g_q> = <g_p psi | g_q psi>
    G = G.real
    np.fill_diagonal(G, 0.0)
    return 0.5 * (G - G.T)


def rdm(s: DenseState) -> np.ndarray:
    """``D[j, k] = <a_k^dag a_j>``, so a Slater state ``Phi(U)|1^eta>`` gives ``U P U^dag``."""
    n = s.n
    psi = s.amplitudes
    apsi = np.stack([apply_annihilation(j, psi, n) for j in range(n)])
    D = apsi.conj() @ apsi.T  # <a_j psi | a_k psi> = <a_j^dag a_k>
    D = D.T
    return 0.5 * (D + D.conj().T)


def number_moments(s: DenseState) -> tuple[float, float]:
    bits, _ = _tables(s.n)
    num = bits.sum(axis=0)
    p = probabilities(s)
    return float(p @ num), float(p @ num**2)


def expectation(s: DenseState, op: np.ndarray) -> complex:
    return complex(s.amplitudes.conj() @ (op @ s.amplitudes))


def pair_quadratures(s: DenseState, j: int, k: int) -> tuple[float, float]:
    """``<X>`` and ``<Y>`` for ``X = a_j^dag a_k^dag + a_k a_j`` and ``Y = i(a_j^dag a_k^dag - a_k a_j)``."""
    n = s.n
    psi = s.amplitudes
    create = apply_creation(j, apply_creation(k, psi, n), n)
    c = complex(psi.conj() @ create)
    return 2 * c.real, -2 * c.imag


# ---------------------------------------------------------------------------
# Wick-theorem tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TwoPointTable:
    """Two-point functions of ``b = alpha a + conj(beta) a^dag`` in a Slater state."""

    bd_b: np.ndarray
    bd_bd: np.ndarray
    b_bd: np.ndarray
    b_b: np.ndarray


def wick_two_point(Z: np.ndarray, D: np.ndarray) -> TwoPointTable:
    """Tables for ``Phi(Z)|phi>`` where ``phi`` has RDM ``D`` (package convention).

    The closed forms use ``C[l, m] = <a_l^dag a_m>``, which is ``D.T``.
    """
    bog = florep.to_bogoliubov(Z)
    a, b = bog.alpha, bog.beta
    C = np.asarray(D).T
    I = np.eye(C.shape[0])
    Cb = I - C.T
    return TwoPointTable(
        bd_b=a.conj() @ C @ a.T + b @ Cb @ b.conj().T,
        bd_bd=a.conj() @ C @ b.T + b @ Cb @ a.conj().T,
        b_bd=a @ Cb @ a.conj().T + b.conj() @ C @ b.T,
        b_b=b.conj() @ C @ a.T + a @ Cb @ b.conj().T,
    )


def wick_four_point(t: TwoPointTable, j: int, k: int) -> complex:
    """``<b_j^dag b_j b_k^dag b_k>``."""
    return complex(
        t.bd_b[j, j] * t.bd_b[k, k] - t.bd_bd[j, k] * t.b_b[j, k] + t.bd_b[j, k] * t.b_bd[j, k]
    )


def number_moments_wick(Z: np.ndarray, D: np.ndarray) -> tuple[float, float]:
    t = wick_two_point(Z, D)
    n = D.shape[0]
    num1 = float(np.trace(t.bd_b).real)
    num2 = sum(wick_four_point(t, j, k) for j in range(n) for k in range(n))
    return num1, float(np.real(num2))


@dataclass(frozen=True)
class MomentCheck:
    num1: float
    num2: float
    bound1: float
    bound2: float

    @property
    def holds(self) -> bool:
        return self.num1 <= self.bound1 + 1e-9 and self.num2 <= self.bound2 + 1e-9


def moment_bounds_check(Z: np.ndarray, phi: np.ndarray) -> MomentCheck:
    """Number moments of ``Phi(Z)|phi>`` for a single-particle orbital ``phi``."""
    phi = np.asarray(phi, dtype=complex)
    phi = phi / np.linalg.norm(phi)
    num1, num2 = number_moments_wick(Z, np.outer(phi, phi.conj()))
    bf2 = float(np.linalg.norm(florep.to_bogoliubov(Z).beta, "fro") ** 2)
    return MomentCheck(num1, num2, 1.0 + bf2, 2.0 + 7.0 * bf2 + bf2**2)


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------


def trace_distance(s1: DenseState, s2: DenseState) -> float:
    # sqrt(1 - |<a|b>|^2) computed as the norm of b's component orthogonal to a,
    # which keeps full relative precision when the states nearly coincide
    a, b = s1.amplitudes, s2.amplitudes
    return float(min(1.0, np.linalg.norm(b - np.vdot(a, b) * a)))


def hull_distance_from_origin(eigs: np.ndarray) -> float:
    """Distance from 0 to the convex hull of points on the unit circle."""
    ang = np.sort(np.mod(np.angle(eigs), 2 * np.pi))
    gaps = np.diff(np.concatenate([ang, ang[:1] + 2 * np.pi]))
    arc = 2 * np.pi - float(np.max(gaps))
    if arc >= np.pi:
        return 0.0
    return float(np.cos(arc / 2))


def unitary_diamond_distance(U: np.ndarray, V: np.ndarray) -> float:
    d0 = hull_distance_from_origin(np.linalg.eigvals(U.conj().T @ V))
    return float(np.clip(np.sqrt(max(0.0, 1.0 - d0**2)), 0.0, 1.0))


def diamond_distance(Q1: np.ndarray, Q2: np.ndarray, cap: int = DEFAULT_CAP) -> float:
    """Diamond distance between the unitary channels of two FLOs."""
    return unitary_diamond_distance(flo_unitary(Q1, cap), flo_unitary(Q2, cap))
