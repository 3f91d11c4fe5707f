"""One-body representations of fermionic linear optics.

Conventions
-----------
Majorana operators are ``g_j = a_j + a_j^dag`` and
``g_{j+n} = -i (a_j - a_j^dag)`` for ``j < n``. An active FLO is a real
orthogonal ``Q`` of size ``2n`` acting as ``Phi(Q)^dag g_p Phi(Q) = sum_q
Q[p, q] g_q``; a passive FLO is a unitary ``U`` of size ``n`` acting as
``Phi(U)^dag a_j Phi(U) = sum_k U[j, k] a_k``. Products compose in the
same order as the operators: ``Phi(Q) Phi(R)`` corresponds to ``Q @ R``.

Matrices are plain numpy arrays; the helpers ``check_orthogonal`` and
``check_unitary`` validate them where it matters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .matlin import TOL


def check_orthogonal(Q: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] % 2:
        raise ValueError("expected an even-dimensional square matrix")
    if np.max(np.abs(Q @ Q.T - np.eye(Q.shape[0]))) > tol:
        raise ValueError("matrix is not orthogonal")
    return Q


def check_unitary(U: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError("expected a square matrix")
    if np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) > tol:
        raise ValueError("matrix is not unitary")
    return U


def omega(n: int) -> np.ndarray:
    """Basis change from Majoranas to ladder operators, ``(a, a^dag) = Omega g / sqrt 2``."""
    I = np.eye(n)
    return np.block([[I, 1j * I], [I, -1j * I]]) / np.sqrt(2.0)


def embed_passive(U: np.ndarray) -> np.ndarray:
    """The orthogonal matrix ``[[Re U, -Im U], [Im U, Re U]]``."""
    U = np.asarray(U, dtype=complex)
    return np.block([[U.real, -U.imag], [U.imag, U.real]])


def is_passive(Q: np.ndarray, tol: float = 1e-8) -> bool:
    n = Q.shape[0] // 2
    J = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    return bool(np.max(np.abs(Q @ J - J @ Q)) <= tol)


def extract_passive(Q: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Inverse of :func:`embed_passive` on the symplectic-orthogonal subgroup."""
    Q = np.asarray(Q, dtype=float)
    if not is_passive(Q, tol):
        raise ValueError("Q does not commute with J, so it is not a passive FLO")
    n = Q.shape[0] // 2
    A, B, C, D = Q[:n, :n], Q[:n, n:], Q[n:, :n], Q[n:, n:]
    return 0.5 * (A + D) + 0.5j * (C - B)


def extend_modes(Q: np.ndarray, m: int) -> np.ndarray:
    """Act with ``Q`` on the first ``n`` of ``m`` modes and trivially on the rest."""
    n = Q.shape[0] // 2
    if m < n:
        raise ValueError("cannot shrink the mode count")
    idx = np.concatenate([np.arange(n), m + np.arange(n)])
    out = np.eye(2 * m, dtype=Q.dtype)
    out[np.ix_(idx, idx)] = Q
    return out


def direct_sum(Q1: np.ndarray, Q2: np.ndarray) -> np.ndarray:
    """``Q1`` on the first modes and ``Q2`` on the following ones."""
    n1, n2 = Q1.shape[0] // 2, Q2.shape[0] // 2
    m = n1 + n2
    out = np.zeros((2 * m, 2 * m))
    i1 = np.concatenate([np.arange(n1), m + np.arange(n1)])
    i2 = np.concatenate([n1 + np.arange(n2), m + n1 + np.arange(n2)])
    out[np.ix_(i1, i1)] = Q1
    out[np.ix_(i2, i2)] = Q2
    return out


def permutation_majorana(perm: np.ndarray) -> np.ndarray:
    """Orthogonal matrix sending ``g_p`` to ``g_{perm[p]}``."""
    perm = np.asarray(perm)
    P = np.zeros((perm.size, perm.size))
    P[np.arange(perm.size), perm] = 1.0
    return P


@dataclass(frozen=True)
class BogoliubovForm:
    """Ladder-basis form: ``Phi(Z)^dag a Phi(Z) = alpha a + conj(beta) a^dag``."""

    alpha: np.ndarray
    beta: np.ndarray

    def block(self) -> np.ndarray:
        a, b = self.alpha, self.beta
        return np.block([[a, b.conj()], [b, a.conj()]])

    def to_orthogonal(self) -> np.ndarray:
        n = self.alpha.shape[0]
        Om = omega(n)
        return (Om.conj().T @ self.block() @ Om).real


def to_bogoliubov(Z: np.ndarray) -> BogoliubovForm:
    Z = np.asarray(Z, dtype=float)
    n = Z.shape[0] // 2
    Z11, Z12, Z21, Z22 = Z[:n, :n], Z[:n, n:], Z[n:, :n], Z[n:, n:]
    alpha = 0.5 * (Z11 + Z22 - 1j * (Z12 - Z21))
    beta = 0.5 * (Z11 - Z22 - 1j * (Z12 + Z21))
    return BogoliubovForm(alpha, beta)


class DegenerateAlignmentError(ValueError):
    """The block used for polar alignment is numerically singular."""


def passive_alignment(Q1: np.ndarray, Q2: np.ndarray) -> tuple[np.ndarray, float]:
    """Passive ``R`` bringing ``Q2 @ R`` close to ``Q1``.

    The top-left ladder block ``W11`` of ``Q1.T @ Q2`` is polar-decomposed as
    ``H Z``; ``R`` is the passive FLO of ``Z.T``. Returns ``(R, gap)`` with
    ``gap = ||Q1 - Q2 R||``.
    """
    Q1 = np.asarray(Q1, dtype=float)
    Q2 = np.asarray(Q2, dtype=float)
    if Q1.shape != Q2.shape:
        raise ValueError("size mismatch")
    n = Q1.shape[0] // 2
    M = Q1.T @ Q2
    A, B, C, D = M[:n, :n], M[:n, n:], M[n:, :n], M[n:, n:]
    W11 = 0.5 * ((A + D) + 1j * (B - C))
    X, s, Yh = np.linalg.svd(W11)
    if s[-1] < TOL.singular:
        raise DegenerateAlignmentError("W11 is singular; polar factor undefined")
    Zp = X @ Yh
    R = embed_passive(Zp.T)
    gap = float(np.linalg.norm(Q1 - Q2 @ R, 2))
    return R, gap


def dft_matrix(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be at least 1")
    j = np.arange(n)
    return np.exp(2j * np.pi * np.outer(j, j) / n) / np.sqrt(n)


# ---------------------------------------------------------------------------
# Gate compilation
# ---------------------------------------------------------------------------

GATE_KINDS = ("givens", "majorana", "phase", "reflection")


@dataclass(frozen=True)
class Gate:
    """One elementary FLO gate.

    * ``givens``: ``exp(-t (a_q^dag a_{q+1} - a_{q+1}^dag a_q))``, indices ``(q, q+1)``
    * ``majorana``: ``exp(-(t/2) g_p g_q)``, indices ``(p, q)``
    * ``phase``: ``exp(-i t a_q^dag a_q)``, indices ``(q,)``
    * ``reflection``: the Majorana ``g_0``, no angle
    """

    kind: str
    indices: tuple[int, ...]
    angle: float = 0.0

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "indices": list(self.indices), "angle": self.angle})

    @staticmethod
    def from_json(line: str) -> "Gate":
        d = json.loads(line)
        return Gate(d["kind"], tuple(int(i) for i in d["indices"]), float(d["angle"]))


def _rotation(d: int, p: int, q: int, theta: float) -> np.ndarray:
    G = np.eye(d)
    c, s = np.cos(theta), np.sin(theta)
    G[p, p] = c
    G[p, q] = -s
    G[q, p] = s
    G[q, q] = c
    return G


def gate_orthogonal(gate: Gate, n: int) -> np.ndarray:
    """One-body matrix of a gate on ``n`` modes."""
    d = 2 * n
    if gate.kind == "majorana":
        p, q = gate.indices
        return _rotation(d, p, q, gate.angle)
    if gate.kind == "givens":
        q, r = gate.indices
        return _rotation(d, q, r, gate.angle) @ _rotation(d, q + n, r + n, gate.angle)
    if gate.kind == "phase":
        (q,) = gate.indices
        return _rotation(d, q, q + n, -gate.angle)
    if gate.kind == "reflection":
        X = -np.eye(d)
        X[0, 0] = 1.0
        return X
    raise ValueError(f"unknown gate kind {gate.kind!r}")


@dataclass
class GateList:
    """Gates in application order; the first entry acts first."""

    n: int
    gates: list[Gate] = field(default_factory=list)

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates)

    def __len__(self) -> int:
        return len(self.gates)

    def orthogonal(self) -> np.ndarray:
        Q = np.eye(2 * self.n)
        for g in self.gates:
            Q = gate_orthogonal(g, self.n) @ Q
        return Q

    def counts(self) -> dict[str, int]:
        out = {k: 0 for k in GATE_KINDS}
        for g in self.gates:
            out[g.kind] += 1
        return out

    def to_jsonl(self) -> str:
        return "\n".join(g.to_json() for g in self.gates)

    @staticmethod
    def from_jsonl(n: int, text: str) -> "GateList":
        return GateList(n, [Gate.from_json(l) for l in text.splitlines() if l.strip()])


def _compile_special_orthogonal(Q: np.ndarray) -> list[Gate]:
    d = Q.shape[0]
    M = Q.copy()
    eliminations: list[tuple[int, int, float]] = []
    # Column-major Givens sweep; each step zeroes M[i, j] against row i-1.
    for j in range(d - 1):
        for i in range(d - 1, j, -1):
            x, y = M[i - 1, j], M[i, j]
            if abs(y) < 1e-15:
                continue
            theta = np.arctan2(y, x)
            G = _rotation(d, i - 1, i, -theta)
            M[[i - 1, i], :] = G[np.ix_([i - 1, i], [i - 1, i])] @ M[[i - 1, i], :]
            M[i, j] = 0.0
            eliminations.append((i - 1, i, theta))
    # Now G_L ... G_1 Q = D with D = diag(+-1) and an even number of -1.
    neg = [k for k in range(d) if M[k, k] < 0]
    gates = [Gate("majorana", (neg[k], neg[k + 1]), np.pi) for k in range(0, len(neg), 2)]
    # Q = G_1^T ... G_L^T D: D acts first, then G_L^T, ..., G_1^T.
    for p, q, theta in reversed(eliminations):
        gates.append(Gate("majorana", (p, q), theta))
    return gates


def _compile_unitary(U: np.ndarray) -> list[Gate]:
    n = U.shape[0]
    M = U.astype(complex).copy()
    steps: list[Gate] = []

    def act(gate: Gate, rows: list[int]) -> None:
        G = passive_gate_unitary(gate, n)[np.ix_(rows, rows)]
        M[rows, :] = G @ M[rows, :]
        steps.append(gate)

    for j in range(n - 1):
        for i in range(n - 1, j, -1):
            x, y = M[i - 1, j], M[i, j]
            if abs(y) < 1e-15:
                continue
            # Give row i the phase of row i-1 in column j, then rotate it away.
            act(Gate("phase", (i,), float(np.angle(y) - np.angle(x))), [i])
            act(Gate("givens", (i - 1, i), float(-np.arctan2(abs(y), abs(x)))), [i - 1, i])
            M[i, j] = 0.0
    for q in range(n):
        a = float(np.angle(M[q, q]))
        if abs(a) > 1e-15:
            act(Gate("phase", (q,), a), [q])
    # S_L ... S_1 U = I, hence U = S_1^-1 ... S_L^-1 with S_L^-1 acting first.
    return [Gate(g.kind, g.indices, -g.angle) for g in reversed(steps)]


def compile_to_gates(M: np.ndarray, passive: bool | None = None) -> GateList:
    """Decompose an FLO into elementary gates.

    A complex ``n x n`` input is treated as a passive unitary and compiled
    into Givens and phase gates. A real ``2n x 2n`` input is compiled into
    Majorana rotations; determinant ``-1`` adds one reflection at the end.
    """
    M = np.asarray(M)
    if passive is None:
        passive = np.iscomplexobj(M)
    if passive:
        U = check_unitary(M, tol=1e-8)
        return GateList(U.shape[0], _compile_unitary(U))
    Q = check_orthogonal(M, tol=1e-8)
    n = Q.shape[0] // 2
    if np.linalg.det(Q) < 0:
        X = gate_orthogonal(Gate("reflection", ()), n)
        gates = _compile_special_orthogonal(X @ Q)
        gates.append(Gate("reflection", ()))
        return GateList(n, gates)
    return GateList(n, _compile_special_orthogonal(Q))


def passive_gate_unitary(gate: Gate, n: int) -> np.ndarray:
    """``n x n`` one-body unitary of a passive gate (givens or phase)."""
    U = np.eye(n, dtype=complex)
    if gate.kind == "givens":
        q, r = gate.indices
        c, s = np.cos(gate.angle), np.sin(gate.angle)
        U[np.ix_([q, r], [q, r])] = [[c, -s], [s, c]]
    elif gate.kind == "phase":
        (q,) = gate.indices
        U[q, q] = np.exp(-1j * gate.angle)
    else:
        raise ValueError(f"{gate.kind} is not a passive gate")
    return U


def compose_passive(gates: Iterable[Gate], n: int) -> np.ndarray:
    U = np.eye(n, dtype=complex)
    for g in gates:
        U = passive_gate_unitary(g, n) @ U
    return U
