"""Dense matrix kernels used throughout the package.

Everything here is a pure function of its inputs. Random draws take an
explicit :class:`numpy.random.Generator`; use :func:`rng_stream` to derive
reproducible generators from a ``(seed, index)`` pair.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

import numpy as np
import scipy.linalg as sla


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by the structural checks."""

    structure: float = 1e-10
    reconstruct: float = 1e-9
    unitary: float = 1e-9
    root_branch: float = 1e-6
    imag_residue: float = 1e-10
    singular: float = 1e-10


TOL = Tolerances()


def rng_stream(seed: int, index: int = 0, *more: int) -> np.random.Generator:
    """Independent generator for stream ``(index, *more)`` under master ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index), *map(int, more)]))


# ---------------------------------------------------------------------------
# Haar sampling
# ---------------------------------------------------------------------------


def haar_unitary(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-random unitary of shape ``(n, n)``, or a stack ``(size, n, n)``.

    Ginibre matrix, QR, then the columns are rephased by the phases of
    ``diag(R)`` so the distribution is exactly Haar.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    shape = (n, n) if size is None else (size, n, n)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return q * ph[..., None, :]


def haar_special_orthogonal(
    d: int, rng: np.random.Generator, size: int | None = None
) -> np.ndarray:
    """Haar-random element of SO(d) (``d`` even), optionally a stack of them."""
    if d < 2 or d % 2:
        raise ValueError("dimension must be even and at least 2")
    shape = (d, d) if size is None else (size, d, d)
    z = rng.standard_normal(shape)
    q, r = np.linalg.qr(z)
    sgn = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    sgn[sgn == 0] = 1.0
    q = q * sgn[..., None, :]
    det = np.linalg.det(q)
    q[..., :, -1] *= np.where(det < 0, -1.0, 1.0)[..., None]
    return q


# ---------------------------------------------------------------------------
# Skew-symmetric normal form
# ---------------------------------------------------------------------------


def block_form(lam: np.ndarray) -> np.ndarray:
    """``[[0, diag(lam)], [-diag(lam), 0]]``."""
    lam = np.asarray(lam, dtype=float)
    n = lam.size
    out = np.zeros((2 * n, 2 * n))
    idx = np.arange(n)
    out[idx, idx + n] = lam
    out[idx + n, idx] = -lam
    return out


def vacuum_form(n: int) -> np.ndarray:
    """The matrix ``J = [[0, I], [-I, 0]]`` of size ``2n``."""
    return block_form(np.ones(n))


@dataclass(frozen=True)
class SkewNormalForm:
    """Factorization ``A = W @ block_form(lam) @ W.T`` of a real skew matrix."""

    W: np.ndarray
    lam: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.W @ block_form(self.lam) @ self.W.T


def skew_normal_form(A: np.ndarray) -> SkewNormalForm:
    """Normal form of a real skew-symmetric matrix.

    Built from the real Schur decomposition. Each 2x2 block is oriented so
    that its top-right entry is nonnegative, and the pairs are sorted so
    that ``lam`` is non-increasing. Zero eigenvalues that LAPACK returns as
    1x1 blocks are paired up in order of appearance.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    d = A.shape[0]
    if d % 2:
        raise ValueError("dimension must be even")
    scale = max(1.0, float(np.max(np.abs(A), initial=0.0)))
    if np.max(np.abs(A + A.T), initial=0.0) > TOL.structure * scale:
        raise ValueError("matrix is not skew-symmetric")
    A = 0.5 * (A - A.T)
    n = d // 2
    if not np.any(A):
        return SkewNormalForm(np.eye(d), np.zeros(n))

    T, Z = sla.schur(A, output="real")
    cut = TOL.structure * scale
    pairs: list[tuple[int, int]] = []
    singles: list[int] = []
    i = 0
    while i < d:
        if i + 1 < d and abs(T[i + 1, i]) > cut:
            pairs.append((i, i + 1))
            i += 2
        else:
            singles.append(i)
            i += 1
    pairs.extend(zip(singles[0::2], singles[1::2]))

    first = np.empty((d, n))
    second = np.empty((d, n))
    lam = np.empty(n)
    for k, (p, q) in enumerate(pairs):
        zp, zq = Z[:, p], Z[:, q]
        val = zp @ A @ zq
        if val < 0:
            zq = -zq
            val = -val
        first[:, k], second[:, k], lam[k] = zp, zq, val
    order = np.argsort(-lam, kind="stable")
    W = np.concatenate([first[:, order], second[:, order]], axis=1)
    return SkewNormalForm(W, lam[order])


# ---------------------------------------------------------------------------
# Rounding, roots, distances
# ---------------------------------------------------------------------------


def svd_round(A: np.ndarray, target: str = "unitary", k: int | None = None) -> np.ndarray:
    """Round ``A`` to the nearest matrix of a given structure.

    ``target`` is ``"unitary"``, ``"orthogonal"`` or ``"projector"``. The
    first two return the polar factor ``X @ Yh`` from ``A = X S Yh``. For
    ``"projector"`` the input must be Hermitian and the result is the
    projector onto its ``k`` leading eigenvectors.
    """
    A = np.asarray(A)
    if not np.all(np.isfinite(A)):
        raise ValueError("non-finite input")
    if target in ("unitary", "orthogonal"):
        X, _, Yh = np.linalg.svd(A)
        out = X @ Yh
        return out.real if target == "orthogonal" and not np.iscomplexobj(A) else out
    if target == "projector":
        if k is None or k < 0 or k > min(A.shape):
            raise ValueError("projector rank out of range")
        vecs = top_eigenvectors(A, k)
        return vecs @ vecs.conj().T
    raise ValueError(f"unknown rounding target {target!r}")


def top_eigenvectors(A: np.ndarray, k: int) -> np.ndarray:
    """Orthonormal eigenvectors of the ``k`` largest eigenvalues, largest first."""
    H = 0.5 * (A + A.conj().T)
    _, vecs = np.linalg.eigh(H)
    return vecs[:, ::-1][:, :k]


class RootBranchError(ValueError):
    """An eigenvalue sits on the branch cut of the principal root."""


def principal_root(W: np.ndarray, p: int) -> np.ndarray:
    """Principal ``p``-th root of a unitary or real orthogonal matrix.

    Eigenphases are divided by ``p``. Raises :class:`RootBranchError` when an
    eigenvalue lies within ``TOL.root_branch`` of ``-1``.
    """
    if p < 1:
        raise ValueError("p must be a positive integer")
    W = np.asarray(W)
    if p == 1:
        return W.copy()
    T, Z = sla.schur(W.astype(complex), output="complex")
    ev = np.diag(T)
    ang = np.angle(ev)
    if np.any(np.pi - np.abs(ang) < TOL.root_branch):
        raise RootBranchError("eigenvalue too close to -1 for a principal root")
    root = (Z * (np.abs(ev) ** (1.0 / p) * np.exp(1j * ang / p))) @ Z.conj().T
    if not np.iscomplexobj(W):
        if np.max(np.abs(root.imag)) > 1e3 * TOL.imag_residue:
            raise RootBranchError("real input produced a complex root")
        root = root.real
    return root


def _min_max_phase(phases: np.ndarray) -> tuple[float, float]:
    """Minimize ``max_k 2|sin((t + phi_k)/2)|`` over ``t``; returns (value, t)."""

    def f(t: np.ndarray) -> np.ndarray:
        t = np.atleast_1d(t)
        return np.max(2.0 * np.abs(np.sin(0.5 * (t[:, None] + phases[None, :]))), axis=1)

    grid = np.linspace(-np.pi, np.pi, 2048, endpoint=False)
    vals = f(grid)
    i = int(np.argmin(vals))
    h = grid[1] - grid[0]
    lo, hi = grid[i] - h, grid[i] + h
    g = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = hi - g * (hi - lo), lo + g * (hi - lo)
    fa, fb = f(a)[0], f(b)[0]
    for _ in range(80):
        if fa <= fb:
            hi, b, fb = b, a, fa
            a = hi - g * (hi - lo)
            fa = f(a)[0]
        else:
            lo, a, fa = a, b, fb
            b = lo + g * (hi - lo)
            fb = f(b)[0]
    t = 0.5 * (lo + hi)
    best = min((f(t)[0], t), (vals[i], grid[i]))
    return float(best[0]), float(np.angle(np.exp(1j * best[1])))


def phase_alignment(U: np.ndarray, V: np.ndarray) -> tuple[float, float]:
    """Return ``(min_t ||U - e^{it} V||, argmin t)``."""
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    if U.shape != V.shape:
        raise ValueError("size mismatch")
    for M in (U, V):
        if np.linalg.norm(M.conj().T @ M - np.eye(M.shape[0]), 2) > TOL.unitary * 10:
            raise ValueError("phase_distance expects unitary arguments")
    # ||U - e^{it}V|| = ||I - e^{it} U^dag V|| and U^dag V is normal.
    phases = np.angle(np.linalg.eigvals(U.conj().T @ V))
    return _min_max_phase(phases)


def phase_distance(U: np.ndarray, V: np.ndarray) -> float:
    """Projective distance ``min_t ||U - e^{it} V||`` in the operator norm."""
    return phase_alignment(U, V)[0]


def opnorm(A: np.ndarray) -> float:
    """Spectral norm."""
    return float(np.linalg.norm(A, 2))


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def matrix_to_json(A: np.ndarray) -> dict[str, Any]:
    """Encode as ``{rows, cols, real, imag}``; ``imag`` is left out for real input."""
    A = np.atleast_2d(np.asarray(A))
    out: dict[str, Any] = {
        "rows": int(A.shape[0]),
        "cols": int(A.shape[1]),
        "real": [float(x) for x in A.real.ravel()],
    }
    if np.iscomplexobj(A):
        out["imag"] = [float(x) for x in A.imag.ravel()]
    return out


def matrix_from_json(obj: dict[str, Any] | str) -> np.ndarray:
    if isinstance(obj, str):
        obj = json.loads(obj)
    rows, cols = int(obj["rows"]), int(obj["cols"])
    real = np.asarray(obj["real"], dtype=float)
    if real.size != rows * cols:
        raise ValueError("entry count does not match the stated shape")
    A = real.reshape(rows, cols)
    if "imag" in obj:
        A = A + 1j * np.asarray(obj["imag"], dtype=float).reshape(rows, cols)
    if not np.all(np.isfinite(A)):
        raise ValueError("non-finite entries")
    return A
