"""Randomized-measurement estimators for 1-RDMs and covariance matrices.

Two protocols are supported:

* U(n) shadows: rotate by a Haar-random passive ``V``, read out ``b`` and
  form ``V^dag E(b) V`` with ``E(b) = (n + 1) diag(b) - |b| I``.
* SO(2n) shadows: rotate by a Haar-random ``R`` in SO(2n), read out ``b``
  and form ``(2n - 1) R^T J(b) R``.

Samples are streamed into :class:`MeanAccumulator` objects in chunks;
individual estimates are only kept on request.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .matlin import haar_special_orthogonal, haar_unitary, matrix_to_json

# A source turns a stack of one-body rotations (K, 2m, 2m) into K bitstrings.
Source = Callable[[np.ndarray, np.random.Generator], np.ndarray]

DEFAULT_CHUNK = 16384


def embed_passive_batch(V: np.ndarray) -> np.ndarray:
    """Stacked version of :func:`flolearn.florep.embed_passive`."""
    re, im = V.real, V.imag
    top = np.concatenate([re, -im], axis=-1)
    bot = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bot], axis=-2)


def e_matrix(b: np.ndarray) -> np.ndarray:
    b = np.asarray(b, dtype=np.int64)
    n = b.size
    return (n + 1) * np.diag(b) - int(b.sum()) * np.eye(n, dtype=np.int64)


def un_estimate(V: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Single U(n)-shadow estimate ``V^dag E(b) V``."""
    V = np.asarray(V, dtype=complex)
    return V.conj().T @ e_matrix(b) @ V


def so_estimate(R: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Single SO(2n)-shadow estimate ``(2n - 1) R^T J(b) R``."""
    b = np.asarray(b)
    n = b.size
    sgn = 1.0 - 2.0 * b
    Jb = np.zeros((2 * n, 2 * n))
    idx = np.arange(n)
    Jb[idx, idx + n] = sgn
    Jb[idx + n, idx] = -sgn
    return (2 * n - 1) * (R.T @ Jb @ R)


def un_estimate_sum(V: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sum of ``V_k^dag E(b_k) V_k`` over a stack."""
    n = V.shape[-1]
    b = np.asarray(b, dtype=float)
    weighted = (n + 1) * np.einsum("ki,kij,kil->jl", b, V.conj(), V)
    return weighted - b.sum() * np.eye(n)


def so_estimate_sum(R: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sum of ``(2n - 1) R_k^T J(b_k) R_k`` over a stack."""
    n = R.shape[-1] // 2
    sgn = 1.0 - 2.0 * np.asarray(b, dtype=float)
    top, bot = R[:, :n, :], R[:, n:, :]
    # R^T J(b) R = sum_i s_i (r_i r_{i+n}^T - r_{i+n} r_i^T) with r_i the rows of R
    M = np.einsum("ki,kip,kiq->pq", sgn, top, bot)
    return (2 * n - 1) * (M - M.T)


def _exact_sum(parts: list[np.ndarray]) -> np.ndarray:
    """Elementwise correctly rounded sum, so the result ignores the order of ``parts``."""
    stack = np.stack(parts).reshape(len(parts), -1)

    def fsum(cols: np.ndarray) -> np.ndarray:
        return np.array([math.fsum(c) for c in cols.T])

    out = fsum(stack.real)
    if np.iscomplexobj(stack):
        out = out + 1j * fsum(stack.imag)
    return out.reshape(parts[0].shape)


@dataclass
class MeanAccumulator:
    """Per-chunk partial sums and a sample count; mergeable.

    The total is an exactly rounded sum of the parts, so merging is
    associative and commutative bit for bit.
    """

    parts: list = field(default_factory=list, repr=False)
    count: int = 0
    samples: Optional[list] = field(default=None, repr=False)

    def add(self, batch_sum: np.ndarray, k: int) -> None:
        self.parts.append(np.array(batch_sum, copy=True))
        self.count += int(k)

    def merge(self, other: "MeanAccumulator") -> "MeanAccumulator":
        return MeanAccumulator(self.parts + other.parts, self.count + other.count)

    @property
    def total(self) -> Optional[np.ndarray]:
        return _exact_sum(self.parts) if self.parts else None

    def mean(self) -> np.ndarray:
        if not self.count:
            raise ValueError("no samples accumulated")
        return self.total / self.count


def samples_to_jsonl(samples) -> str:
    """Raw ``(V or R, b)`` samples as JSON lines ``{"rotation": ..., "b": [...]}``."""
    return "".join(
        json.dumps({"rotation": matrix_to_json(M), "b": [int(x) for x in b]}) + "\n" for M, b in samples
    )


def collect_un_shadows(
    source: Source,
    n: int,
    N: int,
    rng: np.random.Generator,
    chunk: int = DEFAULT_CHUNK,
    keep: bool = False,
) -> MeanAccumulator:
    """Stream ``N`` U(n)-shadow estimates from ``source`` into an accumulator."""
    acc = MeanAccumulator(samples=[] if keep else None)
    done = 0
    while done < N:
        k = min(chunk, N - done)
        V = haar_unitary(n, rng, size=k)
        b = source(embed_passive_batch(V), rng)
        acc.add(un_estimate_sum(V, b), k)
        if keep:
            acc.samples.extend(zip(V, b))
        done += k
    return acc


def collect_so_shadows(
    source: Source,
    n: int,
    N: int,
    rng: np.random.Generator,
    chunk: int = DEFAULT_CHUNK,
    keep: bool = False,
) -> MeanAccumulator:
    """Stream ``N`` SO(2n)-shadow estimates from ``source`` into an accumulator."""
    acc = MeanAccumulator(samples=[] if keep else None)
    done = 0
    while done < N:
        k = min(chunk, N - done)
        R = haar_special_orthogonal(2 * n, rng, size=k)
        b = source(R, rng)
        acc.add(so_estimate_sum(R, b), k)
        if keep:
            acc.samples.extend(zip(R, b))
        done += k
    return acc


# ---------------------------------------------------------------------------
# Sample sizes
# ---------------------------------------------------------------------------

PHASELESS_C = 5.6e6
ACTIVE_CONSTANTS = {"C1": 2.2e8, "C2": 3.3e8, "C3": 1000.0, "K": 12.0}


def _perturbed_constants(c: float) -> tuple[float, float]:
    C1 = 2.0 * (math.sqrt(2 + 7 * c**2 + c**4) + 1.0) + c**2
    C2 = 5.0 + 8.0 * c**2 + c**4
    return 2.0 * (C1 + 1.0 / 3.0), 2.0 * (C2 + 1.0 / 3.0)


def perturbed_variance_bound(n: int, c: float) -> float:
    """``C1 n + C2`` with the constants for a perturbation ``||Z - I|| <= c / sqrt(n)``."""
    C1 = 2.0 * (math.sqrt(2 + 7 * c**2 + c**4) + 1.0) + c**2
    C2 = 5.0 + 8.0 * c**2 + c**4
    return C1 * n + C2


def _raw_size(kind: str, p: dict) -> float:
    log = math.log
    n = p.get("n")
    eps = p.get("eps")
    delta = p.get("delta")
    if kind == "slater_rdm":
        return 12 * n * p["eta"] * log(2 * n / delta) / eps**2
    if kind == "slater_tomo":
        return 48 * n * p["eta"] ** 2 * log(2 * n / delta) / eps**2
    if kind == "single_particle":
        C = p.get("C", PHASELESS_C)
        return C * (11 * n + 5 * log(4 * n / delta)) / eps**2
    if kind == "covariance":
        return 8 * n**2 * log(4 * n / delta) / eps**2
    if kind == "gaussian_tomo":
        return 9 * n**3 * log(4 * n / delta) / eps**2
    if kind == "vacuum_stage":
        return 32 * n**2 * log(4 * n / delta) / eps**2
    if kind == "perturbed_rdm":
        C1p, C2p = _perturbed_constants(p.get("c", 0.5))
        return (C1p * n + C2p) * log(2 * n / delta) / eps**2
    if kind == "phase":
        return (6 + 4 * math.sqrt(2)) * log(2 / delta) / eps**2
    if kind == "phase_alg5":
        return 572 * log(8 / delta) / eps**2
    if kind == "choi":
        return 128 * n**2 * log(8 * n / delta) / eps**2
    if kind == "active_act":
        k = ACTIVE_CONSTANTS
        return k["C1"] * n**3 * log(k["K"] * n / delta) / eps**2
    if kind == "active_pas":
        k = ACTIVE_CONSTANTS
        return k["C2"] * n**2 * log(k["K"] * n**2 / delta) / eps**2
    if kind == "active_ph":
        k = ACTIVE_CONSTANTS
        return k["C3"] * log(k["K"] / delta) / eps**2
    raise ValueError(f"unknown sample-size kind {kind!r}")


SAMPLE_SIZE_KINDS = (
    "slater_rdm",
    "slater_tomo",
    "single_particle",
    "covariance",
    "gaussian_tomo",
    "vacuum_stage",
    "perturbed_rdm",
    "phase",
    "phase_alg5",
    "choi",
    "active_act",
    "active_pas",
    "active_ph",
)


def sample_size(kind: str, scale: float = 1.0, **params) -> int:
    """Number of copies prescribed by the named bound, times ``scale``.

    ``eps`` is always the accuracy and ``delta`` the failure probability.
    The ``phase`` kind reads its failure probability ``p'`` from ``delta``.
    ``active_act``, ``active_pas`` and ``active_ph`` are the three stage
    counts of the active learner; their sum (with ``active_pas`` counted
    ``2n`` times and ``active_ph`` twice) is available as ``active_base``.
    """
    for key in ("eps", "delta"):
        if key in params and not 0 < params[key] < 1:
            raise ValueError(f"{key} must lie in (0, 1)")
    for key in ("n", "eta"):
        if key in params and params[key] < 1:
            raise ValueError(f"{key} must be positive")
    if scale <= 0:
        raise ValueError("scale must be positive")
    if kind == "active_base":
        n = params["n"]
        return (
            sample_size("active_act", scale, **params)
            + 2 * n * sample_size("active_pas", scale, **params)
            + 2 * sample_size("active_ph", scale, **params)
        )
    return max(1, math.ceil(scale * _raw_size(kind, params)))
