"""Heisenberg-limited refinement: repeatedly learn ``(Q V^dag)^p`` and take a root.

A base learner maps ``(access, eps0, delta, rng, stage)`` to an estimate
of the one-body matrix of ``access``: an ``n x n`` unitary for passive
learners, a ``2n x 2n`` orthogonal matrix otherwise. :func:`bootstrap`
drives any of them; :func:`synthetic_base` is a stand-in whose error is
exactly controlled, for testing the schedule on its own.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla

from ..florep import extract_passive
from ..matlin import RootBranchError, opnorm, principal_root
from .active import active_tomo_base, choi_tomo_base
from .box import Access
from .calibration import CALIBRATED, Calibration
from .passive import passive_tomo_base

BaseLearner = Callable[[Access, float, float, np.random.Generator, str], np.ndarray]

EPS0_SAFE = 1 / 50
# Any eps0 below 1/(3 pi) works for a non-projective metric such as the operator norm.
EPS0_RELAXED = 0.1


class BootstrapDivergence(RuntimeError):
    """The powered estimate had an eigenvalue at -1, so the base learner missed its target."""


def iterations(eps: float) -> int:
    """``T = ceil(log2(1/eps))``, robust to ``1/eps`` being an exact power of two."""
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    T = math.ceil(math.log2(1 / eps) - 1e-12)
    return max(T, 0)


def schedule(eps: float, delta: float) -> list[tuple[int, int, float]]:
    """``(t, p_t, delta_t)`` for ``t = 0..T``."""
    T = iterations(eps)
    return [(t, 2**t, delta / 2 ** (T + 1 - t)) for t in range(T + 1)]


@dataclass
class BootstrapStep:
    t: int
    p: int
    delta: float
    base_queries: int
    cumulative_queries: int
    base_error: Optional[float] = None
    running_error: Optional[float] = None


@dataclass
class BootstrapResult:
    estimate: np.ndarray
    steps: list[BootstrapStep] = field(default_factory=list)

    def write_trace(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "p_t", "delta_t", "base_error", "running_error", "base_queries", "cumulative_queries"])
            for s in self.steps:
                w.writerow(
                    [
                        s.t,
                        s.p,
                        repr(s.delta),
                        "" if s.base_error is None else repr(s.base_error),
                        "" if s.running_error is None else repr(s.running_error),
                        s.base_queries,
                        s.cumulative_queries,
                    ]
                )

    def to_json(self) -> list[dict]:
        return [asdict(s) for s in self.steps]


def _dagger(V: np.ndarray) -> np.ndarray:
    return V.conj().T if np.iscomplexobj(V) else V.T


def _identity_like(access: Access, passive: bool) -> np.ndarray:
    n = access.n
    return np.eye(n, dtype=complex) if passive else np.eye(2 * n)


def bootstrap(
    base: BaseLearner,
    access: Access,
    eps: float,
    delta: float,
    rng: np.random.Generator,
    *,
    passive: bool,
    eps0: float = EPS0_SAFE,
    truth: Optional[np.ndarray] = None,
) -> BootstrapResult:
    """Refine ``base`` to error ``eps`` with about ``1/eps`` times its queries.

    ``passive`` selects the estimate type (unitary or orthogonal). When
    ``truth`` is supplied, each step logs the base and running errors; it
    never influences the estimate.
    """
    ledger = access.box.ledger
    start = ledger.total_queries
    V = _identity_like(access, passive)
    result = BootstrapResult(V)
    for t, p, delta_t in schedule(eps, delta):
        word = access.before(_dagger(V)).power(p)
        before = ledger.total_queries
        est = base(word, eps0, delta_t, rng, f"t{t}")
        step = BootstrapStep(t, p, delta_t, ledger.total_queries - before, ledger.total_queries - start)
        if truth is not None:
            target = np.linalg.matrix_power(truth @ _dagger(V), p)
            step.base_error = opnorm(est - target)
        try:
            root = principal_root(est, p)
        except RootBranchError as exc:
            raise BootstrapDivergence(f"step {t}: {exc}") from exc
        V = root @ V
        if truth is not None:
            step.running_error = opnorm(V - truth)
        result.steps.append(step)
    result.estimate = V
    return result


def passive_base(calibration: Calibration = CALIBRATED, mode: str = "diamond") -> BaseLearner:
    def run(access: Access, eps0: float, delta: float, rng: np.random.Generator, stage: str) -> np.ndarray:
        return passive_tomo_base(access, rng, eps0, delta, mode=mode, calibration=calibration, stage=stage).U

    return run


def active_base(calibration: Calibration = CALIBRATED) -> BaseLearner:
    def run(access: Access, eps0: float, delta: float, rng: np.random.Generator, stage: str) -> np.ndarray:
        return active_tomo_base(access, rng, eps0, delta, calibration=calibration, stage=stage).Q

    return run


def choi_base(calibration: Calibration = CALIBRATED) -> BaseLearner:
    def run(access: Access, eps0: float, delta: float, rng: np.random.Generator, stage: str) -> np.ndarray:
        return choi_tomo_base(access, rng, eps0, delta, calibration=calibration, stage=stage).Q

    return run


def synthetic_base(
    queries: Callable[[float], int], passive: bool, error: Optional[float] = None
) -> BaseLearner:
    """Base oracle returning the true word times a random rotation of norm ``error``.

    The rotation ``exp(K)`` has ``||exp(K) - I|| = error`` exactly (``eps0``
    when ``error`` is ``None``). The ledger is charged ``queries(delta)``
    runs of the word, as a real learner with that sample size would be.
    """

    def run(access: Access, eps0: float, delta: float, rng: np.random.Generator, stage: str) -> np.ndarray:
        size = error if error is not None else eps0
        target = access.truth()
        n = access.n
        if passive:
            H = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            K = 0.5j * (H + H.conj().T)
        else:
            A = rng.normal(size=(2 * n, 2 * n))
            K = 0.5 * (A - A.T)
        # ||exp(K) - I|| = 2 sin(r/2) where r is the spectral norm of K
        r = 2 * math.asin(min(size, 2.0) / 2)
        K = K * (r / opnorm(K))
        if passive:
            target = extract_passive(target)
        access.box.ledger.record(stage + "/synthetic", access.queries, queries(delta), 0, n)
        return target @ sla.expm(K)

    return run
