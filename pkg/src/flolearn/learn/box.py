"""Black-box access to an unknown FLO, with exact query accounting."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .. import florep, gsim
from ..florep import check_orthogonal


class _Query:
    """Placeholder for one invocation of the unknown unitary."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "QUERY"


QUERY = _Query()

Item = Union[_Query, np.ndarray]


@dataclass
class QueryLedger:
    """Tally of queries to the hidden FLO.

    ``total_queries`` always equals the sum of ``per_stage``. An experiment
    whose circuit contains ``p`` query items adds exactly ``p``.
    """

    total_queries: int = 0
    per_stage: dict[str, int] = field(default_factory=dict)
    experiments: int = 0
    gates_per_experiment_max: int = 0
    max_modes: int = 0
    choi_resource: bool = False

    def record(self, stage: str, queries: int, experiments: int, gates: int, modes: int) -> None:
        q = int(queries) * int(experiments)
        self.total_queries += q
        self.per_stage[stage] = self.per_stage.get(stage, 0) + q
        self.experiments += int(experiments)
        self.gates_per_experiment_max = max(self.gates_per_experiment_max, int(gates))
        self.max_modes = max(self.max_modes, int(modes))

    def snapshot(self) -> dict:
        return {
            "total_queries": self.total_queries,
            "per_stage": dict(self.per_stage),
            "experiments": self.experiments,
            "gates_per_experiment_max": self.gates_per_experiment_max,
            "max_modes": self.max_modes,
            "choi_resource": self.choi_resource,
        }


@dataclass
class ExperimentSpec:
    """One batch of prepare-apply-measure runs.

    ``items`` are applied in order to the Fock state ``initial``. Each item
    is ``QUERY`` or a known orthogonal matrix on all ``m`` modes; a stack
    of shape ``(shots, 2m, 2m)`` gives every shot its own matrix.
    ``measurement`` is ``"fock"``, ``"X"`` or ``"Y"``; the quadratures pair
    mode 0 with the last mode.
    """

    initial: Sequence[int]
    items: list
    measurement: str = "fock"
    shots: int = 1
    stage: str = "default"


class MalformedExperiment(ValueError):
    pass


def _gate_cap(m: int) -> int:
    return (2 * m) * (2 * m - 1) // 2 + m + 1


def quadrature_rotation(m: int, phi: float, j: int = 0, k: int | None = None) -> np.ndarray:
    """Orthogonal ``Z`` with ``Phi(Z)^dag a_j Phi(Z) = (a_j + e^{i phi} a_k^dag)/sqrt 2``.

    It also sends ``a_k`` to ``(a_k - e^{i phi} a_j^dag)/sqrt 2``, so reading
    ``n_j + n_k - 1`` after ``Phi(Z)`` measures the pair quadrature at angle
    ``phi``.
    """
    k = m - 1 if k is None else k
    alpha = np.eye(m, dtype=complex)
    beta_c = np.zeros((m, m), dtype=complex)
    r = 1 / np.sqrt(2)
    alpha[j, j] = alpha[k, k] = r
    beta_c[j, k] = r * np.exp(1j * phi)
    beta_c[k, j] = -r * np.exp(1j * phi)
    Z = florep.BogoliubovForm(alpha, beta_c.conj()).to_orthogonal()
    return Z


class FloBlackBox:
    """Sealed FLO that learners can only reach through experiments."""

    def __init__(
        self,
        Q: np.ndarray,
        ledger: QueryLedger | None = None,
        max_ancillas: int = 1,
        noiseless: bool = False,
    ):
        self._hidden = check_orthogonal(np.array(Q, dtype=float, copy=True), tol=1e-8)
        self.n = self._hidden.shape[0] // 2
        self.ledger = ledger if ledger is not None else QueryLedger()
        self.max_ancillas = max_ancillas
        self.noiseless = noiseless

    @classmethod
    def passive(cls, U: np.ndarray, **kw) -> "FloBlackBox":
        return cls(florep.embed_passive(U), **kw)

    def reveal(self) -> np.ndarray:
        """Ground truth; reserved for reporting and synthetic test harnesses."""
        return self._hidden.copy()

    def clone(self) -> "FloBlackBox":
        return FloBlackBox(self._hidden, copy.deepcopy(self.ledger), self.max_ancillas, self.noiseless)

    def grant_choi_register(self) -> None:
        """Allow ``n`` auxiliary modes (the resource model of the Choi learner)."""
        self.max_ancillas = max(self.max_ancillas, self.n)
        self.ledger.choi_resource = True

    def _evolve(self, spec: ExperimentSpec) -> tuple[np.ndarray, np.ndarray | None, int, int]:
        """Validate ``spec`` and fold its items into a covariance plus any per-shot stack."""
        m = len(spec.initial)
        if m < self.n or m - self.n > self.max_ancillas:
            raise MalformedExperiment(f"{m} modes is outside the allowed register size")
        if spec.measurement not in ("fock", "X", "Y"):
            raise MalformedExperiment(f"unknown measurement {spec.measurement!r}")
        if spec.measurement != "fock" and m < 2:
            raise MalformedExperiment("quadratures need two modes")
        K = int(spec.shots)
        if K < 1:
            raise MalformedExperiment("shots must be positive")
        hidden = florep.extend_modes(self._hidden, m)
        d = 2 * m

        gamma = gsim.fock_covariance(spec.initial)
        queries = 0
        gates = 0
        # Shared matrices act on gamma directly until the first per-shot stack.
        pending: np.ndarray | None = None
        for item in spec.items:
            if item is QUERY:
                M = hidden
                queries += 1
                gates += 1
            else:
                M = np.asarray(item, dtype=float)
                if M.shape[-2:] != (d, d):
                    raise MalformedExperiment("known FLO has the wrong size")
                gates += _gate_cap(m)
            if M.ndim == 3:
                if M.shape[0] != K:
                    raise MalformedExperiment("per-shot stack does not match shots")
                pending = M if pending is None else M @ pending
            elif pending is None:
                gamma = M @ gamma @ M.T
            else:
                pending = M @ pending
        if spec.measurement != "fock":
            phi = 0.0 if spec.measurement == "X" else np.pi / 2
            Z = quadrature_rotation(m, phi)
            pending = Z if pending is None else Z @ pending
            gates += _gate_cap(m)
        return gamma, pending, queries, gates

    def run_experiment(self, spec: ExperimentSpec, rng: np.random.Generator) -> np.ndarray:
        """Simulate ``spec`` and return outcomes.

        Fock readout gives an ``(shots, m)`` int8 array; quadrature readout
        gives ``(shots,)`` values in ``{-1, 0, 1}``.
        """
        gamma, pending, queries, gates = self._evolve(spec)
        K, d = int(spec.shots), gamma.shape[0]
        if pending is None:
            stack = np.broadcast_to(gamma, (K, d, d))
        elif pending.ndim == 2:
            stack = np.broadcast_to(pending @ gamma @ pending.T, (K, d, d))
        else:
            stack = pending @ gamma @ np.swapaxes(pending, 1, 2)
        bits = gsim.sample_fock_batch(stack, rng, check=False)
        self.ledger.record(spec.stage, queries, K, gates, d // 2)
        if spec.measurement == "fock":
            return bits
        return bits[:, 0].astype(np.int64) + bits[:, -1].astype(np.int64) - 1

    def exact_covariance(self, spec: ExperimentSpec) -> np.ndarray:
        """Covariance right before readout, charged as ``spec.shots`` runs.

        This is the infinite-sample stub used to check learners without
        statistical noise; it is refused unless the box was built with
        ``noiseless=True``. Per-shot stacks are not allowed.
        """
        if not self.noiseless:
            raise PermissionError("exact expectations need a box built with noiseless=True")
        gamma, pending, queries, gates = self._evolve(spec)
        if pending is not None:
            if pending.ndim == 3:
                raise MalformedExperiment("exact mode takes no per-shot rotations")
            gamma = pending @ gamma @ pending.T
        self.ledger.record(spec.stage, queries, int(spec.shots), gates, gamma.shape[0] // 2)
        return gamma


class Access:
    """A circuit word over the unknown FLO and known FLOs on the system modes.

    The word is stored in application order. ``Access(box)`` is a single
    query; :meth:`before`, :meth:`then` and :meth:`power` build composites
    such as ``(Phi(Q) Phi(V^dag))^p``.
    """

    def __init__(self, box: FloBlackBox, items: list | None = None):
        self.box = box
        self.items: list = [QUERY] if items is None else list(items)

    @property
    def n(self) -> int:
        return self.box.n

    @property
    def queries(self) -> int:
        return sum(1 for x in self.items if x is QUERY)

    @staticmethod
    def _as_orthogonal(M: np.ndarray) -> np.ndarray:
        M = np.asarray(M)
        return florep.embed_passive(M) if np.iscomplexobj(M) else M.astype(float)

    def before(self, M: np.ndarray) -> "Access":
        """Apply the known ``M`` (orthogonal, or unitary for passive) first."""
        return Access(self.box, [self._as_orthogonal(M)] + self.items)

    def then(self, M: np.ndarray) -> "Access":
        """Apply the known ``M`` after the current word."""
        return Access(self.box, self.items + [self._as_orthogonal(M)])

    def power(self, p: int) -> "Access":
        return Access(self.box, self.items * int(p))

    def run(
        self,
        initial: Sequence[int],
        rng: np.random.Generator,
        shots: int,
        prepare: np.ndarray | None = None,
        rotate: np.ndarray | None = None,
        measurement: str = "fock",
        stage: str = "default",
    ) -> np.ndarray:
        """Prepare ``initial``, apply ``prepare``, the word, then ``rotate``, and measure.

        ``prepare`` and ``rotate`` act on the full register (which may include
        ancillas); the word acts on the system modes.
        """
        spec = self.spec(initial, shots, prepare, rotate, measurement, stage)
        return self.box.run_experiment(spec, rng)

    def spec(
        self,
        initial: Sequence[int],
        shots: int,
        prepare: np.ndarray | None = None,
        rotate: np.ndarray | None = None,
        measurement: str = "fock",
        stage: str = "default",
    ) -> ExperimentSpec:
        m = len(initial)
        items: list = []
        if prepare is not None:
            items.append(prepare)
        for x in self.items:
            items.append(x if x is QUERY else florep.extend_modes(x, m))
        if rotate is not None:
            items.append(rotate)
        return ExperimentSpec(list(initial), items, measurement, shots, stage)

    def truth(self) -> np.ndarray:
        """One-body matrix of the word; for reports and synthetic harnesses only."""
        Q = self.box.reveal()
        out = np.eye(2 * self.n)
        for x in self.items:
            out = (Q if x is QUERY else x) @ out
        return out
