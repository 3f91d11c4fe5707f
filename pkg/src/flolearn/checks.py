"""Invariant suites run by ``flolearn verify`` and by the acceptance tests.

Each suite returns a list of :class:`CheckResult`. Suites are
deterministic: every random draw comes from ``rng_stream(seed, ...)``.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from . import florep, foracle, gsim, shadows
from .learn.active import active_tomo_base, choi_tomo_base
from .learn.bootstrap import bootstrap, synthetic_base
from .learn.box import Access, FloBlackBox
from .learn.passive import passive_tomo_base, phase_est
from .learn.state import covariance_source
from .matlin import (
    haar_special_orthogonal,
    haar_unitary,
    opnorm,
    phase_distance,
    principal_root,
    rng_stream,
    svd_round,
    vacuum_form,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _timed(name: str, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed check, reported with its message
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    return CheckResult(name, bool(ok), detail, time.perf_counter() - t0)


def random_orthogonal(n: int, rng: np.random.Generator, det: int = 1) -> np.ndarray:
    Q = haar_special_orthogonal(2 * n, rng)
    if det < 0:
        Q = Q @ np.diag([-1.0] + [1.0] * (2 * n - 1))
    return Q


def near_identity_unitary(n: int, size: float, rng: np.random.Generator) -> np.ndarray:
    """Random ``W`` with ``||W - I|| = size`` exactly."""
    H = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    H = 0.5 * (H + H.conj().T)
    r = 2 * math.asin(size / 2)
    return sla.expm(1j * H * (r / opnorm(H)))


def near_identity_orthogonal(n: int, size: float, rng: np.random.Generator) -> np.ndarray:
    A = rng.normal(size=(2 * n, 2 * n))
    A = 0.5 * (A - A.T)
    r = 2 * math.asin(size / 2)
    return sla.expm(A * (r / opnorm(A)))


# ---------------------------------------------------------------------------
# Exact identities
# ---------------------------------------------------------------------------


def check_e_squared(max_n: int = 12) -> tuple[bool, str]:
    count = 0
    for n in range(1, max_n + 1):
        for b in itertools.product((0, 1), repeat=n):
            b = np.array(b, dtype=np.int64)
            E = shadows.e_matrix(b)
            k = int(b.sum())
            rhs = (n + 1 - 2 * k) * E + k * (n + 1 - k) * np.eye(n, dtype=np.int64)
            if not np.array_equal(E @ E, rhs):
                return False, f"mismatch at n={n}, b={b.tolist()}"
            count += 1
    return True, f"{count} bitstrings, exact integer equality"


def check_t_map(seed: int = 0, cases: int = 30) -> tuple[bool, str]:
    worst = 0.0
    for i in range(cases):
        rng = rng_stream(seed, i)
        n = 1 + i % 5
        U = haar_unitary(n, rng)
        eta = int(rng.integers(0, n + 1))
        b = [1] * eta + [0] * (n - eta)
        s = gsim.apply_flo(gsim.fock_basis_state(b), florep.embed_passive(U))
        dense = foracle.gaussian_from_orthogonal(U, b)
        D = gsim.rdm_from_covariance(s)
        worst = max(worst, float(np.max(np.abs(D - foracle.rdm(dense)))))
        worst = max(worst, float(np.max(np.abs(gsim.covariance_from_rdm(D) - s.gamma))))
    return worst < 1e-10, f"max deviation {worst:.2e} over {cases} number-conserving states"


def check_choi_block(seed: int = 0, max_n: int = 6) -> tuple[bool, str]:
    worst = 0.0
    for n in range(1, max_n + 1):
        for det in (1, -1):
            Q = random_orthogonal(n, rng_stream(seed, n, det + 1), det)
            s = gsim.apply_flo(gsim.fepr_state(n), gsim.choi_system_embedding(Q))
            top_right = gsim.choi_blocks(s.gamma)[: 2 * n, 2 * n :]
            worst = max(worst, float(np.max(np.abs(top_right - Q @ gsim.choi_sign(n)))))
            worst = max(worst, float(np.max(np.abs(s.gamma - gsim.fepr_covariance_of(Q).gamma))))
    return worst < 1e-12, f"max deviation {worst:.2e}, n = 1..{max_n}, both determinants"


def check_bogoliubov(seed: int = 0, cases: int = 50) -> tuple[bool, str]:
    worst = 0.0
    for i in range(cases):
        n = 1 + i % 6
        Q = random_orthogonal(n, rng_stream(seed, i), 1 if i % 2 else -1)
        bog = florep.to_bogoliubov(Q)
        a, b = bog.alpha, bog.beta
        I = np.eye(n)
        rels = [
            a @ a.conj().T + b.conj() @ b.T - I,
            a @ b.conj().T + b.conj() @ a.T,
            bog.block().conj().T @ bog.block() - np.eye(2 * n),
            bog.to_orthogonal() - Q,
        ]
        worst = max(worst, max(float(np.max(np.abs(r))) for r in rels))
    return worst < 1e-12, f"max residual {worst:.2e} over {cases} random Q"


def check_wick(seed: int = 0, cases: int = 25) -> tuple[bool, str]:
    worst = 0.0
    for i in range(cases):
        rng = rng_stream(seed, i)
        n = 1 + i % 5
        Z = random_orthogonal(n, rng, 1 if i % 2 else -1)
        U = haar_unitary(n, rng)
        eta = int(rng.integers(0, n + 1))
        b = [1] * eta + [0] * (n - eta)
        D = gsim.rdm_from_covariance(gsim.apply_flo(gsim.fock_basis_state(b), florep.embed_passive(U)))
        dense = foracle.gaussian_from_orthogonal(Z @ florep.embed_passive(U), b)
        w1, w2 = foracle.number_moments_wick(Z, D)
        d1, d2 = foracle.number_moments(dense)
        worst = max(worst, abs(w1 - d1), abs(w2 - d2))
    return worst < 1e-8, f"max |Wick - dense| {worst:.2e}, n <= 5"


def exact_identities(seed: int = 0) -> list[CheckResult]:
    return [
        _timed("E(b)^2 identity, n <= 12", check_e_squared),
        _timed("covariance-to-RDM map vs dense RDM", lambda: check_t_map(seed)),
        _timed("Choi covariance block equals QS, n <= 6", lambda: check_choi_block(seed)),
        _timed("Bogoliubov unitarity relations", lambda: check_bogoliubov(seed)),
        _timed("Wick four-point sums vs dense <Num^2>", lambda: check_wick(seed)),
    ]


# ---------------------------------------------------------------------------
# Oracle equivalence
# ---------------------------------------------------------------------------


def check_gsim_vs_dense(seed: int = 1, cases: int = 200) -> tuple[bool, str]:
    worst = 0.0
    for i in range(cases):
        rng = rng_stream(seed, i)
        n = 1 + i % 6
        Q = random_orthogonal(n, rng, 1 if i % 2 else -1)
        b = rng.integers(0, 2, size=n).tolist()
        s = gsim.apply_flo(gsim.fock_basis_state(b), Q)
        dense = foracle.gaussian_from_orthogonal(Q, b)
        diffs = [
            gsim.fock_probabilities(s) - foracle.probabilities(dense),
            gsim.rdm_from_covariance(s) - foracle.rdm(dense),
            s.gamma - foracle.covariance(dense),
        ]
        worst = max(worst, max(float(np.max(np.abs(d))) for d in diffs))
    return worst < 1e-9, f"max deviation {worst:.2e} over {cases} states, n <= 6"


def check_compiled_gates(seed: int = 2, cases: int = 200, dense_cases: int = 40) -> tuple[bool, str]:
    worst = 0.0
    for i in range(cases):
        rng = rng_stream(seed, i)
        n = 1 + i % 6
        if i % 3 == 2:
            M = haar_unitary(n, rng)
            target = florep.embed_passive(M)
        else:
            M = target = random_orthogonal(n, rng, 1 if i % 3 else -1)
        gates = florep.compile_to_gates(M)
        worst = max(worst, float(np.max(np.abs(gates.orthogonal() - target))))
        if i < dense_cases and n <= 5:
            # Phi^dag g_p Phi = sum_q Q[p, q] g_q as operators on Fock space
            Uf = foracle.dense_unitary(gates)
            for p in range(2 * n):
                lhs = Uf.conj().T @ foracle.majorana_matrix(p, n) @ Uf
                rhs = sum(target[p, q] * foracle.majorana_matrix(q, n) for q in range(2 * n))
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst < 1e-8, f"max deviation {worst:.2e} over {cases} circuits ({dense_cases} checked on Fock space)"


def oracle_equivalence(seed: int = 0) -> list[CheckResult]:
    return [
        _timed("gsim probabilities, RDMs, covariances vs dense oracle", lambda: check_gsim_vs_dense(seed + 1)),
        _timed("compiled gate lists reproduce the one-body action", lambda: check_compiled_gates(seed + 2)),
    ]


# ---------------------------------------------------------------------------
# Inequalities
# ---------------------------------------------------------------------------


def check_alignment(seed: int = 3, cases: int = 500) -> tuple[bool, str]:
    worst = -np.inf
    for i in range(cases):
        rng = rng_stream(seed, i)
        n = 1 + i % 5
        Q1 = random_orthogonal(n, rng, 1 if i % 2 else -1)
        Q2 = Q1 @ near_identity_orthogonal(n, rng.uniform(0, 0.5), rng) @ florep.embed_passive(haar_unitary(n, rng))
        J = vacuum_form(n)
        _, gap = florep.passive_alignment(Q1, Q2)
        slack = gap - opnorm(Q1 @ J @ Q1.T - Q2 @ J @ Q2.T)
        worst = max(worst, slack)
    return worst <= 1e-10, f"max (gap - ||G1 - G2||) = {worst:.2e}"


def check_rounding(seed: int = 4, cases: int = 500) -> tuple[bool, str]:
    worst = -np.inf
    for i in range(cases):
        rng = rng_stream(seed, i)
        n = 2 + i % 5
        size = rng.uniform(0, 0.5)
        kind = i % 3
        if kind == 0:
            B = haar_unitary(n, rng)
            A = B + size * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / n
            A_star = svd_round(A, "unitary")
        elif kind == 1:
            B = haar_special_orthogonal(2 * (n // 2), rng)
            A = B + size * rng.normal(size=B.shape) / n
            A_star = svd_round(A, "orthogonal")
        else:
            k = int(rng.integers(1, n))
            V = haar_unitary(n, rng)[:, :k]
            B = V @ V.conj().T
            H = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            A = B + size * (H + H.conj().T) / (2 * n)
            A_star = svd_round(A, "projector", k)
        worst = max(worst, opnorm(A_star - B) - 2 * opnorm(A - B))
    return worst <= 1e-12, f"max (||A* - B|| - 2||A - B||) = {worst:.2e}"


def check_diamond_bound(seed: int = 5, cases: int = 500) -> tuple[bool, str]:
    worst = -np.inf
    for i in range(cases):
        rng = rng_stream(seed, i)
        n = 1 + i % 5
        Q = random_orthogonal(n, rng, 1 if i % 2 else -1)
        R = Q @ near_identity_orthogonal(n, rng.uniform(0, 0.6), rng)
        worst = max(worst, foracle.diamond_distance(Q, R) - n * opnorm(Q - R))
    return worst <= 1e-9, f"max (d - n||Q - R||) = {worst:.2e}"


def _random_sector_state(n: int, eta: int, rng: np.random.Generator) -> foracle.DenseState:
    bits, _ = foracle._tables(n)
    mask = bits.sum(axis=0) == eta
    amp = np.zeros(2**n, dtype=complex)
    amp[mask] = rng.normal(size=mask.sum()) + 1j * rng.normal(size=mask.sum())
    return foracle.DenseState(n, amp / np.linalg.norm(amp))


def check_sector_bound(seed: int = 6, cases: int = 500) -> tuple[bool, str]:
    worst = -np.inf
    for i in range(cases):
        rng = rng_stream(seed, i)
        n = 1 + i % 5
        eta = int(rng.integers(0, n + 1))
        U = haar_unitary(n, rng)
        V = U @ near_identity_unitary(n, rng.uniform(0, 0.5), rng) * np.exp(1j * rng.uniform(-np.pi, np.pi))
        psi = _random_sector_state(n, eta, rng)
        s1 = foracle.DenseState(n, foracle.flo_unitary(U) @ psi.amplitudes)
        s2 = foracle.DenseState(n, foracle.flo_unitary(V) @ psi.amplitudes)
        worst = max(worst, foracle.trace_distance(s1, s2) - eta * phase_distance(U, V))
    return worst <= 1e-9, f"max (trdist - eta phdist) = {worst:.2e}"


def check_moment_bounds(seed: int = 7, cases: int = 500) -> tuple[bool, str]:
    failures = 0
    for i in range(cases):
        rng = rng_stream(seed, i)
        n = 1 + i % 6
        Z = near_identity_orthogonal(n, rng.uniform(0, 0.3), rng)
        phi = rng.normal(size=n) + 1j * rng.normal(size=n)
        failures += not foracle.moment_bounds_check(Z, phi).holds
    return failures == 0, f"{cases - failures}/{cases} cases within both bounds"


def check_root_stability(seed: int = 8, cases: int = 500) -> tuple[bool, str]:
    worst = -np.inf
    for i in range(cases):
        rng = rng_stream(seed, i)
        n = 1 + i % 6
        U = near_identity_unitary(n, rng.uniform(0, 0.1), rng)
        V = near_identity_unitary(n, rng.uniform(0, 0.1), rng)
        for p in (2, 4, 8):
            gap = opnorm(principal_root(U, p) - principal_root(V, p))
            worst = max(worst, gap - (np.pi / p) * opnorm(U - V))
    return worst <= 1e-12, f"max (root gap - (pi/p)||U - V||) = {worst:.2e}"


def check_rdm_rotation(seed: int = 9, cases: int = 500) -> tuple[bool, str]:
    worst = -np.inf
    for i in range(cases):
        rng = rng_stream(seed, i)
        n = 1 + i % 6
        U = haar_unitary(n, rng)
        Z = near_identity_orthogonal(n, rng.uniform(0, 0.5), rng)
        j = int(rng.integers(0, n))
        b = [0] * n
        b[j] = 1
        s = gsim.apply_flo(gsim.fock_basis_state(b), Z @ florep.embed_passive(U))
        u = U[:, j]
        worst = max(worst, opnorm(gsim.rdm_from_covariance(s) - np.outer(u, u.conj())) - opnorm(Z - np.eye(2 * n)))
    return worst <= 1e-12, f"max (||D_j - u u^dag|| - ||Z - I||) = {worst:.2e}"


def inequality_suites(seed: int = 0) -> list[CheckResult]:
    return [
        _timed("passive alignment gap <= covariance distance", lambda: check_alignment(seed + 3)),
        _timed("SVD rounding at most doubles the error", lambda: check_rounding(seed + 4)),
        _timed("diamond distance <= n ||Q - R||, n <= 5", lambda: check_diamond_bound(seed + 5)),
        _timed("sector trace distance <= eta phdist, n <= 5", lambda: check_sector_bound(seed + 6)),
        _timed("number-moment bounds under Bogoliubov rotation", lambda: check_moment_bounds(seed + 7)),
        _timed("principal-root stability near identity", lambda: check_root_stability(seed + 8)),
        _timed("perturbed RDM within ||Z - I|| of the orbital projector", lambda: check_rdm_rotation(seed + 9)),
    ]


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------


def check_fixed_basis_enumeration(seed: int = 10, draws: int = 200) -> tuple[bool, str]:
    """Outcome-weighted averages of both estimators, enumerated exactly for each fixed rotation.

    For fixed ``V`` the exact mean of ``V^dag E(b) V`` has the closed form
    ``V^dag ((n + 1) diag(occ) - eta I) V`` with ``occ`` the rotated
    occupations; for fixed ``R`` the mean of the SO estimate keeps only the
    ``(j, j + n)`` entries of ``R G R^T``. Both are checked to 1e-9; the
    averages over Haar draws must approach ``D`` and ``G`` within a CLT band.
    """
    n, eta = 4, 2
    rng = rng_stream(seed, 0)
    U = haar_unitary(n, rng)
    b0 = [1] * eta + [0] * (n - eta)
    slater = gsim.apply_flo(gsim.fock_basis_state(b0), florep.embed_passive(U))
    D = gsim.rdm_from_covariance(slater)
    Q = random_orthogonal(n, rng)
    gauss = gsim.apply_flo(gsim.vacuum_state(n), Q)
    bits = gsim.all_bitstrings(n)
    worst = 0.0
    un_avg = np.zeros((n, n), dtype=complex)
    so_avg = np.zeros((2 * n, 2 * n))
    for k in range(draws):
        V = haar_unitary(n, rng)
        rotated = gsim.apply_flo(slater, florep.embed_passive(V))
        dense = foracle.DenseState(n, foracle.flo_unitary(V) @ foracle.gaussian_from_orthogonal(U, b0).amplitudes)
        probs = foracle.probabilities(dense)
        exact = sum(p * shadows.un_estimate(V, bits[i]) for i, p in enumerate(probs) if p > 0)
        occ = np.real(np.diag(gsim.rdm_from_covariance(rotated)))
        closed = V.conj().T @ ((n + 1) * np.diag(occ) - eta * np.eye(n)) @ V
        worst = max(worst, float(np.max(np.abs(exact - closed))))
        un_avg += exact / draws

        R = haar_special_orthogonal(2 * n, rng)
        rg = gsim.apply_flo(gauss, R)
        probs = gsim.fock_probabilities(rg)
        exact = sum(p * shadows.so_estimate(R, bits[i]) for i, p in enumerate(probs) if p > 0)
        keep = np.zeros((2 * n, 2 * n))
        idx = np.arange(n)
        keep[idx, idx + n] = rg.gamma[idx, idx + n]
        keep[idx + n, idx] = rg.gamma[idx + n, idx]
        closed = (2 * n - 1) * R.T @ keep @ R
        worst = max(worst, float(np.max(np.abs(exact - closed))))
        so_avg += exact / draws
    un_dev = opnorm(un_avg - D)
    so_dev = opnorm(so_avg - gauss.gamma)
    # Per-draw estimates have norm at most n and 2n - 1; 4/sqrt(draws) of that is a loose CLT band.
    band_un, band_so = 4 * n / math.sqrt(draws), 4 * (2 * n - 1) / math.sqrt(draws)
    ok = worst < 1e-9 and un_dev <= band_un and so_dev <= band_so
    return ok, (
        f"enumeration residual {worst:.2e}; Haar-averaged deviation {un_dev:.3f} (band {band_un:.2f}),"
        f" {so_dev:.3f} (band {band_so:.2f})"
    )


def _sampled_mean_un(seed: int, N: int) -> float:
    n, eta = 4, 2
    rng = rng_stream(seed, 0)
    U = haar_unitary(n, rng)
    b0 = [1] * eta + [0] * (n - eta)
    s = gsim.apply_flo(gsim.fock_basis_state(b0), florep.embed_passive(U))
    acc = shadows.collect_un_shadows(covariance_source(s.gamma), n, N, rng_stream(seed, 1))
    return opnorm(acc.mean() - gsim.rdm_from_covariance(s))


def _sampled_mean_so(seed: int, N: int) -> float:
    n = 4
    rng = rng_stream(seed, 0)
    s = gsim.apply_flo(gsim.vacuum_state(n), random_orthogonal(n, rng))
    acc = shadows.collect_so_shadows(covariance_source(s.gamma), n, N, rng_stream(seed, 1))
    return opnorm(acc.mean() - s.gamma)


def estimator_suites(seed: int = 0, N: int = 200_000) -> list[CheckResult]:
    def un() -> tuple[bool, str]:
        dev = _sampled_mean_un(seed + 11, N)
        return dev <= 0.06, f"||mean - D|| = {dev:.4f} with {N} samples (limit 0.06)"

    def so() -> tuple[bool, str]:
        dev = _sampled_mean_so(seed + 12, N)
        return dev <= 0.15, f"||mean - G|| = {dev:.4f} with {N} samples (limit 0.15)"

    return [
        _timed("U(n)-shadow mean on a 2-particle Slater state, n = 4", un),
        _timed("SO(2n)-shadow mean on a random Gaussian state, n = 4", so),
        _timed("fixed-rotation exact enumeration of both estimators", lambda: check_fixed_basis_enumeration(seed + 10)),
    ]


# ---------------------------------------------------------------------------
# Learner-level invariants
# ---------------------------------------------------------------------------


def check_phase_model(seed: int = 13, cases: int = 100) -> tuple[bool, str]:
    """Noiseless quadrature means match ``r cos``/``r sin`` of ``theta + arg [alpha W]_11``."""
    worst = 0.0
    for i in range(cases):
        rng = rng_stream(seed, i)
        n = 1 + i % 5
        theta = rng.uniform(-np.pi, np.pi)
        W = near_identity_unitary(n, rng.uniform(0, 0.5), rng)
        Z = near_identity_orthogonal(n, rng.uniform(0, 0.5), rng)
        box = FloBlackBox(Z @ florep.embed_passive(np.exp(1j * theta) * W), noiseless=True)
        est = phase_est(Access(box), 1, rng)
        w = (florep.to_bogoliubov(Z).alpha @ W)[0, 0]
        model = abs(w) * np.exp(1j * (theta + np.angle(w)))
        worst = max(worst, abs(est.m_x - model.real), abs(est.m_y - model.imag))
    return worst < 1e-8, f"max deviation {worst:.2e} over {cases} random (Z, W, theta)"


def check_ledger_exactness(seed: int = 14) -> tuple[bool, str]:
    rng = rng_stream(seed, 0)
    msgs = []
    ok = True
    n = 3
    U = haar_unitary(n, rng)
    box = FloBlackBox.passive(U, noiseless=True)
    res = passive_tomo_base(Access(box), rng, 0.2, 0.2)
    ok &= box.ledger.total_queries == 2 * n * res.n_phaseless + 2 * res.n_phase
    ok &= opnorm(res.U - U) <= 1e-6
    msgs.append(f"passive {box.ledger.total_queries}")
    Q = random_orthogonal(n, rng, -1)
    box = FloBlackBox(Q, noiseless=True)
    res = active_tomo_base(Access(box), rng, 0.2, 0.2)
    ok &= box.ledger.total_queries == res.n_act + 2 * n * res.n_pas + 2 * res.n_ph
    ok &= opnorm(res.Q - Q) <= 1e-6
    msgs.append(f"active {box.ledger.total_queries}")
    box = FloBlackBox(Q, noiseless=True)
    box.grant_choi_register()
    res = choi_tomo_base(Access(box), rng, 0.3, 0.2)
    ok &= box.ledger.total_queries == res.N and opnorm(res.Q - Q) <= 1e-9
    msgs.append(f"choi {box.ledger.total_queries}")
    box = FloBlackBox.passive(U)
    base_count = lambda d: math.ceil(100 * math.log(1 / d))
    out = bootstrap(synthetic_base(base_count, True), Access(box), 0.01, 0.1, rng, passive=True)
    predicted = sum(s.p * base_count(s.delta) for s in out.steps)
    ok &= box.ledger.total_queries == predicted == sum(box.ledger.per_stage.values())
    msgs.append(f"bootstrap {box.ledger.total_queries}")
    return bool(ok), "ledger equals closed form: " + ", ".join(msgs)


def check_perturbed_second_moment(seed: int = 15, n: int = 4, N: int = 20_000) -> tuple[bool, str]:
    """Empirical ``||E[X^2]||`` of U(n)-shadow estimates of a perturbed one-particle state."""
    parts = []
    ok = True
    for k, c in enumerate((0.1, 0.5, 0.9)):
        rng = rng_stream(seed, k)
        Z = near_identity_orthogonal(n, c / math.sqrt(n), rng)
        U = haar_unitary(n, rng)
        s = gsim.apply_flo(gsim.fock_basis_state([1] + [0] * (n - 1)), Z @ florep.embed_passive(U))
        acc = shadows.collect_un_shadows(covariance_source(s.gamma), n, N, rng, keep=True)
        second = sum(X @ X for X in (shadows.un_estimate(V, b) for V, b in acc.samples)) / N
        got, bound = opnorm(second), shadows.perturbed_variance_bound(n, c)
        ok &= got <= bound
        parts.append(f"c={c}: {got:.2f} <= {bound:.2f}")
    return bool(ok), "; ".join(parts)


def check_diamond_conversion(seed: int = 16, eps: float = 0.05) -> tuple[bool, str]:
    """Bootstrapping to ``eps/n`` (or ``eps/eta`` in a sector) certifies ``eps`` on Fock space."""
    worst = 0.0
    base_count = lambda d: 10
    for n in range(2, 6):
        rng = rng_stream(seed, n)
        Q = random_orthogonal(n, rng)
        out = bootstrap(synthetic_base(base_count, False), Access(FloBlackBox(Q)), eps / n, 0.1, rng, passive=False)
        worst = max(worst, foracle.diamond_distance(out.estimate, Q) / eps)

        U = haar_unitary(n, rng)
        eta = 1 + n // 2
        out = bootstrap(synthetic_base(base_count, True), Access(FloBlackBox.passive(U)), eps / eta, 0.1, rng, passive=True)
        psi = _random_sector_state(n, eta, rng)
        s1 = foracle.DenseState(n, foracle.flo_unitary(U) @ psi.amplitudes)
        s2 = foracle.DenseState(n, foracle.flo_unitary(out.estimate) @ psi.amplitudes)
        worst = max(worst, foracle.trace_distance(s1, s2) / eps)
    return worst <= 1.0, f"largest achieved distance is {worst:.3f} eps, n = 2..5"


def check_sample_sizes() -> tuple[bool, str]:
    got = (
        shadows.sample_size("slater_tomo", n=6, eta=2, eps=0.25, delta=0.1),
        shadows.sample_size("phase", eps=0.1, delta=0.05),
        shadows.sample_size("covariance", n=4, eps=0.5, delta=0.1),
    )
    return got == (88244, 4301, 2599), f"slater_tomo, phase, covariance = {got}"


def learner_invariants(seed: int = 0) -> list[CheckResult]:
    return [
        _timed("phase model under Bogoliubov perturbation", lambda: check_phase_model(seed + 13)),
        _timed("query ledgers equal their closed forms", lambda: check_ledger_exactness(seed + 14)),
        _timed("perturbed U(n)-shadow second moments within bound", lambda: check_perturbed_second_moment(seed + 15)),
        _timed("diamond and sector conversion of bootstrap targets", lambda: check_diamond_conversion(seed + 16)),
        _timed("sample-size calculator reference values", check_sample_sizes),
    ]


SUITES = {
    "exact": exact_identities,
    "oracle": oracle_equivalence,
    "inequalities": inequality_suites,
    "estimators": estimator_suites,
    "learners": learner_invariants,
}


def run_all(seed: int = 0, suites=None) -> list[CheckResult]:
    out: list[CheckResult] = []
    for name in suites or SUITES:
        out.extend(SUITES[name](seed))
    return out
