import math

import numpy as np
import pytest

from flolearn.florep import dft_matrix, embed_passive
from flolearn.learn import Access, FloBlackBox
from flolearn.learn.passive import (
    DegenerateInputError,
    column_phases,
    passive_sizes,
    passive_tomo_base,
    phase_est,
    phase_from_means,
)
from flolearn.matlin import haar_unitary, opnorm, phase_distance, rng_stream


def diag_phases(n, rng):
    return np.exp(1j * rng.uniform(-math.pi, math.pi, size=n))


def near_identity(n, size, rng):
    H = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    w, v = np.linalg.eigh(H + H.conj().T)
    w = w / np.max(np.abs(w)) * 2 * math.asin(size / 2)
    return (v * np.exp(1j * w)) @ v.conj().T


class TestColumnPhases:
    def test_exact_inputs(self):
        for k in range(50):
            rng = rng_stream(0, k)
            n = 1 + k % 7
            U = haar_unitary(n, rng)
            psi, phi = diag_phases(n, rng), diag_phases(n, rng)
            out = column_phases(U * psi, (U @ dft_matrix(n).conj().T) * phi)
            assert opnorm(out - psi[0] * U) <= 1e-10

    def test_perturbed_inputs(self):
        eps = 0.01
        for k in range(100):
            rng = rng_stream(1, k)
            n = 2 + k % 5
            U = haar_unitary(n, rng)
            psi, phi = diag_phases(n, rng), diag_phases(n, rng)
            V = (U * psi) @ near_identity(n, eps, rng)
            G = (U @ dft_matrix(n).conj().T * phi) @ near_identity(n, eps, rng)
            assert opnorm(column_phases(V, G) - psi[0] * U) <= 25 * eps

    def test_vanishing_reference(self):
        n = 3
        with pytest.raises(DegenerateInputError):
            column_phases(np.eye(n), np.zeros((n, n)))


def test_phase_from_means():
    assert phase_from_means(0.0, -1.0) == pytest.approx(-math.pi / 2)
    assert phase_from_means(1.0, 0.0) == 0.0
    assert phase_from_means(-1.0, 1e-300) == pytest.approx(math.pi)


def test_phase_of_a_scalar_box():
    theta = 0.7
    box = FloBlackBox(embed_passive(np.exp(1j * theta) * np.eye(2)), noiseless=True)
    est = phase_est(Access(box), 100, rng_stream(2))
    assert abs(est.theta - theta) <= 1e-12
    assert box.ledger.total_queries == 200


def test_phase_estimate_from_shots():
    theta = -0.3
    box = FloBlackBox(embed_passive(np.exp(1j * theta) * np.eye(3)))
    est = phase_est(Access(box), 20_000, rng_stream(3))
    assert abs(est.theta - theta) <= 0.05


@pytest.mark.parametrize("n", [1, 2, 5])
def test_noiseless_learner_is_exact(n):
    U = haar_unitary(n, rng_stream(4, n))
    box = FloBlackBox(embed_passive(U), noiseless=True)
    res = passive_tomo_base(Access(box), rng_stream(5), n_pas=10, n_ph=10)
    assert opnorm(res.U - U) <= 1e-6


def test_ledger_matches_the_sample_budget():
    n = 3
    box = FloBlackBox(embed_passive(haar_unitary(n, rng_stream(6))))
    res = passive_tomo_base(Access(box), rng_stream(7), n_pas=200, n_ph=300)
    assert res.queries == 2 * n * 200 + 2 * 300
    assert box.ledger.total_queries == res.queries
    assert box.ledger.max_modes == n + 1


def test_sector_mode_skips_the_ancilla():
    n = 3
    U = haar_unitary(n, rng_stream(8))
    box = FloBlackBox(embed_passive(U))
    eps = 0.25
    res = passive_tomo_base(Access(box), rng_stream(9), eps, 0.1, mode="sector")
    assert res.theta is None and res.n_phase == 0
    assert box.ledger.max_modes == n
    assert phase_distance(res.U, U) <= eps


def test_finite_samples_reach_target():
    n, eps = 3, 0.25
    U = haar_unitary(n, rng_stream(10))
    box = FloBlackBox(embed_passive(U))
    res = passive_tomo_base(Access(box), rng_stream(11), eps, 0.1)
    assert (res.n_phaseless, res.n_phase) == passive_sizes(n, eps, 0.1)
    assert opnorm(res.U - U) <= eps


def test_signature_checks():
    box = FloBlackBox(np.eye(4))
    with pytest.raises(ValueError):
        passive_tomo_base(Access(box), rng_stream(12))
    with pytest.raises(ValueError):
        passive_tomo_base(Access(box), rng_stream(12), 0.1, 0.1, mode="both")
