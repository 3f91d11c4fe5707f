import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flolearn import foracle, gsim
from flolearn.florep import embed_passive
from flolearn.gsim import (
    QuadraticObservable,
    append_vacuum_modes,
    apply_flo,
    choi_blocks,
    choi_sign,
    choi_system_embedding,
    covariance_from_rdm,
    fepr_covariance_of,
    fepr_preparation,
    fepr_state,
    fock_basis_state,
    fock_probabilities,
    measure_fock,
    quadratic_expectation,
    rdm_from_covariance,
    sample_fock_batch,
    t_map,
    vacuum_state,
)
from flolearn.learn.passive import pair_preparation
from flolearn.matlin import haar_special_orthogonal, haar_unitary, opnorm, rng_stream

bits = st.lists(st.integers(0, 1), min_size=1, max_size=8)


def random_state(n, rng):
    return apply_flo(vacuum_state(n), haar_special_orthogonal(2 * n, rng))


class TestConstruction:
    def test_single_mode_vacuum(self):
        assert np.array_equal(vacuum_state(1).gamma, [[0, 1], [-1, 0]])

    def test_vacuum_is_empty_and_pure(self):
        s = vacuum_state(5)
        assert np.allclose(rdm_from_covariance(s), 0)
        assert s.purity_residual() == 0

    @given(bits)
    def test_fock_rdm_is_diagonal(self, b):
        assert np.array_equal(rdm_from_covariance(fock_basis_state(b)), np.diag(b))

    def test_all_zero_bitstring_is_vacuum(self):
        assert np.array_equal(fock_basis_state([0, 0, 0]).gamma, vacuum_state(3).gamma)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            fock_basis_state([0, 2])
        with pytest.raises(ValueError):
            gsim.GaussianState(2, np.ones((4, 4)))

    def test_json_round_trip(self):
        s = random_state(3, rng_stream(0))
        assert np.array_equal(gsim.GaussianState.from_json(s.to_json()).gamma, s.gamma)


class TestEvolution:
    def test_identity(self):
        s = random_state(3, rng_stream(1))
        assert np.array_equal(apply_flo(s, np.eye(6)).gamma, s.gamma)

    def test_passive_keeps_vacuum(self):
        U = haar_unitary(4, rng_stream(2))
        assert opnorm(apply_flo(vacuum_state(4), embed_passive(U)).gamma - vacuum_state(4).gamma) <= 1e-12

    def test_purity_survives_long_chains(self):
        rng = rng_stream(3)
        s = vacuum_state(4)
        for _ in range(1000):
            s = apply_flo(s, haar_special_orthogonal(8, rng))
        assert s.purity_residual() <= 1e-8

    def test_append_vacuum_modes(self):
        assert np.array_equal(append_vacuum_modes(vacuum_state(2), 3).gamma, vacuum_state(5).gamma)
        s = random_state(3, rng_stream(4))
        big = append_vacuum_modes(s, 2)
        D = rdm_from_covariance(big)
        assert np.allclose(D[:3, :3], rdm_from_covariance(s))
        assert np.allclose(D[3:], 0) and np.allclose(D[:, 3:], 0)
        assert big.purity_residual() <= 1e-12


class TestSampling:
    def test_eigenstates_are_deterministic(self):
        rng = rng_stream(5)
        b = [1, 0, 1, 1, 0]
        for _ in range(20):
            assert measure_fock(vacuum_state(4), rng).tolist() == [0] * 4
            assert measure_fock(fock_basis_state(b), rng).tolist() == b

    def test_probabilities_match_dense_oracle(self):
        for k in range(200):
            rng = rng_stream(6, k)
            n = 1 + k % 6
            Q = haar_special_orthogonal(2 * n, rng)
            p = fock_probabilities(apply_flo(vacuum_state(n), Q))
            assert np.max(np.abs(p - foracle.probabilities(foracle.gaussian_from_orthogonal(Q)))) <= 1e-9

    @pytest.mark.parametrize("n", [3, 6])
    def test_empirical_distribution(self, n):
        rng = rng_stream(7, n)
        s = random_state(n, rng)
        out = sample_fock_batch(np.broadcast_to(s.gamma, (100_000, 2 * n, 2 * n)), rng)
        idx = out.astype(np.int64) @ (1 << np.arange(n - 1, -1, -1))
        emp = np.bincount(idx, minlength=2**n) / out.shape[0]
        tv = 0.5 * np.abs(emp - fock_probabilities(s)).sum()
        assert tv <= 0.02

    def test_slater_outcomes_conserve_particle_number(self):
        rng = rng_stream(8)
        U = haar_unitary(6, rng)
        s = apply_flo(fock_basis_state([1, 1, 0, 0, 0, 0]), embed_passive(U))
        out = sample_fock_batch(np.broadcast_to(s.gamma, (2000, 12, 12)), rng)
        assert np.all(out.sum(axis=1) == 2)


class TestRdm:
    def test_inverse_on_number_conserving_states(self):
        for k in range(50):
            rng = rng_stream(9, k)
            n = 1 + k % 6
            b = rng.integers(0, 2, size=n)
            s = apply_flo(fock_basis_state(b), embed_passive(haar_unitary(n, rng)))
            assert opnorm(covariance_from_rdm(rdm_from_covariance(s)) - s.gamma) <= 1e-10

    def test_t_map_is_a_contraction(self):
        for k in range(500):
            rng = rng_stream(10, k)
            n = 1 + k % 5
            X = rng.normal(size=(2 * n, 2 * n))
            assert opnorm(t_map(X)) <= opnorm(X) + 1e-12
        n = 3
        X = np.eye(2 * n)
        assert np.allclose(t_map(X), 1j * np.eye(n))


class TestQuadratic:
    def test_number_on_vacuum(self):
        assert quadratic_expectation(vacuum_state(3), QuadraticObservable.number(3, 1)) == 0

    def pair_state(self, n):
        # (|0..0> + |1..1>)/sqrt(2) on modes 0 and n-1
        return apply_flo(vacuum_state(n), pair_preparation(n))

    def test_pair_quadratures(self):
        s = self.pair_state(3)
        X = quadratic_expectation(s, QuadraticObservable.pair_quadrature(3, 0, 2, 0.0))
        Y = quadratic_expectation(s, QuadraticObservable.pair_quadrature(3, 0, 2, math.pi / 2))
        assert abs(X - 1) <= 1e-12 and abs(Y) <= 1e-12

    @pytest.mark.parametrize("theta", [math.pi / 3, -math.pi / 3])
    def test_global_phase_rotates_quadratures(self, theta):
        n = 3
        phase = np.eye(n, dtype=complex)
        phase[0, 0] = np.exp(1j * theta)  # e^{i theta} on the system mode, identity on the ancilla
        s = apply_flo(self.pair_state(n), embed_passive(phase))
        X = quadratic_expectation(s, QuadraticObservable.pair_quadrature(n, 0, n - 1, 0.0))
        Y = quadratic_expectation(s, QuadraticObservable.pair_quadrature(n, 0, n - 1, math.pi / 2))
        assert abs(X - math.cos(theta)) <= 1e-12 and abs(Y - math.sin(theta)) <= 1e-12

    def test_matches_dense_oracle(self):
        rng = rng_stream(11)
        Q = haar_special_orthogonal(6, rng)
        s = apply_flo(vacuum_state(3), Q)
        dense = foracle.gaussian_from_orthogonal(Q)
        x, y = foracle.pair_quadratures(dense, 0, 2)
        X = quadratic_expectation(s, QuadraticObservable.pair_quadrature(3, 0, 2, 0.0))
        Y = quadratic_expectation(s, QuadraticObservable.pair_quadrature(3, 0, 2, math.pi / 2))
        assert abs(X - x) <= 1e-10 and abs(Y - y) <= 1e-10


class TestFepr:
    def test_single_mode_block(self):
        g = fepr_state(1).gamma
        assert np.allclose(choi_blocks(g)[:2, 2:], np.diag([-1, 1]))
        assert np.array_equal(choi_sign(1), np.diag([-1.0, 1.0]))

    @pytest.mark.parametrize("n", range(1, 9))
    def test_even_parity(self, n):
        # the preparation circuit is a rotation, so the state keeps the vacuum's even parity
        assert abs(np.linalg.det(fepr_preparation(n)) - 1) <= 1e-10
        assert fepr_state(n).purity_residual() <= 1e-12

    @pytest.mark.parametrize("n", [1, 3, 5])
    def test_two_constructions_agree(self, n):
        Q = haar_special_orthogonal(2 * n, rng_stream(12, n))
        a = fepr_covariance_of(Q).gamma
        b = apply_flo(fepr_state(n), choi_system_embedding(Q)).gamma
        assert opnorm(a - b) <= 1e-10
