import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from flolearn.matlin import (
    RootBranchError,
    block_form,
    haar_special_orthogonal,
    haar_unitary,
    matrix_from_json,
    matrix_to_json,
    opnorm,
    phase_alignment,
    phase_distance,
    principal_root,
    rng_stream,
    skew_normal_form,
    svd_round,
    vacuum_form,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_skew(d, rng):
    A = rng.normal(size=(d, d))
    return A - A.T


def near_identity(n, size, rng):
    H = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    H = H + H.conj().T
    return expm(1j * H * (2 * math.asin(size / 2) / opnorm(H)))


class TestHaar:
    def test_single_mode_is_a_phase(self):
        U = haar_unitary(1, rng_stream(3))
        assert U.shape == (1, 1)
        assert abs(abs(U[0, 0]) - 1) < 1e-12

    @given(seeds, st.integers(1, 12))
    @settings(max_examples=40, deadline=None)
    def test_unitary(self, seed, n):
        U = haar_unitary(n, rng_stream(seed))
        assert opnorm(U.conj().T @ U - np.eye(n)) <= 1e-12

    def test_first_moment(self):
        # E|U_11|^2 = 1/n; the variance of |U_11|^2 is (n-1)/(n^2 (n+1))
        n, draws = 5, 100_000
        U = haar_unitary(n, rng_stream(0), size=draws)
        x = np.abs(U[:, 0, 0]) ** 2
        se = math.sqrt((n - 1) / (n**2 * (n + 1)) / draws)
        assert abs(x.mean() - 1 / n) <= 4 * se

    def test_so2_is_a_rotation(self):
        R = haar_special_orthogonal(2, rng_stream(1))
        c, s = R[0, 0], R[1, 0]
        assert np.allclose(R, [[c, -s], [s, c]], atol=1e-12)

    @given(seeds, st.integers(1, 10))
    @settings(max_examples=40, deadline=None)
    def test_special_orthogonal(self, seed, n):
        R = haar_special_orthogonal(2 * n, rng_stream(seed))
        assert abs(np.linalg.det(R) - 1) <= 1e-10
        assert opnorm(R.T @ R - np.eye(2 * n)) <= 1e-12

    def test_orthogonal_first_moment(self):
        d, draws = 6, 100_000
        R = haar_special_orthogonal(d, rng_stream(2), size=draws)
        x = R[:, 0, 0] ** 2
        # R_11^2 ~ Beta(1/2, (d-1)/2), variance 2(d-1)/(d^2 (d+2))
        se = math.sqrt(2 * (d - 1) / (d**2 * (d + 2)) / draws)
        assert abs(x.mean() - 1 / d) <= 4 * se

    def test_streams_are_reproducible(self):
        a = haar_unitary(4, rng_stream(7, 2, 5))
        b = haar_unitary(4, rng_stream(7, 2, 5))
        c = haar_unitary(4, rng_stream(7, 2, 6))
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestSkewNormalForm:
    def test_vacuum_form_is_already_normal(self):
        nf = skew_normal_form(vacuum_form(3))
        assert np.allclose(nf.lam, 1)
        assert np.allclose(nf.reconstruct(), vacuum_form(3), atol=1e-12)

    def test_zero(self):
        nf = skew_normal_form(np.zeros((4, 4)))
        assert np.allclose(nf.lam, 0)
        assert np.allclose(nf.W, np.eye(4))

    @pytest.mark.parametrize("n", [1, 2, 5, 12, 20])
    def test_reconstruction(self, n):
        for k in range(25):
            A = random_skew(2 * n, rng_stream(n, k))
            nf = skew_normal_form(A)
            assert opnorm(nf.reconstruct() - A) <= 1e-9 * max(1.0, opnorm(A))
            assert opnorm(nf.W.T @ nf.W - np.eye(2 * n)) <= 1e-10

    def test_convention(self):
        nf = skew_normal_form(random_skew(8, rng_stream(4)))
        assert np.all(nf.lam >= 0)
        assert np.all(np.diff(nf.lam) <= 1e-12)
        B = block_form(nf.lam)
        assert np.all(B[:4, 4:].diagonal() >= 0)


class TestSvdRound:
    def test_unitary_input_is_fixed(self):
        U = haar_unitary(4, rng_stream(0))
        assert opnorm(svd_round(U) - U) <= 1e-12

    def test_positive_diagonal_rounds_to_identity(self):
        assert np.allclose(svd_round(np.diag([2.0, 0.5]), "orthogonal"), np.eye(2))

    def test_projector_target(self):
        rng = rng_stream(1)
        for _ in range(50):
            v = haar_unitary(5, rng)[:, :1]
            P = v @ v.conj().T
            H = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
            A = P + 0.05 * (H + H.conj().T)
            assert opnorm(svd_round(A, "projector", 1) - P) <= 2 * opnorm(A - P) + 1e-12

    def test_unknown_target(self):
        with pytest.raises(ValueError):
            svd_round(np.eye(2), "banana")


class TestPrincipalRoot:
    def test_identity(self):
        for p in (1, 2, 7):
            assert np.allclose(principal_root(np.eye(3), p), np.eye(3))

    def test_scalar(self):
        w = principal_root(np.array([[cmath.exp(0.3j)]]), 4)
        assert abs(w[0, 0] - cmath.exp(0.075j)) <= 1e-12

    def test_power_recovers_input(self):
        for k in range(100):
            rng = rng_stream(10, k)
            W = near_identity(4, 0.3 * rng.random(), rng)
            for p in (2, 3, 8):
                R = principal_root(W, p)
                assert opnorm(np.linalg.matrix_power(R, p) - W) <= 1e-9

    def test_orthogonal_input_gives_real_root(self):
        A = random_skew(6, rng_stream(2))
        Q = expm(0.2 * A / opnorm(A))
        R = principal_root(Q, 4)
        assert not np.iscomplexobj(R)
        assert opnorm(np.linalg.matrix_power(R, 4) - Q) <= 1e-9

    def test_eigenvalue_at_minus_one_is_rejected(self):
        with pytest.raises(RootBranchError):
            principal_root(np.diag([1.0, -1.0]).astype(complex), 2)


class TestPhaseDistance:
    def test_global_phase_is_invisible(self):
        U = haar_unitary(4, rng_stream(5))
        assert phase_distance(U, np.exp(0.9j) * U) <= 1e-7

    def test_sign_flip(self):
        assert abs(phase_distance(np.eye(2), np.diag([1, -1])) - math.sqrt(2)) <= 1e-7

    @given(seeds, st.integers(1, 6), st.floats(-math.pi, math.pi))
    @settings(max_examples=40, deadline=None)
    def test_symmetric_and_below_operator_norm(self, seed, n, alpha):
        rng = rng_stream(seed)
        U, V = haar_unitary(n, rng), haar_unitary(n, rng)
        d = phase_distance(U, V)
        assert d <= opnorm(U - V) + 1e-9
        assert abs(d - phase_distance(V, U)) <= 1e-7
        assert abs(d - phase_distance(np.exp(1j * alpha) * U, V)) <= 1e-7

    def test_alignment_returns_minimizer(self):
        U = haar_unitary(3, rng_stream(6))
        d, t = phase_alignment(U, np.exp(-0.4j) * U)
        assert d <= 1e-7
        assert abs(cmath.exp(1j * t) - cmath.exp(0.4j)) <= 1e-6


class TestJson:
    @given(seeds, st.integers(1, 5), st.integers(1, 5), st.booleans())
    @settings(max_examples=30, deadline=None)
    def test_round_trip_is_exact(self, seed, r, c, cplx):
        rng = rng_stream(seed)
        A = rng.normal(size=(r, c)) + (1j * rng.normal(size=(r, c)) if cplx else 0)
        back = matrix_from_json(json.dumps(matrix_to_json(A)))
        assert np.array_equal(A, back)
        assert np.iscomplexobj(back) == cplx

    def test_real_matrix_has_no_imag_field(self):
        assert "imag" not in matrix_to_json(np.eye(2))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            matrix_from_json({"rows": 2, "cols": 2, "real": [1.0, 2.0, 3.0]})
