import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flolearn import gsim, shadows
from flolearn.florep import embed_passive
from flolearn.learn.state import covariance_source
from flolearn.matlin import haar_special_orthogonal, haar_unitary, opnorm, rng_stream
from flolearn.shadows import (
    MeanAccumulator,
    collect_so_shadows,
    collect_un_shadows,
    e_matrix,
    sample_size,
    so_estimate,
    so_estimate_sum,
    un_estimate,
    un_estimate_sum,
)

bitstrings = st.lists(st.integers(0, 1), min_size=1, max_size=12)


def test_un_estimate_examples():
    assert np.array_equal(un_estimate(np.eye(3), [1, 0, 0]), np.diag([3, -1, -1]))
    assert np.array_equal(un_estimate(np.eye(4), [0, 0, 0, 0]), np.zeros((4, 4)))


def test_so_estimate_examples():
    assert np.array_equal(so_estimate(np.eye(2), [0]), [[0, 1], [-1, 0]])
    assert np.array_equal(so_estimate(np.eye(2), [1]), [[0, -1], [1, 0]])


@given(bitstrings)
def test_e_squared_identity(b):
    n, k = len(b), sum(b)
    E = e_matrix(b)
    assert E.dtype.kind == "i"
    assert np.array_equal(E @ E, (n + 1 - 2 * k) * E + k * (n + 1 - k) * np.eye(n, dtype=np.int64))


@given(bitstrings, st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_estimate_norms(b, seed):
    n, k = len(b), sum(b)
    rng = rng_stream(seed)
    expected = {0: 0, n: 1}.get(k, max(n + 1 - k, k))  # only eigenvalues present count
    assert abs(opnorm(un_estimate(haar_unitary(n, rng), b)) - expected) <= 1e-9
    assert abs(opnorm(so_estimate(haar_special_orthogonal(2 * n, rng), b)) - (2 * n - 1)) <= 1e-9


def test_batched_sums_match_single_estimates():
    rng = rng_stream(1)
    n, K = 4, 30
    V = haar_unitary(n, rng, size=K)
    R = haar_special_orthogonal(2 * n, rng, size=K)
    b = rng.integers(0, 2, size=(K, n))
    assert np.allclose(un_estimate_sum(V, b), sum(un_estimate(V[k], b[k]) for k in range(K)))
    assert np.allclose(so_estimate_sum(R, b), sum(so_estimate(R[k], b[k]) for k in range(K)))


class TestAccumulator:
    def parts(self, seed, count):
        rng = rng_stream(seed)
        return [rng.normal(size=(3, 3)) * 10.0 ** rng.integers(-8, 8) for _ in range(count)]

    def test_merge_is_associative_bit_for_bit(self):
        a, b, c = (MeanAccumulator() for _ in range(3))
        for acc, seed in zip((a, b, c), (1, 2, 3)):
            for P in self.parts(seed, 5):
                acc.add(P, 7)
        left = a.merge(b).merge(c)
        right = a.merge(b.merge(c))
        assert np.array_equal(left.total, right.total)
        assert np.array_equal(left.mean(), c.merge(b).merge(a).mean())
        assert left.count == 105

    def test_merged_mean_is_count_weighted(self):
        n = 3
        s = gsim.apply_flo(gsim.vacuum_state(n), haar_special_orthogonal(2 * n, rng_stream(4)))
        a = collect_so_shadows(covariance_source(s.gamma), n, 3000, rng_stream(5), chunk=700)
        b = collect_so_shadows(covariance_source(s.gamma), n, 1000, rng_stream(6), chunk=700)
        merged = a.merge(b)
        assert merged.count == 4000
        assert np.allclose(merged.mean(), (3000 * a.mean() + 1000 * b.mean()) / 4000, atol=1e-14)

    def test_empty(self):
        with pytest.raises(ValueError):
            MeanAccumulator().mean()


def test_fixed_rotation_enumeration():
    """For a fixed V, the outcome-weighted estimate has a closed form; Haar averaging gives D."""
    n = 3
    rng = rng_stream(6)
    U = haar_unitary(n, rng)
    s = gsim.apply_flo(gsim.fock_basis_state([1, 0, 0]), embed_passive(U))
    outcomes = gsim.all_bitstrings(n)
    avg = np.zeros((n, n), dtype=complex)
    draws = 200
    for _ in range(draws):
        V = haar_unitary(n, rng)
        p = gsim.fock_probabilities(gsim.apply_flo(s, embed_passive(V)))
        exact = sum(pk * un_estimate(V, b) for pk, b in zip(p, outcomes))
        occ = np.array([p[(outcomes[:, j] == 1)].sum() for j in range(n)])
        assert opnorm(exact - V.conj().T @ ((n + 1) * np.diag(occ) - np.eye(n)) @ V) <= 1e-9
        avg += exact / draws
    # each exact term has norm at most n, so 4 n / sqrt(draws) is a generous CLT band
    assert opnorm(avg - gsim.rdm_from_covariance(s)) <= 4 * n / math.sqrt(draws)


def test_sample_means_converge():
    n = 4
    rng = rng_stream(7)
    s = gsim.apply_flo(gsim.fock_basis_state([1, 1, 0, 0]), embed_passive(haar_unitary(n, rng)))
    acc = collect_un_shadows(covariance_source(s.gamma), n, 50_000, rng)
    assert opnorm(acc.mean() - gsim.rdm_from_covariance(s)) <= 0.12


def test_raw_samples_dump():
    s = gsim.vacuum_state(2)
    acc = collect_un_shadows(covariance_source(s.gamma), 2, 3, rng_stream(8), keep=True)
    lines = shadows.samples_to_jsonl(acc.samples).splitlines()
    assert len(lines) == 3
    assert json.loads(lines[0])["b"] == [0, 0]


class TestSampleSize:
    def test_reference_values(self):
        assert sample_size("slater_tomo", n=6, eta=2, eps=0.25, delta=0.1) == 88244
        assert sample_size("phase", eps=0.1, delta=0.05) == 4301
        assert sample_size("covariance", n=4, eps=0.5, delta=0.1) == 2599

    def test_reference_values_from_formulas(self):
        assert sample_size("slater_tomo", n=6, eta=2, eps=0.25, delta=0.1) == math.ceil(48 * 6 * 4 * math.log(120) / 0.0625)
        assert sample_size("phase", eps=0.1, delta=0.05) == math.ceil((6 + 4 * math.sqrt(2)) * math.log(40) / 0.01)

    def test_scale_multiplies_before_rounding_up(self):
        raw = 128 * 9 * math.log(8 * 3 / 0.1) / 0.04
        assert sample_size("choi", n=3, eps=0.2, delta=0.1) == math.ceil(raw)
        assert sample_size("choi", 0.5, n=3, eps=0.2, delta=0.1) == math.ceil(0.5 * raw)

    @pytest.mark.parametrize("kind", shadows.SAMPLE_SIZE_KINDS)
    def test_every_kind_is_positive_and_monotone(self, kind):
        p = dict(n=3, eta=1, eps=0.2, delta=0.1)
        tighter = dict(p, eps=0.1)
        assert 0 < sample_size(kind, **p) <= sample_size(kind, **tighter)

    @pytest.mark.parametrize("bad", [dict(eps=0), dict(eps=1.5), dict(delta=1.0), dict(n=0)])
    def test_rejects_out_of_range(self, bad):
        with pytest.raises(ValueError):
            sample_size("covariance", **{**dict(n=3, eps=0.2, delta=0.1), **bad})

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            sample_size("nonsense", n=2, eps=0.1, delta=0.1)


def test_perturbed_variance_bound_grows_with_c():
    vals = [shadows.perturbed_variance_bound(4, c) for c in (0.0, 0.1, 0.5, 0.9)]
    assert vals == sorted(vals)
    assert abs(vals[0] - (2 * (math.sqrt(2) + 1) * 4 + 5)) <= 1e-12
