import numpy as np
import pytest

from flolearn.florep import embed_passive
from flolearn.learn import Access, FloBlackBox, MalformedExperiment
from flolearn.learn.active import active_sizes, active_tomo_base, choi_tomo_base
from flolearn.matlin import haar_special_orthogonal, haar_unitary, opnorm, rng_stream


def random_q(n, seed):
    return haar_special_orthogonal(2 * n, rng_stream(seed))


@pytest.mark.parametrize("n", [1, 2, 4])
def test_noiseless_active_learner(n):
    Q = random_q(n, n)
    box = FloBlackBox(Q, noiseless=True)
    res = active_tomo_base(Access(box), rng_stream(0), 0.1, 0.1, sizes=(10, 10, 10))
    assert opnorm(res.Q - Q) <= 1e-6


def test_passive_box_gives_passive_active_part():
    U = haar_unitary(3, rng_stream(1))
    box = FloBlackBox(embed_passive(U), noiseless=True)
    res = active_tomo_base(Access(box), rng_stream(2), 0.1, 0.1, sizes=(5, 5, 5))
    # the vacuum is unchanged, so the first stage can only see a passive rotation
    assert opnorm(res.Q_act @ embed_passive(res.passive.U) - embed_passive(U)) <= 1e-6


def test_active_ledger():
    n = 2
    box = FloBlackBox(random_q(n, 3))
    res = active_tomo_base(Access(box), rng_stream(4), 0.2, 0.1, sizes=(300, 100, 50))
    assert res.queries == 300 + 2 * n * 100 + 2 * 50
    assert box.ledger.total_queries == res.queries
    assert set(box.ledger.per_stage) == {"gauss", "stage2/phaseless", "stage2/phaseless_dft", "stage2/phase_x", "stage2/phase_y"}


def test_active_reaches_target():
    n, eps = 3, 0.25
    Q = random_q(n, 5)
    box = FloBlackBox(Q)
    res = active_tomo_base(Access(box), rng_stream(6), eps, 0.1)
    assert (res.n_act, res.n_pas, res.n_ph) == active_sizes(n, eps, 0.1)
    assert opnorm(res.Q - Q) <= eps


@pytest.mark.parametrize("n", [1, 3])
def test_noiseless_choi_learner(n):
    Q = random_q(n, 10 + n)
    box = FloBlackBox(Q, noiseless=True)
    box.grant_choi_register()
    res = choi_tomo_base(Access(box), rng_stream(7), 0.1, 0.1, N=10)
    assert opnorm(res.Q - Q) <= 1e-9
    assert box.ledger.total_queries == 10 and box.ledger.choi_resource


def test_choi_needs_the_register():
    box = FloBlackBox(random_q(2, 8))
    with pytest.raises(MalformedExperiment):
        choi_tomo_base(Access(box), rng_stream(9), 0.1, 0.1)


def test_choi_reaches_target():
    n, eps = 3, 0.25
    Q = random_q(n, 12)
    box = FloBlackBox(Q)
    box.grant_choi_register()
    res = choi_tomo_base(Access(box), rng_stream(13), eps, 0.1)
    assert opnorm(res.Q - Q) <= eps
