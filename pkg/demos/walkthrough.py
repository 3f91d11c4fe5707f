"""
A tour of the learners
======================

Hide a random FLO in a black box, learn it three ways, and compare the
bill. Everything is seeded, so the numbers below come out the same on
every run:

    python demos/walkthrough.py
"""

import numpy as np

from flolearn.florep import embed_passive
from flolearn.learn import Access, FloBlackBox
from flolearn.learn.active import active_tomo_base, choi_tomo_base
from flolearn.learn.bootstrap import EPS0_RELAXED, bootstrap, passive_base
from flolearn.learn.passive import passive_tomo_base
from flolearn.learn.report import orthogonal_errors, unitary_errors
from flolearn.matlin import haar_special_orthogonal, haar_unitary, rng_stream

rng = rng_stream(2024)
n, eps, delta = 4, 0.2, 0.2

# %% A passive (number-conserving) FLO. The learner sees only measurement records.
U = haar_unitary(n, rng)
box = FloBlackBox(embed_passive(U))
res = passive_tomo_base(Access(box), rng, eps, delta)
errs = unitary_errors(res.U, U)
print(f"passive n={n}: op error {errs['op_err']:.4f}, diamond {errs['diamond_err']:.4f}")
print(f"  queries by stage: {box.ledger.per_stage}")

# %% A general FLO, learned ancilla-free in two stages.
Q = haar_special_orthogonal(2 * n, rng)
box = FloBlackBox(Q)
res = active_tomo_base(Access(box), rng, eps, delta)
print(f"active n={n}: op error {orthogonal_errors(res.Q, Q)['op_err']:.4f}, queries {box.ledger.total_queries}")

# %% The same FLO, read off its Choi state. This needs n extra modes.
box = FloBlackBox(Q)
box.grant_choi_register()
res = choi_tomo_base(Access(box), rng, eps, delta)
print(f"choi n={n}: op error {orthogonal_errors(res.Q, Q)['op_err']:.4f}, queries {box.ledger.total_queries}")

# %% Bootstrapping: each halving of eps costs about twice the queries, not four times.
U = haar_unitary(3, rng)
previous = None
for target in (0.1, 0.05, 0.025):
    box = FloBlackBox(embed_passive(U))
    out = bootstrap(passive_base(), Access(box), target, delta, rng, passive=True, eps0=EPS0_RELAXED)
    q = box.ledger.total_queries
    ratio = "" if previous is None else f", x{q / previous:.2f}"
    print(f"bootstrap eps={target}: error {np.linalg.norm(out.estimate - U, 2):.5f}, queries {q}{ratio}")
    previous = q
