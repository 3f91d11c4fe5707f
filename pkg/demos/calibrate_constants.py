"""
Calibrating the sample-size constants
=====================================

The proven sample sizes are safe but enormous: at n = 4 and eps = 0.2 the
passive learner would ask for about 3e14 copies per column. Every
statistical error in these learners shrinks like 1/sqrt(N), though, so a
short pilot run at a fixed N tells us how many copies a target accuracy
really needs. This script runs those pilots and prints one scale factor per
bound, the numbers stored in ``flolearn.learn.calibration.CALIBRATED``.

Run it with ``python demos/calibrate_constants.py`` (a few minutes on one
core). Pass ``--quick`` for a smaller sweep.
"""

import sys

import numpy as np

from flolearn import florep
from flolearn.learn.active import active_tomo_base, choi_tomo_base
from flolearn.learn.box import Access, FloBlackBox
from flolearn.learn.calibration import CALIBRATED, PAPER
from flolearn.learn.passive import passive_tomo_base
from flolearn.matlin import haar_special_orthogonal, haar_unitary, opnorm, phase_alignment, rng_stream

quick = "--quick" in sys.argv
trials = 12 if quick else 40
# The acceptance runs want 80% success; we size for the 95th percentile.
QUANTILE = 0.95


def scale_for(errors, n_pilot, target, proven):
    """Scale that turns ``proven`` into the copies needed to put the quantile at ``target``."""
    q = float(np.quantile(errors, QUANTILE))
    needed = n_pilot * (q / target) ** 2
    return needed / proven, q


# %%
# Passive learner, n = 4
# ----------------------
# Pilot with 8000 copies per column and 2000 shots per quadrature. We split
# the error budget evenly between the column step (measured by the
# projective distance of U*) and the U(1) phase.

n, eps, delta = 4, 0.2, 0.2
N_COL, N_PH = 8000, 2000
col_err, ph_err = [], []
for trial in range(trials):
    rng = rng_stream(101, trial)
    U = haar_unitary(n, rng)
    res = passive_tomo_base(Access(FloBlackBox.passive(U)), rng, n_pas=N_COL, n_ph=N_PH)
    dist, theta = phase_alignment(U, res.U_star)
    col_err.append(dist)
    ph_err.append(abs(np.exp(1j * res.theta) - np.exp(1j * theta)))

proven_col = PAPER.size("single_particle", n=n, eps=eps / 175, delta=delta / 4)
proven_ph = PAPER.size("phase_alg5", eps=eps, delta=delta)
s_col, q_col = scale_for(col_err, N_COL, eps / 2, proven_col)
s_ph, q_ph = scale_for(ph_err, N_PH, eps / 2, proven_ph)
print(f"passive columns: q95 error {q_col:.4f} at N={N_COL}; scale {s_col:.3g}")
print(f"passive phase:   q95 error {q_ph:.4f} at N={N_PH}; scale {s_ph:.3g}")

# %%
# Active learner, n = 3
# ---------------------
# Three error sources: the stage-1 Gaussian tomography (how far Q_act is
# from Q up to a passive factor), the stage-2 columns, and the phase. We
# give each a third of the budget.

n, eps = 3, 0.2
N_ACT, N_PAS, N_APH = 40000, 8000, 2000
act_err, pas_err, aph_err = [], [], []
for trial in range(trials):
    rng = rng_stream(202, trial)
    Q = haar_special_orthogonal(2 * n, rng)
    res = active_tomo_base(Access(FloBlackBox(Q)), rng, eps, delta, sizes=(N_ACT, N_PAS, N_APH))
    _, gap = florep.passive_alignment(Q, res.Q_act)
    act_err.append(gap)
    # U is the passive part that stage 2 is trying to learn
    U = florep.extract_passive(res.Q_act.T @ Q, tol=1.0)
    U = np.linalg.svd(U)[0] @ np.linalg.svd(U)[2]
    dist, theta = phase_alignment(U, res.passive.U_star)
    pas_err.append(dist)
    aph_err.append(abs(np.exp(1j * res.passive.theta) - np.exp(1j * theta)))

s_act, q_act = scale_for(act_err, N_ACT, eps / 3, PAPER.size("active_act", n=n, eps=eps, delta=delta))
s_pas, q_pas = scale_for(pas_err, N_PAS, eps / 3, PAPER.size("active_pas", n=n, eps=eps, delta=delta))
s_aph, q_aph = scale_for(aph_err, N_APH, eps / 3, PAPER.size("active_ph", n=n, eps=eps, delta=delta))
print(f"active stage 1:  q95 error {q_act:.4f} at N={N_ACT}; scale {s_act:.3g}")
print(f"active stage 2:  q95 error {q_pas:.4f} at N={N_PAS}; scale {s_pas:.3g}")
print(f"active phase:    q95 error {q_aph:.4f} at N={N_APH}; scale {s_aph:.3g}")

# %%
# Choi learner, n = 4
# -------------------

n, eps = 4, 0.3
N_CHOI = 20000
choi_err = []
for trial in range(trials):
    rng = rng_stream(303, trial)
    Q = haar_special_orthogonal(2 * n, rng)
    box = FloBlackBox(Q)
    box.grant_choi_register()
    res = choi_tomo_base(Access(box), rng, eps, delta, N=N_CHOI)
    choi_err.append(opnorm(res.Q - Q))
s_choi, q_choi = scale_for(choi_err, N_CHOI, eps, PAPER.size("choi", n=n, eps=eps, delta=delta))
print(f"choi:            q95 error {q_choi:.4f} at N={N_CHOI}; scale {s_choi:.3g}")

# %%
# Compare with the stored factors. Stored values are these estimates
# rounded up to one significant figure.

found = {
    "single_particle": s_col,
    "phase_alg5": s_ph,
    "active_act": s_act,
    "active_pas": s_pas,
    "active_ph": s_aph,
    "choi": s_choi,
}
print()
print(f"{'bound':<16} {'pilot':>10} {'stored':>10}")
for kind, value in found.items():
    print(f"{kind:<16} {value:>10.3g} {CALIBRATED.scales[kind]:>10.3g}")
