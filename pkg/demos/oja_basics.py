"""Oja's algorithm on a spiked basis distribution: error shrinks as n grows."""

import numpy as np

from ojastream import BasisSpike, oja_run, thm12_schedule
from ojastream.rng import derive_trial_seed

dist = BasisSpike(10, 0.5)
truth, bnd = dist.ground_truth(), dist.bounds()
sched = thm12_schedule(truth, bnd)
print(f"gap {truth.gap:.3f}, M {bnd.m_bound:.3f}, V {bnd.v_bound:.3f}, beta {sched.beta:.4g}")

for n in (2**12, 2**14, 2**16, 2**18):
    errs = [oja_run(dist, sched, n, derive_trial_seed(1, t)).sin_sq_final for t in range(20)]
    print(f"n = {n:>7}: median sin^2 = {np.median(errs):.3g}")
