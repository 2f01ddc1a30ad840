"""Geometric-median boosting turns a 3/4-reliable estimator into a near-certain one."""

import numpy as np

from ojastream import BasisSpike, boosted_estimate, oja_run, thm12_schedule

dist = BasisSpike(20, 0.5)
sched = thm12_schedule(dist.ground_truth(), dist.bounds())
n = 33_000

single = np.mean([oja_run(dist, sched, n, s).sin_sq_final <= 0.1 for s in range(200)])
boosted = np.mean([boosted_estimate(dist, sched, n, 11, 10_000 + m)[1] <= 0.1 for m in range(40)])
print(f"success at sin^2 <= 0.1: single run {single:.2f}, 11-copy median {boosted:.2f}")
