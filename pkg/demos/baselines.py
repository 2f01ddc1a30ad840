"""Compare Oja against the batch eigenvector and block power iteration at one n."""

import numpy as np

from ojastream import BasisSpike, batch_topvec, block_power, oja_run, thm12_schedule

dist = BasisSpike(10, 0.5)
sched = thm12_schedule(dist.ground_truth(), dist.bounds())
n = 2**16

oja = np.median([oja_run(dist, sched, n, s).sin_sq_final for s in range(10)])
batch = np.median([batch_topvec(dist, n, s)[1] for s in range(10)])
bp = np.median([block_power(dist, n, seed=s)[1] for s in range(10)])
print(f"median sin^2 at n = {n}: oja {oja:.3g}, batch {batch:.3g}, block power {bp:.3g}")
