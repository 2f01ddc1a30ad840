"""Evaluate the batch, streaming and general-schedule error bounds across n."""

import math

from ojastream import (BasisSpike, beta_thm12, bernstein_wedin_bound, main1_bound, step_sizes,
                       thm12_schedule, thm41_bound)
from ojastream.errors import NonpositiveQ

dist = BasisSpike(10, 0.5)
gt, mb = dist.ground_truth(), dist.bounds()
alpha = math.log(10)
beta = beta_thm12(mb.m_bound, mb.v_bound, gt.lambda1, gt.gap, 10)
sched = thm12_schedule(gt, mb)
for k in (16, 18, 20):
    n = 2**k
    bw = bernstein_wedin_bound(mb.v_bound, mb.m_bound, gt.gap, 10, 0.25, n).value
    t41 = thm41_bound(mb.v_bound, gt.gap, 10, alpha, beta, n, 0.25).value
    try:
        m1 = f"{main1_bound(step_sizes(sched, n), gt.lambda1, gt.lambda2, mb.v_bound, mb.v_bar, 10, 0.25).value:.3g}"
    except NonpositiveQ:
        m1 = "vacuous"
    print(f"n = 2^{k}: batch {bw:.3g}, streaming {t41:.3g}, general schedule {m1}")
