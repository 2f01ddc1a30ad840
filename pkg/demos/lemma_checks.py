"""Monte Carlo checks of the product-operator inequalities and the one-step power bound."""

import numpy as np

from ojastream import (BasisSpike, mc_lemma51, mc_lemma52, mc_lemma53, mc_lemma54, mc_one_step_pm,
                       step_cap, step_sizes, thm13_schedule)
from ojastream.theory import operator_products

dist = BasisSpike(8, 0.5)
bnd = dist.bounds()
etas = step_sizes(thm13_schedule(dist.ground_truth(), bnd), 500, cap=step_cap(bnd))
prods = operator_products(dist, etas, 2000, seed=3)
for check in (mc_lemma51, mc_lemma52, mc_lemma53, mc_lemma54):
    v = check(dist, etas, 2000, 3, products=prods)
    rel = "<=" if v.side == "upper" else ">="
    print(f"{v.name}: estimate {v.estimate:.4g} {rel} bound {v.bound:.4g}: {'pass' if v.passed else 'fail'}")

b = np.diag(np.r_[10.0, np.ones(7)])
for delta in (0.5, 0.25, 0.1):
    v = mc_one_step_pm(b, np.eye(8)[0], delta, 10_000, seed=3)
    print(f"one-step delta={delta}: quantile {v.estimate:.4g} vs bound {v.bound:.4g}, "
          f"min C_cal {v.extra['min_c_cal']:.3g}")
