"""Single-pass streaming PCA with Oja's algorithm, baselines, bounds and Monte Carlo checks."""

from .baselines import batch_topvec, block_power
from .boost import align_signs, boosted_estimate, geometric_median
from .linalg import apply, jacobi_eigh, normalize, rayleigh, sin_sq, sym_eig_top2
from .model import (BasisSpike, BoundedFeature, GroundTruth, ModelBounds, Replay, bounds,
                    empirical_check, ground_truth, sample)
from .oja import (Constant, Decaying, RunResult, beta_thm12, beta_thm13, beta_thm41, eta, oja_run,
                  oja_step, step_cap, step_sizes, thm12_schedule, thm13_schedule, thm41_schedule)
from .replay import read_replay, write_replay
from .rng import derive_trial_seed, make_rng
from .theory import (bernstein_wedin_bound, main1_bound, mc_lemma51, mc_lemma52, mc_lemma53,
                     mc_lemma54, mc_one_step_pm, thm12_bound, thm13_bound, thm41_bound)

__version__ = "0.1.0"
