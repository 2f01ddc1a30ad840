"""Seed derivation and per-trial generators.

Trials never share a generator.  Each trial gets a 64-bit seed mixed from the
master seed and its indices, and that seed keys a counter-based Philox
generator, so a trial's samples do not depend on which worker ran it or in
what order.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
N_INDEX_MUL = 0xBF58476D1CE4E5B9
# keeps the start-vector stream disjoint from the sample stream of the same seed
INIT_SALT = 0xD1B54A32D192ED03


def mix64(x):
    """SplitMix64 finalizer (a bijection on 64-bit integers)."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_trial_seed(master_seed, trial_index, n_index=0):
    x = (master_seed & MASK64) ^ ((trial_index * GOLDEN) & MASK64) ^ ((n_index * N_INDEX_MUL) & MASK64)
    return mix64(x)


def make_rng(seed):
    return np.random.Generator(np.random.Philox(seed & MASK64))


def sample_rng(seed):
    """Generator for the sample stream of a run."""
    return make_rng(seed)


def init_rng(seed):
    """Generator for the random start vector of a run."""
    return make_rng(mix64((seed & MASK64) ^ INIT_SALT))
