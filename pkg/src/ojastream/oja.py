"""Oja's algorithm for the top eigenvector, with the provable step-size schedules.

The update is ``w <- normalize(w + eta_i A_i w)`` starting from a uniformly
random unit vector.  Step sizes decay as ``eta_i = alpha / (gap * (beta + i))``
where ``beta`` comes from one of three closed forms (``beta_thm12``,
``beta_thm13``, ``beta_thm41``), or are held constant.  ``log`` is the natural
logarithm everywhere.

The runner keeps a single d-vector of state and pulls samples in fixed-size
chunks, so memory does not grow with ``n``.  Rank-one samples are applied as
``x (x^T w)`` and never expanded into a matrix.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import BadAlpha, DegenerateGap, ZeroVector
from .linalg import normalize, rayleigh, sin_sq, uniform_sphere
from .rng import init_rng, sample_rng

CHUNK = 4096


def _check_gap(gap):
    if not gap > 0:
        raise DegenerateGap(f"eigengap must be positive, got {gap!r}")


def beta_thm12(m, v, lambda1, gap, d):
    """``40 max(M log d / gap, (V + lambda1^2) log^2 d / gap^2)``"""
    _check_gap(gap)
    if d < 2:
        raise ValueError("need d >= 2")
    ld = math.log(d)
    return 40.0 * max(m * ld / gap, (v + lambda1**2) * ld**2 / gap**2)


def beta_thm13(m, v, lambda1, gap):
    """``720 max(M / gap, (V + lambda1^2) / gap^2)``"""
    _check_gap(gap)
    return 720.0 * max(m / gap, (v + lambda1**2) / gap**2)


def beta_thm41(m, v, lambda1, gap, alpha, delta):
    """``20 max(M alpha / gap, (V + lambda1^2) alpha^2 / (gap^2 log(1 + delta/100)))``"""
    _check_gap(gap)
    if not alpha > 0.5:
        raise BadAlpha(f"alpha must exceed 1/2, got {alpha!r}")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return 20.0 * max(m * alpha / gap, (v + lambda1**2) * alpha**2 / (gap**2 * math.log1p(delta / 100)))


@dataclass(frozen=True)
class Decaying:
    alpha: float
    beta: float
    gap: float

    def __post_init__(self):
        if not self.alpha > 0.5:
            raise BadAlpha(f"alpha must exceed 1/2, got {self.alpha!r}")
        _check_gap(self.gap)
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta!r}")

    def eta(self, i):
        return self.alpha / (self.gap * (self.beta + i))

    def etas(self, first, last):
        i = np.arange(first, last + 1, dtype=np.float64)
        return self.alpha / (self.gap * (self.beta + i))


@dataclass(frozen=True)
class Constant:
    eta_value: float

    def __post_init__(self):
        if not self.eta_value > 0:
            raise ValueError(f"constant step must be positive, got {self.eta_value!r}")

    def eta(self, i):
        return self.eta_value

    def etas(self, first, last):
        return np.full(last - first + 1, self.eta_value)


def eta(schedule, i):
    if i < 1:
        raise ValueError("step index starts at 1")
    return schedule.eta(i)


def step_sizes(schedule, n, cap=None):
    """``eta_1 .. eta_n`` as an array, optionally clipped to ``cap``."""
    out = schedule.etas(1, n)
    return out if cap is None else np.minimum(out, cap)


def step_cap(bounds):
    """``1 / (4 max(M, lambda1))``, the largest step the convergence analysis allows."""
    return 1.0 / (4.0 * max(bounds.m_bound, bounds.lambda1))


def thm12_schedule(truth, bounds):
    d = truth.d
    beta = beta_thm12(bounds.m_bound, bounds.v_bound, truth.lambda1, truth.gap, d)
    return Decaying(math.log(d), beta, truth.gap)


def thm13_schedule(truth, bounds):
    beta = beta_thm13(bounds.m_bound, bounds.v_bound, truth.lambda1, truth.gap)
    return Decaying(6.0, beta, truth.gap)


def thm41_schedule(truth, bounds, alpha, delta=0.25):
    beta = beta_thm41(bounds.m_bound, bounds.v_bound, truth.lambda1, truth.gap, alpha, delta)
    return Decaying(alpha, beta, truth.gap)


def check_thm13_samples(n, beta, d):
    """Warn when ``n <= beta^1.2 d^0.1``; the 720-constant guarantee assumes more samples."""
    need = beta**1.2 * d**0.1
    if n <= need:
        warnings.warn(f"n = {n} does not exceed beta^1.2 d^0.1 = {need:.4g}", RuntimeWarning, stacklevel=2)
        return False
    return True


def oja_step(w, a, eta_i):
    return normalize(w + eta_i * (a @ w))


@dataclass
class RunResult:
    w_final: np.ndarray
    sin_sq_final: float
    rayleigh_final: float
    n: int
    seed: int
    checkpoints: list = field(default_factory=list)


def _advance(kind, w, batch, etas):
    if kind == "basis":
        idx, scale = batch
        return _kernels.oja_basis(w, idx, scale, etas)
    if kind == "rank_one":
        return _kernels.oja_rank_one(w, batch, etas)
    return _kernels.oja_dense(w, batch, etas)


def oja_run(dist, schedule, n, seed, checkpoints=None, w0=None, chunk=CHUNK):
    """Run Oja's algorithm over ``n`` freshly drawn samples.

    ``checkpoints`` lists step counts at which ``sin^2(w_i, v1)`` is recorded;
    ``n`` itself is always recorded last.  ``w0`` overrides the random start
    (the sample stream is unaffected).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    grid = sorted(set(int(c) for c in (checkpoints or ())) | {n})
    if grid[0] < 1 or grid[-1] > n:
        raise ValueError("checkpoints must lie in [1, n]")
    truth = dist.ground_truth()
    d = dist.d
    if w0 is None:
        w = uniform_sphere(init_rng(seed), d)
    else:
        w = normalize(np.array(w0, dtype=np.float64))
    w = np.ascontiguousarray(w)
    stream = dist.stream(sample_rng(seed))
    if stream.kind == "dense":
        chunk = max(1, min(chunk, (1 << 20) // (d * d)))

    trail = []
    done = 0
    for stop in grid:
        while done < stop:
            size = min(chunk, stop - done)
            etas = schedule.etas(done + 1, done + size)
            bad = _advance(stream.kind, w, stream.next(size), etas)
            if bad >= 0:
                raise ZeroVector(f"iterate collapsed at step {done + bad + 1}; step size too large")
            done += size
        trail.append((stop, sin_sq(w, truth.v1)))
    return RunResult(w.copy(), trail[-1][1], rayleigh(w, truth.sigma), n, seed, trail)
