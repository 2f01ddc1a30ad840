"""Closed-form error bounds and Monte Carlo checks of the supporting lemmas.

Bound evaluators return a :class:`BoundReport` whose ``value`` is the bound on
``sin^2`` and whose ``terms`` break it into named pieces.  The absolute
constants ``C`` in these bounds are not known; they are parameters here
(default 1).

The Monte Carlo verifiers sample the operator product
``B_t = (I + eta_t A_t) ... (I + eta_1 A_1)`` explicitly (small ``d``, short
streams only) and compare an estimated expectation to a lemma's bound.  An
upper bound passes when ``estimate <= bound * (1 + 5 * se / estimate)`` and a
lower bound symmetrically, so sampling noise alone never fails a check.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (BadAlpha, DegenerateGap, HypothesisViolated, InsufficientSamples,
                     NonpositiveQ, SingularDenominator)
from .linalg import sym_eig_top2
from .rng import derive_trial_seed, make_rng, sample_rng

TINY = 1e-300
SLACK_SIGMAS = 5.0
MAX_PRODUCT_DIM = 16
MAX_PRODUCT_STEPS = 1000


@dataclass
class BoundReport:
    name: str
    value: float
    terms: dict = field(default_factory=dict)


def _gap_ok(gap):
    if not gap > 0:
        raise DegenerateGap(f"eigengap must be positive, got {gap!r}")


def _delta_ok(delta):
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")


def bernstein_wedin_bound(v, m, gap, d, delta, n):
    """Batch-method bound: ``16 V L / (gap^2 n) + (4 M L / gap)^2 / n^2`` with ``L = log(d/delta)``."""
    _gap_ok(gap)
    _delta_ok(delta)
    if n < 1:
        raise ValueError("n must be at least 1")
    log_term = math.log(d / delta)
    first = 16.0 * v * log_term / gap**2 / n
    second = (4.0 * m * log_term / gap) ** 2 / n**2
    return BoundReport("bernstein_wedin", first + second, {"first_order": first, "lower_order": second})


def thm41_bound(v, gap, d, alpha, beta, n, delta, C=1.0):
    """``C log(1/delta)/delta^2 * (d (beta/n)^(2 alpha) + alpha^2 V / ((2 alpha - 1) gap^2 n))``"""
    if not alpha > 0.5:
        raise BadAlpha(f"alpha must exceed 1/2, got {alpha!r}")
    _gap_ok(gap)
    _delta_ok(delta)
    if not n > beta:
        raise InsufficientSamples(f"need n > beta, got n = {n}, beta = {beta:.6g}")
    prefactor = C * math.log(1.0 / delta) / delta**2
    bias = d * (beta / n) ** (2.0 * alpha)
    variance = alpha**2 * v / ((2.0 * alpha - 1.0) * gap**2) / n
    return BoundReport("thm41", prefactor * (bias + variance),
                       {"prefactor": prefactor, "bias_term": bias, "variance_term": variance})


def thm12_bound(v, gap, d, beta, n, C=1.0):
    """``C (V log d / (gap^2 n) + (2 beta / n)^(2 log d))``"""
    _gap_ok(gap)
    ld = math.log(d)
    first = v * ld / gap**2 / n
    second = (2.0 * beta / n) ** (2.0 * ld)
    return BoundReport("thm12", C * (first + second), {"first_order": first, "lower_order": second, "C": C})


def thm13_bound(v, gap, n, C=1.0):
    """``C (V / (gap^2 n) + 1 / n^2)``"""
    _gap_ok(gap)
    first = v / gap**2 / n
    second = 1.0 / n**2
    return BoundReport("thm13", C * (first + second), {"first_order": first, "lower_order": second, "C": C})


def main1_bound(etas, lambda1, lambda2, v, v_bar, d, delta, C=1.0):
    """Convergence-rate bound for an arbitrary step sequence.

    ``(1/Q) exp(5 Vbar S2) (d exp(-2 gap S1) + V sum_i eta_i^2 exp(-2 gap sum_{j>i} eta_j))``
    with ``S1 = sum eta``, ``S2 = sum eta^2`` and
    ``Q = delta^2 / (C log(1/delta)) * (1 - sqrt((exp(18 Vbar S2) - 1) / delta))``.

    The step cap ``eta_i <= 1 / (4 max(M, lambda1))`` is the caller's job.
    Raises NonpositiveQ when ``Q <= 0`` (the bound says nothing).
    """
    etas = np.asarray(etas, dtype=np.float64)
    gap = lambda1 - lambda2
    _gap_ok(gap)
    _delta_ok(delta)
    s1 = float(np.sum(etas))
    s2 = float(np.sum(etas**2))
    growth = math.expm1(18.0 * v_bar * s2)
    q = delta**2 / (C * math.log(1.0 / delta)) * (1.0 - math.sqrt(growth / delta))
    if not q > 0:
        raise NonpositiveQ(f"exp(18 Vbar sum eta^2) - 1 = {growth:.4g} >= delta = {delta}")
    # suffix[i] = sum_{j > i} eta_j
    suffix = s1 - np.cumsum(etas)
    inner = float(np.sum(etas**2 * np.exp(-2.0 * gap * suffix)))
    bias = d * math.exp(-2.0 * gap * s1)
    variance = v * inner
    inflation = math.exp(5.0 * v_bar * s2)
    value = inflation * (bias + variance) / q
    return BoundReport("main1", value, {"Q": q, "inflation": inflation, "bias_term": bias,
                                        "variance_term": variance, "sum_eta": s1, "sum_eta_sq": s2})


# --------------------------------------------------------------------------
# Monte Carlo verifiers
# --------------------------------------------------------------------------


@dataclass
class McVerdict:
    name: str
    estimate: float
    bound: float
    trials: int
    std_error: float
    passed: bool
    side: str = "upper"
    extra: dict = field(default_factory=dict)


def _verdict(name, estimate, bound, trials, se, side, **extra):
    rel = SLACK_SIGMAS * se / max(abs(estimate), TINY)
    if side == "upper":
        ok = estimate <= bound * (1.0 + rel)
    else:
        ok = estimate >= bound * (1.0 - rel)
    return McVerdict(name, float(estimate), float(bound), trials, float(se), bool(ok), side, extra)


def _quantile_se(values, p):
    """Distribution-free standard error of an empirical quantile (order-statistic band)."""
    n = values.size
    s = math.sqrt(p * (1 - p) / n)
    lo, hi = np.quantile(values, [max(0.0, p - s), min(1.0, p + s)])
    return 0.5 * (hi - lo)


def mc_one_step_pm(b, v_tilde, delta, trials, seed, c_cal=64.0):
    """Check the one-step power-method tail bound for a fixed matrix ``b``.

    Draws ``w`` uniformly on the sphere, measures ``sin^2(v_tilde, B w / ||B w||)``
    and compares its empirical ``(1 - delta)``-quantile with
    ``c_cal log(1/delta)/delta * tr(Vperp^T B B^T Vperp) / (v^T B B^T v)``.
    ``extra["min_c_cal"]`` is the smallest calibration constant that passes.
    """
    if trials < 1000:
        raise ValueError("mc_one_step_pm needs at least 1000 trials")
    _delta_ok(delta)
    b = np.asarray(b, dtype=np.float64)
    v_tilde = np.asarray(v_tilde, dtype=np.float64)
    bt_v = b.T @ v_tilde
    denom = float(bt_v @ bt_v)
    if denom <= TINY:
        raise SingularDenominator("v^T B B^T v vanishes")
    ratio = max(0.0, float(np.sum(b * b)) - denom) / denom

    g = make_rng(seed).standard_normal((trials, b.shape[0]))
    y = g @ b.T
    along = y @ v_tilde
    perp = y - np.outer(along, v_tilde)
    norm_sq = np.einsum("ij,ij->i", y, y)
    sin2 = np.clip(np.einsum("ij,ij->i", perp, perp) / np.maximum(norm_sq, TINY), 0.0, 1.0)

    quant = float(np.quantile(sin2, 1.0 - delta))
    shape = math.log(1.0 / delta) / delta * ratio
    bound = c_cal * shape
    if quant == 0.0:
        min_c = 0.0
    else:
        min_c = quant / shape if shape > 0 else math.inf
    # tolerance covers rounding when B w is exactly parallel to v_tilde
    ok = quant <= bound * (1 + 1e-12) + 1e-15
    return McVerdict("one_step_pm", quant, bound, trials, _quantile_se(sin2, 1.0 - delta), ok, "upper",
                     {"delta": delta, "c_cal": c_cal, "min_c_cal": min_c, "trace_ratio": ratio})


def operator_products(dist, etas, trials, seed):
    """Sample ``trials`` independent products ``B_t``; returns an array ``(trials, d, d)``.

    Trial ``k`` uses the stream seeded by ``derive_trial_seed(seed, k)``.
    """
    etas = np.ascontiguousarray(etas, dtype=np.float64)
    d, t = dist.d, etas.size
    if d > MAX_PRODUCT_DIM or t > MAX_PRODUCT_STEPS:
        raise ValueError(f"explicit products limited to d <= {MAX_PRODUCT_DIM}, t <= {MAX_PRODUCT_STEPS}")
    out = np.empty((trials, d, d))
    for k in range(trials):
        b = np.eye(d)
        if t:
            stream = dist.stream(sample_rng(derive_trial_seed(seed, k)))
            batch = stream.next(t)
            if stream.kind == "basis":
                _kernels.product_basis(b, batch[0], batch[1], etas)
            elif stream.kind == "rank_one":
                _kernels.product_rank_one(b, batch, etas)
            else:
                _kernels.product_dense(b, np.ascontiguousarray(batch), etas)
        out[k] = b
    return out


def _mean_se(values):
    n = values.size
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return float(np.mean(values)), se


def _top_quadratic(products, v1):
    """Per-trial ``v1^T B B^T v1``."""
    u = np.einsum("tij,i->tj", products, v1)
    return np.einsum("tj,tj->t", u, u)


def mc_lemma51(dist, etas, trials, seed, products=None):
    """``||E[B_t B_t^T]||_2 <= exp(sum 2 eta lambda1 + eta^2 Vbar)``"""
    etas = np.asarray(etas, dtype=np.float64)
    if np.any(etas < 0):
        raise HypothesisViolated("step sizes must be nonnegative")
    truth, mb = dist.ground_truth(), dist.bounds()
    if products is None:
        products = operator_products(dist, etas, trials, seed)
    second = np.einsum("tij,tkj->ik", products, products) / products.shape[0]
    second = 0.5 * (second + second.T)
    top, _, vec = sym_eig_top2(second)
    _, se = _mean_se(_top_quadratic(products, vec))
    bound = math.exp(float(np.sum(2 * etas * truth.lambda1 + etas**2 * mb.v_bar)))
    return _verdict("lemma51", top, bound, products.shape[0], se, "upper")


def mc_lemma52(dist, etas, trials, seed, products=None):
    """``E tr(Vperp^T B B^T Vperp) <= exp(sum 2 eta lambda2 + eta^2 Vbar) (d + V sum_i eta_i^2 exp(sum_{j<=i} 2 eta_j gap))``"""
    etas = np.asarray(etas, dtype=np.float64)
    truth, mb = dist.ground_truth(), dist.bounds()
    if np.any(etas * truth.lambda1 > 1.0):
        raise HypothesisViolated("lemma needs eta_i <= 1/lambda1")
    if products is None:
        products = operator_products(dist, etas, trials, seed)
    frob = np.einsum("tij,tij->t", products, products)
    est, se = _mean_se(frob - _top_quadratic(products, truth.v1))
    growth = math.exp(float(np.sum(2 * etas * truth.lambda2 + etas**2 * mb.v_bar)))
    inner = float(np.sum(etas**2 * np.exp(np.cumsum(2 * etas * truth.gap))))
    bound = growth * (dist.d + mb.v_bound * inner)
    return _verdict("lemma52", est, bound, products.shape[0], se, "upper")


def _check_cap(etas, mb):
    cap = 1.0 / (4.0 * max(mb.m_bound, mb.lambda1))
    if np.any(etas > cap * (1 + 1e-12)):
        raise HypothesisViolated(f"lemma needs eta_i <= 1/(4 max(M, lambda1)) = {cap:.6g}")


def mc_lemma53(dist, etas, trials, seed, products=None):
    """``E[v1^T B B^T v1] >= exp(lambda1 sum eta)`` under the step cap."""
    etas = np.asarray(etas, dtype=np.float64)
    truth, mb = dist.ground_truth(), dist.bounds()
    _check_cap(etas, mb)
    if products is None:
        products = operator_products(dist, etas, trials, seed)
    est, se = _mean_se(_top_quadratic(products, truth.v1))
    bound = math.exp(truth.lambda1 * float(np.sum(etas)))
    return _verdict("lemma53", est, bound, products.shape[0], se, "lower")


def mc_lemma54(dist, etas, trials, seed, products=None):
    """``E[(v1^T B B^T v1)^2] <= exp(sum 4 eta lambda1 + 10 eta^2 Vbar)`` under the step cap."""
    etas = np.asarray(etas, dtype=np.float64)
    truth, mb = dist.ground_truth(), dist.bounds()
    _check_cap(etas, mb)
    if products is None:
        products = operator_products(dist, etas, trials, seed)
    est, se = _mean_se(_top_quadratic(products, truth.v1) ** 2)
    bound = math.exp(float(np.sum(4 * etas * truth.lambda1 + 10 * etas**2 * mb.v_bar)))
    return _verdict("lemma54", est, bound, products.shape[0], se, "upper")
