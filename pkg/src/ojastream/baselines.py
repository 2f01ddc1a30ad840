"""Reference estimators to compare Oja's algorithm against.

``batch_topvec`` keeps the full d x d empirical average (O(d^2) memory, on
purpose).  ``block_power`` splits the stream into equal blocks and runs one
power-iteration step per block with that block's average, in O(d) memory.
The constant-step Oja run (``oja.Constant``) stands in for Alecton.
"""

import math

import numpy as np

from . import _kernels
from .errors import EmptyBlock
from .linalg import normalize, sin_sq, sym_eig_top2, symmetrize, uniform_sphere
from .model import densify
from .oja import CHUNK
from .rng import init_rng, sample_rng


def _chunk_for(kind, d):
    return max(1, min(CHUNK, (1 << 20) // (d * d))) if kind == "dense" else CHUNK


def empirical_mean(dist, n, seed):
    """``(1/n) sum_i A_i`` over the first ``n`` samples of the stream for ``seed``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    d = dist.d
    stream = dist.stream(sample_rng(seed))
    total = np.zeros((d, d))
    step = _chunk_for(stream.kind, d)
    done = 0
    while done < n:
        size = min(step, n - done)
        batch = stream.next(size)
        if stream.kind == "rank_one":
            total += batch.T @ batch
        elif stream.kind == "basis":
            idx, scale = batch
            np.add.at(total, (idx, idx), scale**2)
        else:
            total += densify("dense", batch, d).sum(axis=0)
        done += size
    return total / n


def batch_topvec(dist, n, seed):
    """Top eigenvector of the symmetrized empirical average and its ``sin^2`` error."""
    sigma_hat = symmetrize(empirical_mean(dist, n, seed))
    _, _, w = sym_eig_top2(sigma_hat)
    return w, sin_sq(w, dist.ground_truth().v1)


def default_num_blocks(n):
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1


def block_power(dist, n, num_blocks=None, seed=0, w0=None):
    """One power step per block: ``w <- normalize(mean_{block}(A_i) w)``.

    Blocks have ``n // num_blocks`` samples; the remainder is never drawn.
    """
    if num_blocks is None:
        num_blocks = default_num_blocks(n)
    if num_blocks < 1 or n < num_blocks:
        raise EmptyBlock(f"cannot split n = {n} samples into {num_blocks} blocks")
    d = dist.d
    block = n // num_blocks
    w = uniform_sphere(init_rng(seed), d) if w0 is None else normalize(np.array(w0, dtype=np.float64))
    stream = dist.stream(sample_rng(seed))
    step = _chunk_for(stream.kind, d)
    for _ in range(num_blocks):
        acc = np.zeros(d)
        done = 0
        while done < block:
            size = min(step, block - done)
            batch = stream.next(size)
            if stream.kind == "basis":
                _kernels.power_accumulate_basis(acc, w, *batch)
            elif stream.kind == "rank_one":
                _kernels.power_accumulate_rank_one(acc, w, batch)
            else:
                _kernels.power_accumulate_dense(acc, w, batch)
            done += size
        w = normalize(acc / block)
    return w, sin_sq(w, dist.ground_truth().v1)
