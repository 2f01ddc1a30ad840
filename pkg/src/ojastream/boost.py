"""Confidence boosting: run independent copies and take their geometric median."""

import warnings

import numpy as np

from .errors import MaxIterExceeded
from .linalg import normalize, sin_sq
from .oja import oja_run
from .rng import derive_trial_seed

SNAP = 1e-12


def align_signs(ws):
    """Flip each vector to have a nonnegative inner product with the first."""
    ws = [np.asarray(w, dtype=np.float64) for w in ws]
    if not ws:
        raise ValueError("need at least one vector")
    ref = ws[0]
    return [ref] + [-w if np.dot(w, ref) < 0 else w for w in ws[1:]]


def _objective(x, pts):
    return float(np.sum(np.linalg.norm(pts - x, axis=1)))


def geometric_median(points, tol=1e-10, max_iter=1000):
    """Weiszfeld iteration started from the coordinate-wise mean.

    Stops when an iterate moves less than ``tol`` times the spread of the
    points.  An iterate within ``1e-12`` of an input point returns that point.
    Emits :class:`MaxIterExceeded` and returns the best iterate if the cap is
    reached first.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[0] == 0:
        raise ValueError("need at least one point")
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = pts.mean(axis=0)
    scale = max(float(np.max(np.linalg.norm(pts - x, axis=1))), 1.0)
    best, best_obj = x, _objective(x, pts)
    for _ in range(max_iter):
        dist = np.linalg.norm(pts - x, axis=1)
        hit = np.flatnonzero(dist <= SNAP)
        if hit.size:
            return pts[hit[0]].copy()
        inv = 1.0 / dist
        nxt = inv @ pts / inv.sum()
        obj = _objective(nxt, pts)
        if obj < best_obj:
            best, best_obj = nxt, obj
        if np.linalg.norm(nxt - x) <= tol * scale:
            return best
        x = nxt
    warnings.warn(f"Weiszfeld did not converge in {max_iter} iterations", MaxIterExceeded, stacklevel=2)
    return best


def copy_seed(seed, k):
    """Seed of copy ``k``; copy 0 reuses ``seed`` so one copy equals a plain run."""
    return seed if k == 0 else derive_trial_seed(seed, k, 1)


def boosted_estimate(dist, schedule, n, copies, seed):
    """Median-of-copies estimate; returns ``(w, sin^2(w, v1))``."""
    if copies < 1:
        raise ValueError("need at least one copy")
    ws = [oja_run(dist, schedule, n, copy_seed(seed, k)).w_final for k in range(copies)]
    if copies == 1:
        w = ws[0]
    else:
        w = normalize(geometric_median(align_signs(ws)))
    return w, sin_sq(w, dist.ground_truth().v1)
