"""Sample-stream distributions with exact ground truth and concentration bounds.

A distribution describes i.i.d. random matrices ``A`` with ``E[A] = Sigma``,
``||A - Sigma||_2 <= M`` almost surely and second moments of ``A - Sigma``
bounded by ``V`` in spectral norm.  Distributions are immutable; calling
:meth:`StreamDistribution.stream` with a per-trial generator gives the mutable
object that actually produces samples.

Streams hand out samples in chunks, in one of three encodings:

``"basis"``
    ``(idx, scale)``: ``A = scale**2 * e_idx e_idx^T``.
``"rank_one"``
    ``xs`` of shape ``(size, d)``: ``A = x x^T``.
``"dense"``
    ``mats`` of shape ``(size, d, d)``.
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import sym_eig_top2, symmetrize


@dataclass(frozen=True)
class GroundTruth:
    sigma: np.ndarray
    lambda1: float
    lambda2: float
    v1: np.ndarray

    @property
    def gap(self):
        return self.lambda1 - self.lambda2

    @property
    def d(self):
        return self.v1.shape[0]


@dataclass(frozen=True)
class ModelBounds:
    m_bound: float
    v_bound: float
    lambda1: float

    def __post_init__(self):
        if self.m_bound < 0 or self.v_bound < 0:
            raise ValueError("concentration bounds must be nonnegative")

    @property
    def v_bar(self):
        return self.v_bound + self.lambda1**2


def densify(kind, batch, d):
    """Expand a chunk in any encoding to an array of dense ``(size, d, d)`` matrices."""
    if kind == "dense":
        return np.asarray(batch)
    if kind == "rank_one":
        return np.einsum("ti,tj->tij", batch, batch)
    idx, scale = batch
    mats = np.zeros((idx.shape[0], d, d))
    mats[np.arange(idx.shape[0]), idx, idx] = scale**2
    return mats


def as_vectors(kind, batch, d):
    """Expand a rank-one chunk (``basis`` or ``rank_one``) to explicit vectors."""
    if kind == "rank_one":
        return batch
    if kind != "basis":
        raise ValueError("dense samples have no vector form")
    idx, scale = batch
    xs = np.zeros((idx.shape[0], d))
    xs[np.arange(idx.shape[0]), idx] = scale
    return xs


class StreamDistribution:
    d: int
    kind: str

    def stream(self, rng):
        raise NotImplementedError

    def ground_truth(self):
        raise NotImplementedError

    def bounds(self):
        raise NotImplementedError

    def sample(self, rng):
        """Draw one sample as a dense ``d x d`` matrix."""
        return densify(self.kind, self.stream(rng).next(1), self.d)[0]


class _IIDStream:
    def __init__(self, dist, rng):
        self.dist = dist
        self.rng = rng
        self.kind = dist.kind
        self.d = dist.d

    def next(self, size):
        return self.dist._draw(self.rng, size)


@dataclass(frozen=True)
class BasisSpike(StreamDistribution):
    """``x = e_1`` w.p. ``1/d``, else ``x = sigma * e_j`` for ``j`` uniform in ``2..d``.

    ``Sigma = (1 - sigma^2)/d e_1 e_1^T + sigma^2/d I``.
    """

    d: int
    sigma: float
    kind: str = field(default="basis", init=False)

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("BasisSpike needs d >= 2")
        if not 0 < self.sigma < 1:
            raise ValueError("BasisSpike needs 0 < sigma < 1")

    def _draw(self, rng, size):
        idx = rng.integers(0, self.d, size=size)
        scale = np.where(idx == 0, 1.0, self.sigma)
        return idx, scale

    def stream(self, rng):
        return _IIDStream(self, rng)

    def ground_truth(self):
        d, s2 = self.d, self.sigma**2
        sig = np.diag(np.r_[1.0, np.full(d - 1, s2)]) / d
        v1 = np.zeros(d)
        v1[0] = 1.0
        return GroundTruth(sig, 1.0 / d, s2 / d, v1)

    def bounds(self):
        # ||A|| <= 1 and ||Sigma|| = 1/d; V uses the stated ||E[A A^T]|| <= 1/d
        return ModelBounds(1.0 + 1.0 / self.d, 1.0 / self.d, 1.0 / self.d)


@dataclass(frozen=True)
class BoundedFeature(StreamDistribution):
    """``x = D s`` with ``D = diag(scales)`` and ``s`` uniform on ``{-1, +1}^d``."""

    scales: tuple
    kind: str = field(default="rank_one", init=False)

    def __post_init__(self):
        u = np.asarray(self.scales, dtype=np.float64)
        object.__setattr__(self, "scales", tuple(float(x) for x in u))
        if u.ndim != 1 or u.size < 2:
            raise ValueError("BoundedFeature needs at least two scales")
        if np.any(u < 0) or not np.all(np.isfinite(u)):
            raise ValueError("BoundedFeature scales must be finite and nonnegative")

    @property
    def d(self):
        return len(self.scales)

    def _draw(self, rng, size):
        s = 2.0 * rng.integers(0, 2, size=(size, self.d)) - 1.0
        return s * np.asarray(self.scales)

    def stream(self, rng):
        return _IIDStream(self, rng)

    def ground_truth(self):
        u2 = np.asarray(self.scales) ** 2
        order = np.argsort(-u2, kind="stable")
        v1 = np.zeros(self.d)
        v1[order[0]] = 1.0
        return GroundTruth(np.diag(u2), float(u2[order[0]]), float(u2[order[1]]), v1)

    def bounds(self):
        # A - Sigma = S N S with S = diag(s) and N = u u^T - diag(u^2), so its
        # norm is the constant ||N|| and E[(A - Sigma)^2] = diag(N^2)
        u = np.asarray(self.scales)
        u2 = u**2
        n_mat = np.outer(u, u) - np.diag(u2)
        m = float(np.linalg.norm(n_mat, 2)) if self.d <= 2048 else float(u2.sum() + u2.max())
        v = float(np.max(u2 * (u2.sum() - u2)))
        return ModelBounds(m, v, float(u2.max()))


class _ReplayStream:
    def __init__(self, dist):
        self.data = dist.data
        self.kind = dist.kind
        self.d = dist.d
        self.pos = 0

    def next(self, size):
        count = self.data.shape[0]
        take = (self.pos + np.arange(size)) % count
        self.pos = (self.pos + size) % count
        return np.asarray(self.data[take], dtype=np.float64)


class Replay(StreamDistribution):
    """A finite recorded stream, replayed in order and cycled when exhausted.

    ``data`` holds either vectors ``x`` (``rank_one=True``, ``A = x x^T``) or
    dense matrices.  Unless supplied, ground truth and bounds are exact for the
    uniform distribution over the stored samples.
    """

    def __init__(self, data, rank_one=False, truth=None, bounds=None):
        data = np.asarray(data) if not isinstance(data, np.memmap) else data
        if rank_one and data.ndim != 2:
            raise ValueError("rank-one replay data must have shape (count, d)")
        if not rank_one and (data.ndim != 3 or data.shape[1] != data.shape[2]):
            raise ValueError("dense replay data must have shape (count, d, d)")
        if data.shape[0] < 1:
            raise ValueError("replay stream is empty")
        self.data = data
        self.kind = "rank_one" if rank_one else "dense"
        self.d = data.shape[1]
        self._truth = truth
        self._bounds = bounds

    @classmethod
    def constant(cls, a):
        return cls(np.asarray(a, dtype=np.float64)[None, :, :])

    def stream(self, rng=None):
        return _ReplayStream(self)

    def sample(self, rng):
        k = int(rng.integers(0, self.data.shape[0]))
        return densify(self.kind, np.asarray(self.data[k : k + 1], dtype=np.float64), self.d)[0]

    def _chunks(self, size=1024):
        for lo in range(0, self.data.shape[0], size):
            yield densify(self.kind, np.asarray(self.data[lo : lo + size], dtype=np.float64), self.d)

    def mean_matrix(self):
        total = np.zeros((self.d, self.d))
        for mats in self._chunks():
            total += mats.sum(axis=0)
        return total / self.data.shape[0]

    def ground_truth(self):
        if self._truth is not None:
            return self._truth
        sig = symmetrize(self.mean_matrix())
        lam1, lam2, v1 = sym_eig_top2(sig)
        return GroundTruth(sig, lam1, lam2, v1)

    def bounds(self):
        if self._bounds is not None:
            return self._bounds
        truth = self.ground_truth()
        sig = self.mean_matrix()
        m, left, right = 0.0, np.zeros((self.d, self.d)), np.zeros((self.d, self.d))
        for mats in self._chunks():
            dev = mats - sig
            m = max(m, float(np.max(np.linalg.norm(dev, 2, axis=(1, 2)))))
            left += np.einsum("tij,tkj->ik", dev, dev)
            right += np.einsum("tji,tjk->ik", dev, dev)
        count = self.data.shape[0]
        v = max(np.linalg.norm(left / count, 2), np.linalg.norm(right / count, 2))
        return ModelBounds(m, float(v), truth.lambda1)


def sample(dist, rng):
    return dist.sample(rng)


def ground_truth(dist):
    return dist.ground_truth()


def bounds(dist):
    return dist.bounds()


@dataclass
class CheckReport:
    trials: int
    max_deviation: float
    second_moment_left: float
    second_moment_right: float
    mean_deviation: float
    m_bound: float
    v_bound: float
    violations: list

    @property
    def ok(self):
        return not self.violations


def empirical_check(dist, trials, rng, m_bound=None, v_bound=None, chunk=2048):
    """Draw ``trials`` samples and test them against the declared ``M`` and ``V``.

    ``m_bound``/``v_bound`` override the distribution's own values, which is
    how a deliberately wrong bound can be checked.  The second moments may
    exceed ``V`` by a sampling allowance of ``5 / sqrt(trials)``.
    """
    if trials < 100:
        raise ValueError("empirical_check needs at least 100 trials")
    truth, mb = dist.ground_truth(), dist.bounds()
    m_bound = mb.m_bound if m_bound is None else m_bound
    v_bound = mb.v_bound if v_bound is None else v_bound
    sig, d = truth.sigma, dist.d
    stream = dist.stream(rng)
    max_dev = 0.0
    total = np.zeros((d, d))
    left = np.zeros((d, d))
    right = np.zeros((d, d))
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        mats = densify(stream.kind, stream.next(size), d)
        dev = mats - sig
        max_dev = max(max_dev, float(np.max(np.linalg.norm(dev, 2, axis=(1, 2)))))
        total += mats.sum(axis=0)
        left += np.einsum("tij,tkj->ik", dev, dev)
        right += np.einsum("tji,tjk->ik", dev, dev)
        done += size
    sm_left = float(np.linalg.norm(left / trials, 2))
    sm_right = float(np.linalg.norm(right / trials, 2))
    mean_dev = float(np.linalg.norm(total / trials - sig, 2))

    violations = []
    if max_dev > m_bound * (1 + 1e-12) + 1e-15:
        violations.append(f"max ||A - Sigma|| = {max_dev:.6g} exceeds M = {m_bound:.6g}")
    allowance = v_bound * (1 + 5 / np.sqrt(trials)) + 1e-15
    for side, val in (("left", sm_left), ("right", sm_right)):
        if val > allowance:
            violations.append(f"{side} second moment {val:.6g} exceeds V = {v_bound:.6g}")
    return CheckReport(trials, max_dev, sm_left, sm_right, mean_dev, m_bound, v_bound, violations)

