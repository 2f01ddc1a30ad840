"""Dense linear algebra used throughout: the error metric and a small exact eigensolver.

Vectors and matrices are plain float64 numpy arrays.  ``jacobi_eigh`` is the
ground-truth eigensolver; it is slow-ish but robust, which is what an oracle
should be.
"""

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, NoConvergence, ZeroVector

ZERO_NORM = 1e-300
JACOBI_MAX_DIM = 512


def normalize(v):
    """Return ``v / ||v||_2``; raises ZeroVector for a (numerically) zero input."""
    v = np.asarray(v, dtype=np.float64)
    nrm = np.linalg.norm(v)
    if not nrm > ZERO_NORM:
        raise ZeroVector(f"cannot normalize vector with norm {nrm:g}")
    return v / nrm


def sin_sq(w, v):
    """Squared sine of the angle between two unit vectors, ``1 - (w.v)^2``.

    Clamped to [0, 1]; invariant to the sign of either argument.
    """
    c = float(np.dot(w, v))
    return min(1.0, max(0.0, 1.0 - c * c))


def rayleigh(w, s):
    w = np.asarray(w, dtype=np.float64)
    return float(w @ s @ w)


def apply(a, v):
    a = np.asarray(a, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if a.ndim != 2 or v.ndim != 1 or a.shape[1] != v.shape[0]:
        raise DimensionMismatch(f"cannot apply {a.shape} matrix to {v.shape} vector")
    return a @ v


def is_symmetric(s):
    s = np.asarray(s)
    return s.ndim == 2 and s.shape[0] == s.shape[1] and np.array_equal(s, s.T)


def symmetrize(s):
    """Return ``(s + s.T) / 2`` with exactly mirrored storage."""
    s = np.asarray(s, dtype=np.float64)
    out = 0.5 * (s + s.T)
    iu = np.triu_indices(out.shape[0], 1)
    out[(iu[1], iu[0])] = out[iu]
    return out


def canonical_sign(v):
    """Flip ``v`` so its first nonzero coordinate is positive."""
    nz = np.flatnonzero(v)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def jacobi_eigh(s, tol=1e-12, max_sweeps=100):
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` sorted by decreasing eigenvalue,
    eigenvectors as columns.  Iterates until the off-diagonal Frobenius norm is
    at most ``tol * ||s||_F``.
    """
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ValueError("matrix has non-finite entries")
    n = s.shape[0]
    a = np.array(symmetrize(s), order="C")
    v = np.eye(n)
    scale = np.linalg.norm(a)
    sweeps = _kernels.jacobi_sweeps(a, v, tol * scale, max_sweeps)
    if sweeps < 0:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    evals = np.diag(a).copy()
    order = np.argsort(-evals, kind="stable")
    return evals[order], v[:, order]


def sym_eig_top2(s):
    """Two largest eigenvalues and a unit top eigenvector of a symmetric matrix.

    The eigenvector is sign-normalized (first nonzero coordinate positive) and
    its residual is checked against ``1e-9 * max(1, |lambda1|)``.
    """
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {s.shape}")
    if s.shape[0] < 2:
        raise DimensionMismatch("need d >= 2")
    if s.shape[0] > JACOBI_MAX_DIM:
        # beyond the oracle's intended range; LAPACK is the pragmatic fallback
        evals, evecs = np.linalg.eigh(symmetrize(s))
        evals, evecs = evals[::-1], evecs[:, ::-1]
    else:
        evals, evecs = jacobi_eigh(s)
    lam1, lam2 = float(evals[0]), float(evals[1])
    v1 = canonical_sign(normalize(evecs[:, 0]))
    resid = np.linalg.norm(symmetrize(s) @ v1 - lam1 * v1)
    if resid > 1e-9 * max(1.0, abs(lam1)):
        raise NoConvergence(f"top eigenpair residual {resid:.3g} too large")
    return lam1, lam2, v1


def uniform_sphere(rng, d):
    """Uniform point on the unit sphere in R^d (normalized Gaussian)."""
    return normalize(rng.standard_normal(d))
