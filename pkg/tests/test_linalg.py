import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ojastream import apply, jacobi_eigh, normalize, rayleigh, sin_sq, sym_eig_top2
from ojastream.errors import DimensionMismatch, ZeroVector
from ojastream.linalg import canonical_sign, is_symmetric, symmetrize, uniform_sphere
from ojastream.rng import make_rng

from oracles import classical_jacobi

finite = st.floats(-1e3, 1e3, allow_nan=False)


def nonzero_vectors(d_min=2, d_max=8):
    return st.integers(d_min, d_max).flatmap(
        lambda d: arrays(np.float64, d, elements=finite)).filter(lambda v: np.linalg.norm(v) > 1e-6)


def test_normalize_examples():
    np.testing.assert_allclose(normalize([3.0, 4.0]), [0.6, 0.8], rtol=0, atol=1e-15)
    np.testing.assert_array_equal(normalize([1.0, 0.0, 0.0]), [1.0, 0.0, 0.0])
    with pytest.raises(ZeroVector):
        normalize([0.0, 0.0])


def test_sin_sq_examples():
    e1, e2 = np.eye(2)
    assert sin_sq(e1, e1) == 0.0
    assert sin_sq(e1, e2) == 1.0
    assert sin_sq((e1 + e2) / np.sqrt(2), e1) == pytest.approx(0.5, abs=1e-15)


def test_rayleigh_examples():
    s = np.diag([2.0, 1.0])
    assert rayleigh([1.0, 0.0], s) == 2.0
    assert rayleigh([0.0, 1.0], s) == 1.0
    assert rayleigh(np.array([1.0, 1.0]) / np.sqrt(2), s) == pytest.approx(1.5, abs=1e-15)


def test_apply_examples():
    np.testing.assert_array_equal(apply(np.eye(2), [1.0, 2.0]), [1.0, 2.0])
    np.testing.assert_array_equal(apply(np.diag([2.0, 3.0]), [1.0, 1.0]), [2.0, 3.0])
    np.testing.assert_array_equal(apply(np.array([[1.0, 1.0], [0.0, 1.0]]), [1.0, 1.0]), [2.0, 1.0])
    with pytest.raises(DimensionMismatch):
        apply(np.eye(3), [1.0, 2.0])


def test_sym_eig_top2_examples():
    l1, l2, v = sym_eig_top2(np.diag([2.0, 1.0, 0.0]))
    assert (l1, l2) == (2.0, 1.0)
    np.testing.assert_array_equal(v, [1.0, 0.0, 0.0])
    l1, l2, v = sym_eig_top2(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert l1 == pytest.approx(1.0, abs=1e-14)
    assert l2 == pytest.approx(-1.0, abs=1e-14)
    np.testing.assert_allclose(v, [2**-0.5, 2**-0.5], atol=1e-14)


@pytest.mark.parametrize("seed", range(10))
def test_sym_eig_top2_matches_classical_jacobi(seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((5, 5))
    s = symmetrize(g)
    evals, vecs = classical_jacobi(s)
    l1, l2, v = sym_eig_top2(s)
    assert abs(l1 - evals[0]) <= 1e-8
    assert abs(l2 - evals[1]) <= 1e-8
    ref = vecs[:, 0] * np.sign(vecs[:, 0] @ v)
    assert np.max(np.abs(v - ref)) <= 1e-8
    assert np.linalg.norm(s @ v - l1 * v) <= 1e-9 * max(1.0, abs(l1))


def test_jacobi_full_spectrum_against_oracle():
    rng = np.random.default_rng(7)
    s = symmetrize(rng.standard_normal((9, 9)))
    evals, _ = jacobi_eigh(s)
    ref, _ = classical_jacobi(s)
    np.testing.assert_allclose(evals, ref, atol=1e-10)


def test_large_d_path():
    d = 600
    s = np.diag(np.linspace(0.0, 1.0, d))
    s[0, 1] = s[1, 0] = 1e-3
    l1, l2, v = sym_eig_top2(s)
    assert l1 == pytest.approx(1.0, abs=1e-12)
    assert v[-1] > 0.999


def test_symmetrize_and_sign():
    a = np.array([[1.0, 2.0], [4.0, 3.0]])
    s = symmetrize(a)
    assert is_symmetric(s) and s[0, 1] == s[1, 0] == 3.0
    assert not is_symmetric(a)
    np.testing.assert_array_equal(canonical_sign(np.array([0.0, -1.0, 2.0])), [0.0, 1.0, -2.0])


@settings(max_examples=200, deadline=None)
@given(nonzero_vectors())
def test_normalize_unit(v):
    assert abs(np.linalg.norm(normalize(v)) - 1.0) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 8).flatmap(lambda d: st.tuples(
    arrays(np.float64, d, elements=finite), arrays(np.float64, d, elements=finite))))
def test_sin_sq_symmetry_and_sign(pair):
    a, b = pair
    if np.linalg.norm(a) < 1e-6 or np.linalg.norm(b) < 1e-6:
        return
    w, v = normalize(a), normalize(b)
    s = sin_sq(w, v)
    assert 0.0 <= s <= 1.0
    assert s == sin_sq(v, w)
    assert s == sin_sq(-w, v)


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.integers(2, 10), elements=st.floats(-100, 100, allow_nan=False)))
def test_diagonal_spectrum_exact(diag):
    diag = np.sort(diag)[::-1]
    if diag[0] == diag[1]:
        return
    l1, l2, v = sym_eig_top2(np.diag(diag))
    assert abs(l1 - diag[0]) <= 1e-12 and abs(l2 - diag[1]) <= 1e-12
    e1 = np.zeros(diag.size)
    e1[0] = 1.0
    np.testing.assert_allclose(v, e1, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32))
def test_rayleigh_at_top_eigvec(d, seed):
    s = symmetrize(np.random.default_rng(seed).standard_normal((d, d)))
    l1, _, v = sym_eig_top2(s)
    assert abs(rayleigh(v, s) - l1) <= 1e-9
    nz = v[np.flatnonzero(v)[0]]
    assert nz > 0


def test_uniform_sphere_unit_and_isotropic():
    rng = make_rng(1)
    pts = np.array([uniform_sphere(rng, 3) for _ in range(20000)])
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(pts.mean(axis=0), 0.0, atol=0.03)
    np.testing.assert_allclose((pts**2).mean(axis=0), 1 / 3, atol=0.015)
