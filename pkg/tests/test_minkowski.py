import numpy as np
import pytest
from hypothesis import given, settings

from hypermag import minkowski as mk
from strategies import lorentz_maps, vectors


def test_inner_signature():
    assert mk.inner(mk.E1, mk.E1) == 1.0
    assert mk.inner(mk.E2, mk.E2) == 1.0
    assert mk.inner(mk.E3, mk.E3) == -1.0
    assert mk.inner(mk.E1, mk.E3) == 0.0


def test_cross_on_canonical_frame():
    assert np.array_equal(mk.cross(mk.E1, mk.E2), mk.E3)
    assert np.array_equal(mk.cross(mk.E2, mk.E3), -mk.E1)
    assert np.array_equal(mk.cross(mk.E3, mk.E1), -mk.E2)


@given(vectors, vectors, vectors)
def test_cross_identities(a, b, c):
    ab = mk.cross(a, b)
    scale = 1 + np.max(np.abs(a)) * np.max(np.abs(b)) * (1 + np.max(np.abs(c)))
    assert abs(mk.inner(ab, a)) <= 1e-12 * scale
    assert abs(mk.inner(ab, b)) <= 1e-12 * scale
    assert np.allclose(ab, -mk.cross(b, a), atol=1e-14)
    # triple product: <e1 x e2, e3>_m = -1 fixes the sign against det
    assert mk.inner(ab, c) == pytest.approx(-np.linalg.det(np.array([a, b, c])), abs=1e-12 * scale)


@given(vectors, vectors)
def test_cross_squared_norm(a, b):
    # <a x b, a x b> = <a,b>^2 - <a,a><b,b>
    ab = mk.cross(a, b)
    lhs = mk.inner(ab, ab)
    rhs = mk.inner(a, b) ** 2 - mk.inner(a, a) * mk.inner(b, b)
    assert lhs == pytest.approx(rhs, abs=1e-10 * (1 + np.sum(a * a) * np.sum(b * b)))


@given(lorentz_maps())
def test_random_maps_are_lorentz(A):
    res, future = mk.lorentz_residual(A)
    assert future
    assert mk.is_lorentz(A, tol=1e-12)
    assert np.allclose(mk.lorentz_inverse(A) @ A, np.eye(3), atol=1e-10 * np.max(np.abs(A)) ** 2)


@given(lorentz_maps(), vectors, vectors)
@settings(max_examples=50)
def test_lorentz_equivariance_of_cross(A, a, b):
    lhs = mk.cross(A @ a, A @ b)
    rhs = A @ mk.cross(a, b)
    assert np.allclose(lhs, rhs, atol=1e-9 * (1 + np.max(np.abs(A)) ** 3) * (1 + np.sum(a * a) + np.sum(b * b)))


def test_boost_moves_e3():
    A = mk.make_boost(0.7, (0.0, 2.0))
    assert np.allclose(A @ mk.E3, [0.0, np.sinh(0.7), np.cosh(0.7)])
    with pytest.raises(ValueError):
        mk.make_boost(1.0, (0.0, 0.0))


def test_reflection_is_not_in_the_group():
    R = np.diag([1.0, -1.0, 1.0])
    assert not mk.is_lorentz(R)
    assert not mk.is_lorentz(-np.eye(3))


@given(lorentz_maps())
def test_frames_stay_positive(A):
    f = mk.Frame.canonical().transformed(A)
    assert mk.is_positive_frame(f, 1e-9).ok
    assert np.allclose(f.as_matrix(), A)


def test_negative_frame_detected():
    f = mk.Frame(mk.E2, mk.E1, mk.E3)
    rep = mk.is_positive_frame(f)
    assert not rep.ok
    assert rep.residuals["v0xv1-w"] == 2.0
