import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_rotation, rotations
from fullbody.errors import NonSkewInput, NonSymmetricInput, NotARotation
from fullbody.liegroup import (
    as_rotation,
    cross,
    hat,
    nonstd_from_std,
    orthogonality_error,
    rodrigues_coefficients,
    rodrigues_exp,
    solve3,
    std_from_nonstd,
    vee,
)

unit = st.floats(-1.0, 1.0, allow_nan=False)
v3 = arrays(np.float64, 3, elements=unit)
sym3 = arrays(np.float64, (3, 3), elements=unit).map(lambda a: a + a.T)


def test_hat_examples():
    assert np.array_equal(hat([0, 0, 0]), np.zeros((3, 3)))
    assert np.array_equal(hat([1.0, 0, 0]) @ np.array([0, 1.0, 0]), [0, 0, 1.0])


@given(v3, v3)
def test_hat_is_cross_product(v, w):
    # row-by-row dot products in plain float arithmetic: exact agreement
    hw = [float(r[0]) * w[0] + float(r[1]) * w[1] + float(r[2]) * w[2] for r in hat(v)]
    assert np.array_equal(hw, cross(v, w))
    assert np.allclose(hat(v) @ w, cross(v, w), rtol=0, atol=1e-15)
    assert np.allclose(cross(v, w), np.cross(v, w), rtol=0, atol=1e-15)
    assert np.array_equal(hat(v).T, -hat(v))


@given(v3)
def test_vee_round_trip(v):
    assert np.array_equal(vee(hat(v)), v)


def test_vee_examples():
    assert np.array_equal(vee(np.zeros((3, 3))), np.zeros(3))
    assert np.array_equal(vee(hat([1.0, 2.0, 3.0])), [1.0, 2.0, 3.0])


def test_vee_rejects_non_skew():
    with pytest.raises(NonSkewInput):
        vee(np.eye(3))
    # tiny asymmetry below the gate passes
    m = hat([1.0, 2.0, 3.0])
    m[0, 0] = 1e-12
    vee(m)


@given(v3, v3)
def test_scross_identity(x, y):
    lhs = hat(cross(x, y))
    assert np.linalg.norm(lhs - (hat(x) @ hat(y) - hat(y) @ hat(x))) < 1e-13
    assert np.linalg.norm(lhs - (np.outer(y, x) - np.outer(x, y))) < 1e-13


@given(rotations(), v3)
def test_sr_identity(R, x):
    assert np.linalg.norm(hat(R @ x) - R @ hat(x) @ R.T) < 1e-13


@given(v3)
def test_sts_identity(x):
    S = hat(x)
    assert np.linalg.norm(S.T @ S - ((x @ x) * np.eye(3) - np.outer(x, x))) < 1e-13
    assert np.linalg.norm(S.T @ S - (np.trace(np.outer(x, x)) * np.eye(3) - np.outer(x, x))) < 1e-13


@given(v3, sym3)
def test_trace_of_skew_times_symmetric_vanishes(p, Q):
    assert abs(np.trace(hat(p) @ Q)) < 1e-13


@given(arrays(np.float64, (3, 3), elements=unit), arrays(np.float64, (3, 3), elements=unit))
def test_trace_identities(A, B):
    t = np.trace(A @ B)
    for other in (np.trace(B @ A), np.trace(B.T @ A.T), np.trace(A.T @ B.T)):
        assert abs(t - other) < 1e-13
    assert abs(np.trace(A.T @ B) - np.sum(A * B)) < 1e-13


@given(sym3, v3)
def test_jdj_identity(J_d, w):
    J = std_from_nonstd(J_d)
    assert np.linalg.norm(hat(J @ w) - hat(w) @ J_d - J_d @ hat(w)) < 1e-13


def test_inertia_conversions():
    assert np.array_equal(std_from_nonstd(np.eye(3)), 2 * np.eye(3))
    assert np.allclose(std_from_nonstd(np.diag([1.0, 2.0, 3.0])), np.diag([5.0, 4.0, 3.0]), atol=0)
    assert np.array_equal(nonstd_from_std(2 * np.eye(3)), np.eye(3))
    J_d2 = nonstd_from_std(np.diag([0.0030, 0.1905, 0.1905]))
    assert np.allclose(J_d2, np.diag([0.1890, 0.0015, 0.0015]), atol=1e-15)


@given(sym3)
def test_inertia_round_trip(J):
    assert np.linalg.norm(std_from_nonstd(nonstd_from_std(J)) - J) < 1e-14


def test_inertia_requires_symmetry():
    A = np.arange(9.0).reshape(3, 3)
    with pytest.raises(NonSymmetricInput):
        std_from_nonstd(A)
    with pytest.raises(NonSymmetricInput):
        nonstd_from_std(A)


def _expm_series(f, terms=40):
    S = hat(f)
    out = np.eye(3)
    term = np.eye(3)
    for k in range(1, terms):
        term = term @ S / k
        out = out + term
    return out


def test_rodrigues_examples():
    assert np.array_equal(rodrigues_exp([0.0, 0.0, 0.0]), np.eye(3))
    R = rodrigues_exp([0.0, 0.0, math.pi / 2])
    assert np.allclose(R @ [1.0, 0, 0], [0, 1.0, 0], atol=1e-15)


@given(arrays(np.float64, 3, elements=st.floats(-1.5, 1.5)))
def test_rodrigues_matches_series(f):
    R = rodrigues_exp(f)
    assert np.linalg.norm(R - _expm_series(f)) < 1e-13
    assert orthogonality_error(R) < 1e-14
    assert abs(np.linalg.det(R) - 1.0) < 1e-14


@pytest.mark.parametrize("theta", [0.0, 1e-12, 1e-9, 1e-8 * (1 - 1e-9), 1e-8, 1e-7, 1e-4, 0.3])
def test_rodrigues_coefficients_continuous_across_branch(theta):
    a, b = rodrigues_coefficients(theta)
    # Taylor series of sin t / t and (1 - cos t) / t^2 to high order
    t2 = theta * theta
    a_ref = sum((-t2) ** k / math.factorial(2 * k + 1) for k in range(10))
    b_ref = sum((-t2) ** k / math.factorial(2 * k + 2) for k in range(10))
    assert abs(a - a_ref) < 1e-15
    assert abs(b - b_ref) < 1e-15


def test_orthogonality_error_examples():
    assert orthogonality_error(np.eye(3)) == 0.0
    assert math.isclose(orthogonality_error(1.01 * np.eye(3)), 0.0201 * math.sqrt(3), rel_tol=1e-12)


def test_as_rotation_validates_without_projection(rng):
    R = random_rotation(rng)
    assert np.array_equal(as_rotation(R), R)
    with pytest.raises(NotARotation):
        as_rotation(R * (1 + 1e-9))
    with pytest.raises(NotARotation):
        as_rotation(-np.eye(3))
    with pytest.raises(NotARotation):
        as_rotation(np.full((3, 3), np.nan))


@settings(max_examples=200)
@given(arrays(np.float64, (3, 3), elements=unit), v3)
def test_solve3_matches_numpy(A, b):
    x = solve3(A, b)
    if np.linalg.cond(A) > 1e8:
        return
    assert x is not None
    assert np.allclose(A @ x, b, atol=1e-9 * max(1, np.abs(b).max()))


def test_solve3_singular():
    assert solve3(np.zeros((3, 3)), np.ones(3)) is None
    assert solve3(np.ones((3, 3)), np.ones(3)) is None
