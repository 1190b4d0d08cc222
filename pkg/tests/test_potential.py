import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import flyby_bodies, random_rotation
from fullbody.errors import BodiesOverlap, NonPositiveMass, SingularInertia
from fullbody.liegroup import hat, vee
from fullbody.potential import (
    COMPENSATED_PAIRS,
    dumbbell_model,
    eval_inertial,
    eval_relative,
    moment_inertial,
    moment_relative,
    point_mass_body,
)


def fd_gradient_X(b1, b2, X, R, eps=1e-6):
    g = np.empty(3)
    for a in range(3):
        e = np.zeros(3)
        e[a] = eps
        g[a] = (eval_relative(b1, b2, X + e, R).U - eval_relative(b1, b2, X - e, R).U) / (2 * eps)
    return g


def fd_gradient_R(b1, b2, X, R, eps=1e-6):
    """Componentwise derivative with respect to the nine entries of R."""
    g = np.empty((3, 3))
    for a in range(3):
        for b in range(3):
            E = np.zeros((3, 3))
            E[a, b] = eps
            g[a, b] = (eval_relative(b1, b2, X, R + E).U - eval_relative(b1, b2, X, R - E).U) / (2 * eps)
    return g


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


def random_body(rng, n_points):
    pts = rng.normal(size=(n_points, 3)) * 0.2
    fr = rng.uniform(0.5, 1.5, n_points)
    fr /= fr.sum()
    pts -= fr @ pts
    return point_mass_body(rng.uniform(0.5, 3.0), pts, fr)


# ------------------------------------------------------------------ bodies


def test_dumbbell_inertia_from_point_masses():
    b = dumbbell_model(1.5, 0.25)
    # m * sum f rho rho^T with rho = +-l/2 e1
    expected_Jd = np.diag([1.5 * 0.125**2, 0.0, 0.0])
    assert np.allclose(b.J_d, expected_Jd, atol=1e-15)
    assert np.allclose(b.J, np.diag([0.0, 0.0234375, 0.0234375]), atol=1e-15)
    assert np.allclose(b.fractions @ b.offsets, 0.0, atol=1e-15)
    assert b.fractions.sum() == 1.0


def test_dumbbell_zero_length_is_point():
    b = dumbbell_model(2.0, 0.0)
    assert b.offsets.shape == (1, 3)
    assert np.array_equal(b.J_d, np.zeros((3, 3)))


def test_dumbbell_inertia_override_keeps_point_masses():
    b = dumbbell_model(1.5, 0.25, [0.0004, 0.0238, 0.0238])
    assert np.allclose(b.J, np.diag([0.0004, 0.0238, 0.0238]), atol=0)
    assert np.allclose(b.J_d, np.diag([0.0236, 0.0002, 0.0002]), atol=1e-16)
    assert np.allclose(np.abs(b.offsets[:, 0]), 0.125)


def test_body_validation():
    with pytest.raises(NonPositiveMass):
        dumbbell_model(0.0, 1.0)
    with pytest.raises(ValueError):
        dumbbell_model(1.0, -1.0)
    with pytest.raises(ValueError):
        point_mass_body(1.0, [[1.0, 0, 0], [0.5, 0, 0]])  # center of mass off the origin
    with pytest.raises(ValueError):
        point_mass_body(1.0, [[1.0, 0, 0], [-1.0, 0, 0]], [0.5, 0.6])
    with pytest.raises(SingularInertia):
        dumbbell_model(1.0, 1.0).J_inv


# --------------------------------------------------------------- potential


def test_degenerate_dumbbells_unit_distance():
    b1, b2 = dumbbell_model(1.5, 0.0), dumbbell_model(3.0, 0.0)
    p = eval_relative(b1, b2, [1.0, 0, 0], np.eye(3))
    assert p.U == pytest.approx(-1.0, abs=1e-15)
    assert np.array_equal(p.dU_dR, np.zeros((3, 3)))
    # Kepler force G m1 m2 X / |X|^3
    assert np.allclose(p.dU_dX, [1.0, 0, 0], atol=1e-15)


def test_flyby_bodies_gradient_matches_fd():
    sys_ = flyby_bodies()
    b1, b2 = sys_.bodies
    X = np.array([1.0, 0.0, 0.3])
    R = np.eye(3)
    p = eval_relative(b1, b2, X, R)
    assert rel_err(p.dU_dX, fd_gradient_X(b1, b2, X, R)) < 1e-6
    assert rel_err(p.dU_dR, fd_gradient_R(b1, b2, X, R)) < 1e-6


def test_printed_dumbbell_formula_agrees_for_symmetric_bodies():
    """The +rho2 form over both dumbbell points gives the same U and moment."""
    sys_ = flyby_bodies()
    b1, b2 = sys_.bodies
    rng = np.random.default_rng(1)
    X = np.array([0.9, 0.2, 0.3])
    R = random_rotation(rng)
    U = 0.0
    A = np.zeros((3, 3))
    k = sys_.G * b1.mass * b2.mass / 4
    for r2 in b2.offsets:
        for r1 in b1.offsets:
            d = X + r2 + R @ r1
            U -= k / np.linalg.norm(d)
            A += k * np.outer(X + r2, r1) / np.linalg.norm(d) ** 3
    p = eval_relative(b1, b2, X, R)
    assert p.U == pytest.approx(U, rel=1e-14)
    assert np.allclose(moment_relative(R, A), moment_relative(R, p.dU_dR), atol=1e-14)


@pytest.mark.parametrize("n1,n2", [(1, 3), (4, 5), (9, 8)])
def test_n_point_gradients_match_fd(n1, n2, rng):
    for _ in range(5):
        b1, b2 = random_body(rng, n1), random_body(rng, n2)
        X = rng.normal(size=3)
        X *= 2.0 / np.linalg.norm(X)
        R = random_rotation(rng)
        p = eval_relative(b1, b2, X, R)
        assert rel_err(p.dU_dX, fd_gradient_X(b1, b2, X, R)) < 1e-6
        if n1 > 1:
            assert rel_err(p.dU_dR, fd_gradient_R(b1, b2, X, R)) < 1e-6


def test_compensated_branch_agrees_with_plain_sum(rng):
    b1, b2 = random_body(rng, 10), random_body(rng, 10)
    assert b1.offsets.shape[0] * b2.offsets.shape[0] > COMPENSATED_PAIRS
    X = np.array([1.5, 0.3, -0.2])
    R = random_rotation(rng)
    p = eval_relative(b1, b2, X, R)
    d = (X + b1.offsets @ R.T)[None] - b2.offsets[:, None]
    r = np.linalg.norm(d, axis=-1)
    k = b1.mass * b2.mass / (b1.mass + b2.mass) * np.outer(b2.fractions, b1.fractions)
    assert p.U == pytest.approx(-(k / r).sum(), rel=1e-14)
    U, dx, dR = eval_inertial([b1, b2], [X, np.zeros(3)], [R, np.eye(3)])
    assert U == pytest.approx(p.U, rel=1e-14)
    assert np.allclose(dx[0], p.dU_dX, atol=1e-14)


def test_length_zero_first_body_has_no_attitude_gradient():
    b1 = dumbbell_model(1.0, 0.0)
    b2 = dumbbell_model(2.0, 0.5)
    p = eval_relative(b1, b2, [0.3, 1.0, 0.2], random_rotation(np.random.default_rng(3)))
    assert np.array_equal(p.dU_dR, np.zeros((3, 3)))
    assert np.array_equal(moment_relative(np.eye(3), p.dU_dR), np.zeros(3))


def test_overlap_gate():
    b = dumbbell_model(1.0, 0.0)
    with pytest.raises(BodiesOverlap) as info:
        eval_relative(b, b, [1e-12, 0, 0], np.eye(3))
    assert info.value.separation < 1e-9
    with pytest.raises(BodiesOverlap):
        eval_inertial([b, b], [[0, 0, 0], [0, 0, 0]], [np.eye(3), np.eye(3)])


def test_inertial_matches_relative_and_is_invariant(rng):
    sys_ = flyby_bodies()
    b1, b2 = sys_.bodies
    for _ in range(20):
        x1, x2 = rng.normal(size=3), rng.normal(size=3)
        if np.linalg.norm(x1 - x2) < 0.9:
            continue
        R1, R2 = random_rotation(rng), random_rotation(rng)
        U, dx, dR = eval_inertial([b1, b2], [x1, x2], [R1, R2])
        p = eval_relative(b1, b2, R2.T @ (x1 - x2), R2.T @ R1)
        assert abs(U - p.U) < 1e-13
        # translation invariance
        shift = rng.normal(size=3) * 5
        assert abs(eval_inertial([b1, b2], [x1 + shift, x2 + shift], [R1, R2])[0] - U) < 1e-13
        # Newton's third law
        assert np.linalg.norm(dx.sum(axis=0)) < 1e-12
        # body-1 force and moment relate to the relative quantities
        assert np.allclose(R2.T @ dx[0], p.dU_dX, atol=1e-12)
        M1 = moment_inertial(R1, dR[0])
        M = moment_relative(p_R := R2.T @ R1, p.dU_dR)
        assert np.allclose(M1, -p_R.T @ M, atol=1e-12)
        # body-2 moment balances orbital and body-1 moments
        M2 = moment_inertial(R2, dR[1])
        X = R2.T @ (x1 - x2)
        assert np.allclose(M2, np.cross(X, p.dU_dX) + M, atol=1e-12)


def test_inertial_gradients_match_fd(rng):
    bodies = [random_body(rng, 3), random_body(rng, 2), random_body(rng, 1)]
    xs = np.array([[0, 0, 0], [2.0, 0.1, 0], [0.2, -2.0, 0.5]])
    Rs = np.array([random_rotation(rng) for _ in bodies])
    U, dx, dR = eval_inertial(bodies, xs, Rs)
    eps = 1e-6
    for i in range(3):
        for a in range(3):
            xp, xm = xs.copy(), xs.copy()
            xp[i, a] += eps
            xm[i, a] -= eps
            fd = (eval_inertial(bodies, xp, Rs)[0] - eval_inertial(bodies, xm, Rs)[0]) / (2 * eps)
            assert fd == pytest.approx(dx[i, a], rel=1e-6, abs=1e-10)
            for b in range(3):
                Rp, Rm = Rs.copy(), Rs.copy()
                Rp[i, a, b] += eps
                Rm[i, a, b] -= eps
                fd = (eval_inertial(bodies, xs, Rp)[0] - eval_inertial(bodies, xs, Rm)[0]) / (2 * eps)
                assert fd == pytest.approx(dR[i, a, b], rel=1e-6, abs=1e-10)


def test_single_body_has_zero_potential():
    b = dumbbell_model(1.0, 0.5)
    U, dx, dR = eval_inertial([b], [np.zeros(3)], [np.eye(3)])
    assert U == 0.0 and not dx.any() and not dR.any()


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1))
def test_moment_forms_match_skew_differences(seed):
    rng = np.random.default_rng(seed)
    R = random_rotation(rng)
    A = rng.normal(size=(3, 3))
    assert np.linalg.norm(moment_inertial(R, A) - vee(A.T @ R - R.T @ A)) < 1e-13
    assert np.linalg.norm(moment_relative(R, A) - vee(A @ R.T - R @ A.T)) < 1e-13
    assert not moment_inertial(R, np.zeros((3, 3))).any()
    assert not moment_relative(R, np.zeros((3, 3))).any()


def test_moment_is_torque_from_attitude_gradient(rng):
    """d/ds U(R exp(s S(w))) at s = 0 equals -M . w for the inertial moment."""
    b1, b2 = random_body(rng, 3), random_body(rng, 2)
    X = np.array([1.2, 0.4, -0.1])
    R = random_rotation(rng)
    w = rng.normal(size=3)
    p = eval_relative(b1, b2, X, R)
    Mi = moment_inertial(R, p.dU_dR)
    eps = 1e-6
    from fullbody.liegroup import rodrigues_exp

    dU = (eval_relative(b1, b2, X, R @ rodrigues_exp(eps * w)).U
          - eval_relative(b1, b2, X, R @ rodrigues_exp(-eps * w)).U) / (2 * eps)
    assert dU == pytest.approx(-Mi @ w, rel=1e-6)
    # left perturbations see the relative (column) moment with the opposite sign convention
    dU = (eval_relative(b1, b2, X, rodrigues_exp(eps * w) @ R).U
          - eval_relative(b1, b2, X, rodrigues_exp(-eps * w) @ R).U) / (2 * eps)
    assert dU == pytest.approx(moment_relative(R, p.dU_dR) @ w, rel=1e-6)
    assert np.allclose(hat(Mi), -hat(Mi).T)
