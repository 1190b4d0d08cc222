"""Mutual gravity of rigid bodies made of point masses.

Each body is a finite set of point masses rigidly attached to its body frame,
whose origin is the center of mass. Spheres are represented by a single point
at their center, which is exact for the external field.

All quantities are in normalized units. Unless an explicit gravitational
constant is given, ``G = 1 / sum(masses)``; for two bodies this is the usual
normalization with the reduced mass as the mass unit, where the pair coupling
``G m1 m2`` equals one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import BodiesOverlap, NonPositiveMass, SingularInertia
from .liegroup import cross, is_symmetric, nonstd_from_std, std_from_nonstd

MIN_SEPARATION = 1e-9

# Pair counts above this use compensated (fsum) accumulation.
COMPENSATED_PAIRS = 64


@dataclass(frozen=True, eq=False)
class BodyModel:
    """A rigid body: total mass, point masses in the body frame, inertia.

    ``offsets`` has shape ``(P, 3)`` and ``fractions`` shape ``(P,)``; the
    fractions sum to one and the weighted offsets to zero. ``J_d`` and ``J``
    are the nonstandard and standard moments of inertia. They are derived
    from the point masses unless an explicit standard inertia was given.
    """

    mass: float
    offsets: np.ndarray
    fractions: np.ndarray
    J_d: np.ndarray
    J: np.ndarray
    inertia_override: bool = field(default=False)

    @cached_property
    def J_inv(self) -> np.ndarray:
        w = np.linalg.eigvalsh(self.J)
        if w[0] <= 1e-12 * max(w[-1], 1e-300):
            raise SingularInertia(
                f"standard inertia is not positive definite (eigenvalues {w})"
            )
        return np.linalg.inv(self.J)

    @cached_property
    def J_d_inv(self) -> np.ndarray:
        return np.linalg.inv(self.J_d)


def point_mass_inertia(mass: float, offsets: np.ndarray, fractions: np.ndarray) -> np.ndarray:
    """Nonstandard inertia ``mass * sum f rho rho^T`` of a point-mass body."""
    return mass * np.einsum("p,pa,pb->ab", fractions, offsets, offsets)


def point_mass_body(mass: float, points, fractions=None, inertia=None) -> BodyModel:
    """Build a body from point offsets (body frame) and mass fractions.

    ``inertia`` optionally overrides the standard moment of inertia, given as
    three principal values or a full 3x3 matrix. The potential always uses
    the point masses only.
    """
    if not mass > 0:
        raise NonPositiveMass(f"mass must be positive, got {mass}")
    offsets = np.atleast_2d(np.asarray(points, dtype=float))
    if offsets.shape[1] != 3:
        raise ValueError("points must have shape (P, 3)")
    n = offsets.shape[0]
    if fractions is None:
        fractions = np.full(n, 1.0 / n)
    fractions = np.asarray(fractions, dtype=float)
    if fractions.shape != (n,) or np.any(fractions <= 0):
        raise ValueError("need one positive mass fraction per point")
    if abs(math.fsum(fractions) - 1.0) > 1e-14:
        raise ValueError(f"mass fractions sum to {math.fsum(fractions)!r}, not 1")
    com = fractions @ offsets
    scale = max(1.0, float(np.abs(offsets).max()))
    if np.abs(com).max() > 1e-14 * scale:
        raise ValueError(f"body frame origin is not the center of mass (offset {com})")

    if inertia is None:
        J_d = point_mass_inertia(mass, offsets, fractions)
        J = std_from_nonstd(J_d)
        override = False
    else:
        J = np.asarray(inertia, dtype=float)
        if J.shape == (3,):
            J = np.diag(J)
        if J.shape != (3, 3) or not is_symmetric(J):
            raise ValueError("inertia must be 3 principal values or a symmetric 3x3 matrix")
        J_d = nonstd_from_std(J)
        override = True
    return BodyModel(float(mass), offsets, fractions, J_d, J, override)


def dumbbell_model(mass: float, length: float, inertia=None) -> BodyModel:
    """Two equal spheres joined by a massless rod along the body e1 axis.

    A zero length collapses the body to one effective point mass.
    """
    if not mass > 0:
        raise NonPositiveMass(f"mass must be positive, got {mass}")
    if length < 0:
        raise ValueError("length must be non-negative")
    if length == 0:
        return point_mass_body(mass, [[0.0, 0.0, 0.0]], [1.0], inertia)
    rho = np.array([0.5 * length, 0.0, 0.0])
    return point_mass_body(mass, [rho, -rho], [0.5, 0.5], inertia)


def default_G(bodies: Sequence[BodyModel]) -> float:
    return 1.0 / math.fsum(b.mass for b in bodies)


@dataclass(frozen=True)
class PotentialEval:
    """Relative-coordinate potential ``U(X, R)`` with its partial derivatives."""

    U: float
    dU_dX: np.ndarray
    dU_dR: np.ndarray


def _accumulate(terms: np.ndarray) -> np.ndarray:
    """Sum over the leading axis, compensated for large point counts."""
    if terms.shape[0] <= COMPENSATED_PAIRS:
        return terms.sum(axis=0)
    flat = terms.reshape(terms.shape[0], -1)
    return np.array([math.fsum(col) for col in flat.T]).reshape(terms.shape[1:])


def _pair_terms(k, d, min_separation):
    # k: (n,) coupling, d: (n, 3) separations -> (U terms, c) with c = k / |d|^3
    r2 = np.einsum("na,na->n", d, d)
    r = np.sqrt(r2)
    rmin = float(r.min())
    if rmin < min_separation:
        raise BodiesOverlap(rmin, min_separation)
    return -k / r, k / (r * r2)


def eval_relative(
    b1: BodyModel,
    b2: BodyModel,
    X,
    R,
    G: float | None = None,
    min_separation: float = MIN_SEPARATION,
) -> PotentialEval:
    """Potential of body 1 relative to body 2 and its partials.

    The separation of point q of body 1 from point p of body 2, in the body-2
    frame, is ``d = X + R rho1_q - rho2_p``; ``U = -sum k_pq / |d|`` with
    ``k_pq = G m1 m2 f1_q f2_p``. ``dU_dR`` is the full componentwise
    derivative ``sum k d rho1^T / |d|^3``.
    """
    if G is None:
        G = 1.0 / (b1.mass + b2.mass)
    X = np.asarray(X, dtype=float)
    R = np.asarray(R, dtype=float)
    rho1 = b1.offsets
    d = (X + rho1 @ R.T)[None, :, :] - b2.offsets[:, None, :]
    k = (G * b1.mass * b2.mass) * np.multiply.outer(b2.fractions, b1.fractions)
    n = k.size
    u, c = _pair_terms(k.reshape(n), d.reshape(n, 3), min_separation)
    cd = c[:, None] * d.reshape(n, 3)
    if n <= COMPENSATED_PAIRS:
        U = float(u.sum())
        dU_dX = cd.sum(axis=0)
        # sum over p first, then contract with rho1_q
        dU_dR = cd.reshape(d.shape).sum(axis=0).T @ rho1
    else:
        U = math.fsum(u)
        dU_dX = _accumulate(cd)
        rho1_n = np.broadcast_to(rho1[None, :, :], d.shape).reshape(n, 3)
        dU_dR = _accumulate(cd[:, :, None] * rho1_n[:, None, :])
    return PotentialEval(U, dU_dX, dU_dR)


def eval_inertial(
    bodies: Sequence[BodyModel],
    xs,
    Rs,
    G: float | None = None,
    min_separation: float = MIN_SEPARATION,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Total mutual potential of n bodies in inertial coordinates.

    Returns ``(U, dU_dx, dU_dR)`` where ``dU_dx[i]`` is the gradient with
    respect to ``x_i`` and ``dU_dR[i]`` the componentwise derivative with
    respect to the entries of ``R_i``. With fewer than two bodies the
    potential is identically zero.
    """
    n = len(bodies)
    if G is None:
        G = default_G(bodies)
    xs = np.asarray(xs, dtype=float)
    Rs = np.asarray(Rs, dtype=float)
    dU_dx = np.zeros((n, 3))
    dU_dR = np.zeros((n, 3, 3))
    U = 0.0
    world = [bodies[i].offsets @ Rs[i].T for i in range(n)]
    for i in range(n):
        bi = bodies[i]
        for j in range(i + 1, n):
            bj = bodies[j]
            # d[q, p] = x_i + R_i rho_iq - x_j - R_j rho_jp
            d = (xs[i] + world[i])[:, None, :] - (xs[j] + world[j])[None, :, :]
            k = (G * bi.mass * bj.mass) * np.multiply.outer(bi.fractions, bj.fractions)
            m = k.size
            u, c = _pair_terms(k.reshape(m), d.reshape(m, 3), min_separation)
            cd = (c[:, None] * d.reshape(m, 3)).reshape(d.shape)
            if m <= COMPENSATED_PAIRS:
                U += float(u.sum())
                g = cd.sum(axis=(0, 1))
                gRi = cd.sum(axis=1).T @ bi.offsets
                gRj = cd.sum(axis=0).T @ bj.offsets
            else:
                U += math.fsum(u)
                g = _accumulate(cd.reshape(m, 3))
                gRi = _accumulate(np.einsum("qpa,qb->qpab", cd, bi.offsets).reshape(m, 3, 3))
                gRj = _accumulate(np.einsum("qpa,pb->qpab", cd, bj.offsets).reshape(m, 3, 3))
            dU_dx[i] += g
            dU_dx[j] -= g
            dU_dR[i] += gRi
            dU_dR[j] -= gRj
    return U, dU_dx, dU_dR


def moment_inertial(R, dU_dR) -> np.ndarray:
    """Gravity-gradient moment in the body frame, from the rows of R and dU/dR.

    Equals ``vee(dU_dR^T R - R^T dU_dR)``.
    """
    R = np.asarray(R, dtype=float)
    A = np.asarray(dU_dR, dtype=float)
    return cross(R[0], A[0]) + cross(R[1], A[1]) + cross(R[2], A[2])


def moment_relative(R, dU_dR) -> np.ndarray:
    """Relative-frame moment from the columns of R and dU/dR.

    Equals ``vee(dU_dR R^T - R dU_dR^T)``. Note the sign: this is minus the
    gravity torque on body 1 expressed in the body-2 frame.
    """
    R = np.asarray(R, dtype=float)
    A = np.asarray(dU_dR, dtype=float)
    return cross(R[:, 0], A[:, 0]) + cross(R[:, 1], A[:, 1]) + cross(R[:, 2], A[:, 2])
