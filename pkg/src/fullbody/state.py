"""State containers and the maps between them.

Inertial states hold stacked per-body arrays: positions ``(n, 3)``,
attitudes ``(n, 3, 3)`` and so on. Relative states describe body 1 with
respect to body 2 (all vectors in the body-2 frame) together with the
inertial motion of body 2 used for reconstruction.

States support field-wise ``+`` and scalar ``*`` so that a time derivative,
which has the same layout, can be combined with them by explicit
Runge-Kutta schemes.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .system import BodySystem


class _Fields:
    """Field-wise vector-space arithmetic for array dataclasses."""

    def _values(self):
        return [getattr(self, f.name) for f in fields(self)]

    def __add__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return type(self)(*(a + b for a, b in zip(self._values(), other._values())))

    def __mul__(self, s):
        return type(self)(*(s * a for a in self._values()))

    __rmul__ = __mul__

    def flat(self) -> np.ndarray:
        return np.concatenate([np.ravel(a) for a in self._values()])

    def copy(self):
        return type(self)(*(np.array(a, dtype=float) for a in self._values()))


@dataclass(eq=False)
class InertialState(_Fields):
    """Hamiltonian inertial state: positions, attitudes, momenta."""

    x: np.ndarray
    R: np.ndarray
    gamma: np.ndarray
    Pi: np.ndarray


@dataclass(eq=False)
class InertialVelocityState(_Fields):
    """Lagrangian inertial state: velocities and body angular velocities."""

    x: np.ndarray
    R: np.ndarray
    v: np.ndarray
    Omega: np.ndarray


@dataclass(eq=False)
class RelativeState(_Fields):
    """Hamiltonian relative state.

    ``Pi`` is the angular momentum of body 1 expressed in the body-2 frame,
    ``Pi2`` that of body 2 in its own frame; ``Gamma = m V`` with the reduced
    mass. ``x2, gamma2, R2`` reconstruct body 2 in the inertial frame.
    """

    X: np.ndarray
    R: np.ndarray
    Gamma: np.ndarray
    Pi: np.ndarray
    Pi2: np.ndarray
    x2: np.ndarray
    gamma2: np.ndarray
    R2: np.ndarray


@dataclass(eq=False)
class RelativeVelocityState(_Fields):
    X: np.ndarray
    R: np.ndarray
    V: np.ndarray
    Omega: np.ndarray
    Omega2: np.ndarray
    x2: np.ndarray
    v2: np.ndarray
    R2: np.ndarray


@dataclass(eq=False)
class InertialConfigPair:
    """Two consecutive inertial configurations ``(q_{k-1}, q_k)``."""

    x_prev: np.ndarray
    R_prev: np.ndarray
    x: np.ndarray
    R: np.ndarray
    # Optional cached increments R_prev[i]^T R[i], shape (n, 3, 3). The step
    # functions fill this with the rotation returned by the implicit solve,
    # which is more accurate than re-forming the product from the attitudes.
    F: np.ndarray | None = None


@dataclass(eq=False)
class RelativeConfigPair:
    """Two consecutive reduced configurations plus body-2 reconstruction."""

    X_prev: np.ndarray
    R_prev: np.ndarray
    R2_prev: np.ndarray
    x2_prev: np.ndarray
    X: np.ndarray
    R: np.ndarray
    R2: np.ndarray
    x2: np.ndarray
    # Optional cached increments: F2 = R2_prev^T R2 and F with R = F2^T F R_prev.
    F2: np.ndarray | None = None
    F: np.ndarray | None = None


def _inertia_world(R, J):
    return R @ J @ R.T


def to_velocities(system: BodySystem, s: InertialState) -> InertialVelocityState:
    m = system.masses[:, None]
    Omega = np.array([b.J_inv @ p for b, p in zip(system.bodies, s.Pi)])
    return InertialVelocityState(s.x.copy(), s.R.copy(), s.gamma / m, Omega)


def to_momenta(system: BodySystem, s: InertialVelocityState) -> InertialState:
    m = system.masses[:, None]
    Pi = np.array([b.J @ w for b, w in zip(system.bodies, s.Omega)])
    return InertialState(s.x.copy(), s.R.copy(), s.v * m, Pi)


def relative_to_velocities(system: BodySystem, s: RelativeState) -> RelativeVelocityState:
    b1, b2 = system.bodies
    m = system.reduced_mass
    # J_R^{-1} = R J1^{-1} R^T
    Omega = _inertia_world(s.R, b1.J_inv) @ s.Pi
    return RelativeVelocityState(
        s.X.copy(), s.R.copy(), s.Gamma / m, Omega, b2.J_inv @ s.Pi2,
        s.x2.copy(), s.gamma2 / b2.mass, s.R2.copy(),
    )


def relative_to_momenta(system: BodySystem, s: RelativeVelocityState) -> RelativeState:
    b1, b2 = system.bodies
    m = system.reduced_mass
    Pi = _inertia_world(s.R, b1.J) @ s.Omega
    return RelativeState(
        s.X.copy(), s.R.copy(), m * s.V, Pi, b2.J @ s.Omega2,
        s.x2.copy(), b2.mass * s.v2, s.R2.copy(),
    )


def reduce_state(system: BodySystem, s: InertialState) -> RelativeState:
    """Express a two-body inertial state in coordinates relative to body 2."""
    m1, m2 = system.masses
    m = system.reduced_mass
    R1, R2 = s.R
    R = R2.T @ R1
    X = R2.T @ (s.x[0] - s.x[1])
    Gamma = m * (R2.T @ (s.gamma[0] / m1 - s.gamma[1] / m2))
    return RelativeState(X, R, Gamma, R @ s.Pi[0], s.Pi[1].copy(),
                         s.x[1].copy(), s.gamma[1].copy(), R2.copy())


def reconstruct_state(system: BodySystem, s: RelativeState) -> InertialState:
    """Inverse of :func:`reduce_state`."""
    m1, m2 = system.masses
    m = system.reduced_mass
    R1 = s.R2 @ s.R
    x1 = s.x2 + s.R2 @ s.X
    v1 = s.gamma2 / m2 + s.R2 @ (s.Gamma / m)
    return InertialState(
        np.array([x1, s.x2]),
        np.array([R1, s.R2]),
        np.array([m1 * v1, s.gamma2]),
        np.array([s.R.T @ s.Pi, s.Pi2]),
    )


def relative_from_initial(system: BodySystem, X, V, Omega1, R, x2, v2, Omega2, R2) -> RelativeState:
    """Relative Hamiltonian state from relative position/velocity data.

    ``Omega1`` and ``Omega2`` are body angular velocities, each in its own
    body frame; ``V`` is the relative velocity in the body-2 frame.
    """
    b1, b2 = system.bodies
    m = system.reduced_mass
    X, V, Omega1, x2, v2, Omega2 = (np.asarray(a, dtype=float) for a in (X, V, Omega1, x2, v2, Omega2))
    R = np.asarray(R, dtype=float)
    R2 = np.asarray(R2, dtype=float)
    return RelativeState(
        X.copy(), R.copy(), m * V, R @ (b1.J @ Omega1), b2.J @ Omega2,
        x2.copy(), b2.mass * v2, R2.copy(),
    )
