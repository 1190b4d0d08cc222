"""Continuous equations of motion and the classical RK4 reference integrator.

Each ``deriv_*`` function returns the time derivative of a state in the same
container type as the state itself.
"""

from __future__ import annotations

from typing import Callable, TypeVar

import numpy as np

from .liegroup import cross, hat
from .potential import moment_inertial, moment_relative
from .state import (
    InertialState,
    InertialVelocityState,
    RelativeState,
    RelativeVelocityState,
)
from .system import BodySystem

__all__ = [
    "deriv_inertial_hamiltonian",
    "deriv_inertial_lagrangian",
    "deriv_relative_hamiltonian",
    "deriv_relative_lagrangian",
    "rk4_step",
]

S = TypeVar("S")


def deriv_inertial_hamiltonian(system: BodySystem, s: InertialState) -> InertialState:
    _, dU_dx, dU_dR = system.inertial_potential(s.x, s.R)
    n = system.n
    Rdot = np.empty((n, 3, 3))
    Pidot = np.empty((n, 3))
    xdot = s.gamma / system.masses[:, None]
    for i, b in enumerate(system.bodies):
        Omega = b.J_inv @ s.Pi[i]
        M = moment_inertial(s.R[i], dU_dR[i])
        Rdot[i] = s.R[i] @ hat(Omega)
        Pidot[i] = cross(s.Pi[i], Omega) + M
    return InertialState(xdot, Rdot, -dU_dx, Pidot)


def deriv_inertial_lagrangian(system: BodySystem, s: InertialVelocityState) -> InertialVelocityState:
    _, dU_dx, dU_dR = system.inertial_potential(s.x, s.R)
    n = system.n
    Rdot = np.empty((n, 3, 3))
    Omegadot = np.empty((n, 3))
    for i, b in enumerate(system.bodies):
        Omega = s.Omega[i]
        M = moment_inertial(s.R[i], dU_dR[i])
        Rdot[i] = s.R[i] @ hat(Omega)
        Omegadot[i] = b.J_inv @ (M - cross(Omega, b.J @ Omega))
    return InertialVelocityState(s.v.copy(), Rdot, -dU_dx / system.masses[:, None], Omegadot)


def deriv_relative_hamiltonian(system: BodySystem, s: RelativeState) -> RelativeState:
    b1, b2 = system.bodies
    m = system.reduced_mass
    p = system.relative_potential(s.X, s.R)
    M = moment_relative(s.R, p.dU_dR)
    Omega = s.R @ (b1.J_inv @ (s.R.T @ s.Pi))
    Omega2 = b2.J_inv @ s.Pi2
    S2 = hat(Omega2)
    return RelativeState(
        X=s.Gamma / m - S2 @ s.X,
        R=(hat(Omega) - S2) @ s.R,
        Gamma=-S2 @ s.Gamma - p.dU_dX,
        Pi=-S2 @ s.Pi - M,
        Pi2=-S2 @ s.Pi2 + cross(s.X, p.dU_dX) + M,
        x2=s.gamma2 / b2.mass,
        gamma2=s.R2 @ p.dU_dX,
        R2=s.R2 @ S2,
    )


def deriv_relative_lagrangian(system: BodySystem, s: RelativeVelocityState) -> RelativeVelocityState:
    """Relative equations in velocity variables.

    The body-1 equation ``d/dt(J_R Omega) + Omega2 x J_R Omega = -M`` is
    expanded with ``d/dt J_R = Rdot J1 R^T + R J1 Rdot^T``.
    """
    b1, b2 = system.bodies
    m = system.reduced_mass
    p = system.relative_potential(s.X, s.R)
    M = moment_relative(s.R, p.dU_dR)
    S2 = hat(s.Omega2)
    Rdot = (hat(s.Omega) - S2) @ s.R
    J_R = s.R @ b1.J @ s.R.T
    J_R_dot = Rdot @ b1.J @ s.R.T + s.R @ b1.J @ Rdot.T
    J_R_inv = s.R @ b1.J_inv @ s.R.T
    Pi = J_R @ s.Omega
    Omegadot = J_R_inv @ (-S2 @ Pi - M - J_R_dot @ s.Omega)
    J2w = b2.J @ s.Omega2
    Omega2dot = b2.J_inv @ (-cross(s.Omega2, J2w) + cross(s.X, p.dU_dX) + M)
    return RelativeVelocityState(
        X=s.V - S2 @ s.X,
        R=Rdot,
        V=-S2 @ s.V - p.dU_dX / m,
        Omega=Omegadot,
        Omega2=Omega2dot,
        x2=s.v2.copy(),
        v2=s.R2 @ p.dU_dX / b2.mass,
        R2=s.R2 @ S2,
    )


def rk4_step(deriv: Callable[[S], S], state: S, h: float) -> S:
    """One classical fourth-order Runge-Kutta step.

    Every stored component, including the nine raw entries of each attitude
    matrix, is advanced as an ordinary vector; nothing keeps attitudes on
    SO(3).
    """
    k1 = deriv(state)
    k2 = deriv(state + (0.5 * h) * k1)
    k3 = deriv(state + (0.5 * h) * k2)
    k4 = deriv(state + h * k3)
    return state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
