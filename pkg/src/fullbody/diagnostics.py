"""Conserved quantities and error measures sampled along trajectories."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .liegroup import cross, hat, orthogonality_error
from .state import InertialState, RelativeState
from .system import as_system


@dataclass(frozen=True, eq=False)
class DiagnosticsRecord:
    """Energy split, total momenta and worst attitude orthogonality error.

    ``pi_T`` is the total angular momentum about the inertial origin, which
    is the angular momentum about the mass center whenever the total linear
    momentum vanishes.
    """

    t: float
    E: float
    T_trans: float
    T_rot: float
    U: float
    gamma_T: np.ndarray
    pi_T: np.ndarray
    orth_err_max: float


def _rot_energy_trace(Omega, J_d) -> float:
    S = hat(Omega)
    return 0.5 * float(np.trace(S @ J_d @ S.T))


def diagnostics_relative(system, state: RelativeState, t: float = 0.0, U: float | None = None) -> DiagnosticsRecord:
    """Diagnostics of a relative state; ``U`` may be passed if already known."""
    system = as_system(system)
    b1, b2 = system.bodies
    m1, m2 = b1.mass, b2.mass
    m = system.reduced_mass
    s = state
    V = s.Gamma / m
    R_T = s.R.T
    # body-1 angular velocity in the body-2 frame, Omega = J_R^{-1} Pi
    Omega = s.R @ (b1.J_inv @ (R_T @ s.Pi))
    Omega2 = b2.J_inv @ s.Pi2
    V2 = s.R2.T @ (s.gamma2 / m2)
    V1 = V + V2
    T_trans = 0.5 * m1 * float(V1 @ V1) + 0.5 * m2 * float(V2 @ V2)
    J_dR = s.R @ b1.J_d @ R_T
    T_rot = _rot_energy_trace(Omega, J_dR) + _rot_energy_trace(Omega2, b2.J_d)
    if U is None:
        U = system.relative_potential(s.X, s.R).U
    gamma_T = s.R2 @ (m1 * V1 + m2 * V2)
    # about the inertial origin: x1 = x2 + R2 X, v1 = R2 V1
    x1 = s.x2 + s.R2 @ s.X
    pi_T = cross(x1, m1 * (s.R2 @ V1)) + cross(s.x2, s.gamma2) + s.R2 @ (s.Pi + s.Pi2)
    orth = max(orthogonality_error(s.R), orthogonality_error(s.R2))
    return DiagnosticsRecord(t, T_trans + T_rot + U, T_trans, T_rot, U, gamma_T, pi_T, orth)


def diagnostics_inertial(system, state: InertialState, t: float = 0.0, U: float | None = None) -> DiagnosticsRecord:
    system = as_system(system)
    s = state
    T_trans = 0.0
    T_rot = 0.0
    pi_T = np.zeros(3)
    orth = 0.0
    for i, b in enumerate(system.bodies):
        v = s.gamma[i] / b.mass
        T_trans += 0.5 * b.mass * float(v @ v)
        T_rot += _rot_energy_trace(b.J_inv @ s.Pi[i], b.J_d)
        pi_T = pi_T + cross(s.x[i], s.gamma[i]) + s.R[i] @ s.Pi[i]
        orth = max(orth, orthogonality_error(s.R[i]))
    if U is None:
        U = system.inertial_potential(s.x, s.R)[0] if system.n > 1 else 0.0
    gamma_T = s.gamma.sum(axis=0)
    return DiagnosticsRecord(t, T_trans + T_rot + U, T_trans, T_rot, U, gamma_T, pi_T, orth)
