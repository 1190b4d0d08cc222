"""Lie group variational integrators for the full body problem.

Attitudes are advanced by multiplying with a rotation ``F = exp(S(f))``
obtained from the implicit equation ``F J_d - J_d F^T = S(g)``, so they stay
on SO(3) up to roundoff. Four discrete maps are provided: inertial and
relative coordinates, each in a Lagrangian (pairs of configurations) and a
Hamiltonian (configuration plus momenta) form. The Hamiltonian maps share the
signature ``step(system, state, h, cfg=None, stats=None)`` and can be
composed with :func:`yoshida4`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NoConvergence, SingularJacobian
from .liegroup import _vee, cross, hat, rodrigues_coefficients, rodrigues_exp, solve3
from .potential import PotentialEval, moment_inertial, moment_relative
from .state import InertialConfigPair, InertialState, RelativeConfigPair, RelativeState
from .system import BodySystem, as_system

_I3 = np.eye(3)

# Below this angle the derivative coefficients of the Rodrigues terms switch
# to their Taylor series; the closed forms lose about eps/theta^2 there.
_SERIES_ANGLE = 1e-2


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-15
    max_iterations: int = 50

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if int(self.max_iterations) < 1:
            raise ValueError("max_iterations must be at least 1")


DEFAULT_SOLVER = SolverConfig()


@dataclass(frozen=True, eq=False)
class StepIncrement:
    """Rotation between two steps, ``F = exp(S(f))``."""

    F: np.ndarray
    f: np.ndarray
    iterations_used: int


@dataclass
class SolverStats:
    """Running totals of Newton work, filled in by the step functions."""

    solves: int = 0
    iterations: int = 0
    max_iterations: int = 0

    def record(self, inc: StepIncrement) -> None:
        self.solves += 1
        self.iterations += inc.iterations_used
        if inc.iterations_used > self.max_iterations:
            self.max_iterations = inc.iterations_used


def _derivative_coefficients(theta: float) -> tuple[float, float]:
    """``(a'(t)/t, b'(t)/t)`` for ``a = sin t / t`` and ``b = (1 - cos t)/t^2``."""
    t2 = theta * theta
    if theta < _SERIES_ANGLE:
        return (
            -1.0 / 3.0 + t2 / 30.0 - t2 * t2 / 840.0,
            -1.0 / 12.0 + t2 / 180.0 - t2 * t2 / 6720.0,
        )
    s, c = math.sin(theta), math.cos(theta)
    return (theta * c - s) / (t2 * theta), (theta * s - 2.0 * (1.0 - c)) / (t2 * t2)


def implicit_map(J: np.ndarray, f: np.ndarray) -> np.ndarray:
    """``G(f) = a J f + b f x J f``, the vector form of ``vee(F J_d - J_d F^T)``."""
    theta = math.sqrt(f @ f)
    a, b = rodrigues_coefficients(theta)
    Jf = J @ f
    return a * Jf + b * cross(f, Jf)


def implicit_map_jacobian(J: np.ndarray, f: np.ndarray) -> np.ndarray:
    theta = math.sqrt(f @ f)
    a, b = rodrigues_coefficients(theta)
    da, db = _derivative_coefficients(theta)
    Jf = J @ f
    fJf = cross(f, Jf)
    return (
        da * np.outer(Jf, f)
        + a * J
        + db * np.outer(fJf, f)
        + b * (hat(f) @ J - hat(Jf))
    )


def solve_implicit_F(
    J_d: np.ndarray,
    g: np.ndarray,
    cfg: SolverConfig = DEFAULT_SOLVER,
    J: np.ndarray | None = None,
) -> StepIncrement:
    """Solve ``F J_d - J_d F^T = S(g)`` for ``F`` in SO(3) by Newton's method.

    ``J`` (the standard inertia ``tr(J_d) I - J_d``) may be passed to skip
    recomputing it. Iteration starts from the small-angle guess ``J^{-1} g``
    and stops when ``|g - G(f)| <= tolerance * |g|``, or earlier if Newton
    stalls below ``tolerance * max(1, |g|)`` (roundoff floor). The solution is
    only sought inside the ball ``|f| < pi`` where ``G`` is one-to-one; a
    starting guess outside that ball raises NoConvergence immediately.
    """
    if cfg is None:
        cfg = DEFAULT_SOLVER
    g = np.asarray(g, dtype=float)
    if J is None:
        J_d = np.asarray(J_d, dtype=float)
        J = np.trace(J_d) * _I3 - J_d
    f = solve3(J, g)
    if f is None:
        raise SingularJacobian("standard inertia is singular")
    gnorm = math.sqrt(g @ g)
    if math.sqrt(f @ f) >= math.pi:
        raise NoConvergence(0, gnorm, "initial guess outside the capture basin |J^-1 g| < pi")
    # Converge relative to |g|; small steps have |g| << 1 and an absolute
    # threshold would leave f with a relative error of tolerance / |g|.
    target = cfg.tolerance * gnorm
    floor = cfg.tolerance * max(1.0, gnorm)
    resid = g - implicit_map(J, f)
    rnorm = math.sqrt(resid @ resid)
    prev = math.inf
    it = 0
    while rnorm > target:
        if rnorm < floor and rnorm > 0.5 * prev:
            break  # stalled at the roundoff floor
        if it >= cfg.max_iterations:
            raise NoConvergence(it, rnorm)
        step = solve3(implicit_map_jacobian(J, f), resid)
        if step is None:
            raise SingularJacobian(f"Newton Jacobian is singular at |f| = {math.sqrt(f @ f):.3e}")
        f = f + step
        it += 1
        prev = rnorm
        resid = g - implicit_map(J, f)
        rnorm = math.sqrt(resid @ resid)
    return StepIncrement(rodrigues_exp(f), f, it)


def _solve(J_d, J, g, cfg, stats):
    inc = solve_implicit_F(J_d, g, cfg, J=J)
    if stats is not None:
        stats.record(inc)
    return inc


# ---------------------------------------------------------------- inertial


def _inertial_moments(system, Rs, dU_dR):
    return np.array([moment_inertial(Rs[i], dU_dR[i]) for i in range(system.n)])


def _inertial_h(system: BodySystem, s: InertialState, h, cfg, stats, pot):
    _, dUx, dUR = pot
    m = system.masses[:, None]
    n = system.n
    x1 = s.x + (h / m) * s.gamma - (0.5 * h * h / m) * dUx
    M = _inertial_moments(system, s.R, dUR)
    R1 = np.empty((n, 3, 3))
    Fs = []
    half = np.empty((n, 3))
    for i, b in enumerate(system.bodies):
        half[i] = s.Pi[i] + (0.5 * h) * M[i]
        F = _solve(b.J_d, b.J, h * half[i], cfg, stats).F
        Fs.append(F)
        R1[i] = s.R[i] @ F
    pot1 = system.inertial_potential(x1, R1)
    _, dUx1, dUR1 = pot1
    M1 = _inertial_moments(system, R1, dUR1)
    gamma1 = s.gamma - (0.5 * h) * (dUx + dUx1)
    Pi1 = np.array([Fs[i].T @ half[i] + (0.5 * h) * M1[i] for i in range(n)])
    return InertialState(x1, R1, gamma1, Pi1), pot1


def step_inertial_hamiltonian(
    system, state: InertialState, h: float, cfg: SolverConfig | None = None, stats: SolverStats | None = None
) -> InertialState:
    """One step of the inertial map in configuration-momentum variables.

    Any sign of ``h`` is accepted, which composition schemes rely on.
    """
    system = as_system(system)
    pot = system.inertial_potential(state.x, state.R)
    return _inertial_h(system, state, h, cfg, stats, pot)[0]


def step_inertial_lagrangian(
    system, pair: InertialConfigPair, h: float, cfg: SolverConfig | None = None, stats: SolverStats | None = None
) -> InertialConfigPair:
    """Advance ``(q_{k-1}, q_k)`` to ``(q_k, q_{k+1})``."""
    system = as_system(system)
    _, dUx, dUR = system.inertial_potential(pair.x, pair.R)
    m = system.masses[:, None]
    x1 = 2.0 * pair.x - pair.x_prev - (h * h / m) * dUx
    R1 = np.empty_like(pair.R)
    Fs = np.empty_like(pair.R)
    for i, b in enumerate(system.bodies):
        F_prev = pair.R_prev[i].T @ pair.R[i] if pair.F is None else pair.F[i]
        M = moment_inertial(pair.R[i], dUR[i])
        g = 2.0 * _vee(b.J_d @ F_prev) + (h * h) * M
        Fs[i] = _solve(b.J_d, b.J, g, cfg, stats).F
        R1[i] = pair.R[i] @ Fs[i]
    return InertialConfigPair(pair.x.copy(), pair.R.copy(), x1, R1, Fs)


def legendre_to_momenta(system, q_k, q_k1, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Momenta ``(gamma_k, Pi_k)`` at the start of the step ``q_k -> q_k1``.

    ``q_k`` and ``q_k1`` are ``(x, R)`` tuples of stacked per-body arrays.
    """
    system = as_system(system)
    (x, R), (x1, R1) = q_k, q_k1
    x, R, x1, R1 = (np.asarray(a, dtype=float) for a in (x, R, x1, R1))
    _, dUx, dUR = system.inertial_potential(x, R)
    m = system.masses[:, None]
    gamma = (m / h) * (x1 - x) + (0.5 * h) * dUx
    Pi = np.empty((system.n, 3))
    for i, b in enumerate(system.bodies):
        F = R[i].T @ R1[i]
        Pi[i] = (2.0 / h) * _vee(F @ b.J_d) - (0.5 * h) * moment_inertial(R[i], dUR[i])
    return gamma, Pi


def legendre_plus(system, q_k, q_k1, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Momenta ``(gamma_{k+1}, Pi_{k+1})`` at the end of the step ``q_k -> q_k1``."""
    system = as_system(system)
    (x, R), (x1, R1) = q_k, q_k1
    x, R, x1, R1 = (np.asarray(a, dtype=float) for a in (x, R, x1, R1))
    _, dUx1, dUR1 = system.inertial_potential(x1, R1)
    m = system.masses[:, None]
    gamma = (m / h) * (x1 - x) - (0.5 * h) * dUx1
    Pi = np.empty((system.n, 3))
    for i, b in enumerate(system.bodies):
        F = R[i].T @ R1[i]
        Pi[i] = (2.0 / h) * _vee(b.J_d @ F) + (0.5 * h) * moment_inertial(R1[i], dUR1[i])
    return gamma, Pi


def inertial_pair_from_state(system, state: InertialState, h: float, cfg=None, stats=None) -> InertialConfigPair:
    """Configuration pair ``(q_k, q_{k+1})`` generated by the Hamiltonian map."""
    nxt = step_inertial_hamiltonian(system, state, h, cfg, stats)
    return InertialConfigPair(state.x.copy(), state.R.copy(), nxt.x, nxt.R)


def inertial_state_from_pair(system, pair: InertialConfigPair, h: float) -> InertialState:
    """Configuration-momentum state at the later configuration of ``pair``."""
    gamma, Pi = legendre_plus(system, (pair.x_prev, pair.R_prev), (pair.x, pair.R), h)
    return InertialState(pair.x.copy(), pair.R.copy(), gamma, Pi)


# ---------------------------------------------------------------- relative


def _relative_h(system: BodySystem, s: RelativeState, h, cfg, stats, p: PotentialEval):
    b1, b2 = system.bodies
    m = system.reduced_mass
    m2 = b2.mass
    hh = 0.5 * h
    dUX = p.dU_dX
    M = moment_relative(s.R, p.dU_dR)
    a2 = s.Pi2 + hh * (cross(s.X, dUX) + M)
    F2 = _solve(b2.J_d, b2.J, h * a2, cfg, stats).F
    J_dR = s.R @ b1.J_d @ s.R.T
    J_R = s.R @ b1.J @ s.R.T
    a1 = s.Pi - hh * M
    F = _solve(J_dR, J_R, h * a1, cfg, stats).F
    F2T = F2.T
    X1 = F2T @ (s.X + (h / m) * s.Gamma - (hh * h / m) * dUX)
    R1 = F2T @ (F @ s.R)
    R2_1 = s.R2 @ F2
    p1 = system.relative_potential(X1, R1)
    dUX1 = p1.dU_dX
    M1 = moment_relative(R1, p1.dU_dR)
    R2dU = s.R2 @ dUX
    out = RelativeState(
        X=X1,
        R=R1,
        Gamma=F2T @ (s.Gamma - hh * dUX) - hh * dUX1,
        Pi=F2T @ a1 - hh * M1,
        Pi2=F2T @ a2 + hh * (cross(X1, dUX1) + M1),
        x2=s.x2 + (h / m2) * s.gamma2 + (hh * h / m2) * R2dU,
        gamma2=s.gamma2 + hh * (R2dU + R2_1 @ dUX1),
        R2=R2_1,
    )
    return out, p1


def step_relative_hamiltonian(
    system, state: RelativeState, h: float, cfg: SolverConfig | None = None, stats: SolverStats | None = None
) -> RelativeState:
    """One step of the relative map, including the body-2 reconstruction."""
    system = as_system(system)
    p = system.relative_potential(state.X, state.R)
    return _relative_h(system, state, h, cfg, stats, p)[0]


def step_relative_lagrangian(
    system, pair: RelativeConfigPair, h: float, cfg: SolverConfig | None = None, stats: SolverStats | None = None
) -> RelativeConfigPair:
    """Advance two consecutive reduced configurations by one step."""
    system = as_system(system)
    b1, b2 = system.bodies
    m = system.reduced_mass
    hsq = h * h
    X, R, R2 = pair.X, pair.R, pair.R2
    p = system.relative_potential(X, R)
    M = moment_relative(R, p.dU_dR)
    F2_prev = pair.R2_prev.T @ R2 if pair.F2 is None else pair.F2
    F_prev = F2_prev @ R @ pair.R_prev.T if pair.F is None else pair.F
    J_dR_prev = pair.R_prev @ b1.J_d @ pair.R_prev.T
    # vee(F2p^T (Fp J_dRp - J_dRp Fp^T) F2p) = F2p^T vee(...)
    g = F2_prev.T @ (2.0 * _vee(F_prev @ J_dR_prev)) - hsq * M
    J_dR = R @ b1.J_d @ R.T
    F = _solve(J_dR, R @ b1.J @ R.T, g, cfg, stats).F
    g2 = 2.0 * _vee(b2.J_d @ F2_prev) + hsq * (cross(X, p.dU_dX) + M)
    F2 = _solve(b2.J_d, b2.J, g2, cfg, stats).F
    F2T = F2.T
    X1 = F2T @ (2.0 * X - F2_prev.T @ pair.X_prev - (hsq / m) * p.dU_dX)
    R1 = F2T @ F @ R
    R2_1 = R2 @ F2
    x2_1 = 2.0 * pair.x2 - pair.x2_prev + (hsq / b2.mass) * (R2 @ p.dU_dX)
    return RelativeConfigPair(X.copy(), R.copy(), R2.copy(), pair.x2.copy(), X1, R1, R2_1, x2_1, F2, F)


def relative_legendre_to_momenta(system, pair: RelativeConfigPair, h: float) -> RelativeState:
    """Hamiltonian relative state at the earlier configuration of ``pair``."""
    system = as_system(system)
    b1, b2 = system.bodies
    m = system.reduced_mass
    hh = 0.5 * h
    X, R, R2 = pair.X_prev, pair.R_prev, pair.R2_prev
    p = system.relative_potential(X, R)
    M = moment_relative(R, p.dU_dR)
    F2 = R2.T @ pair.R2
    F = F2 @ pair.R @ R.T
    J_dR = R @ b1.J_d @ R.T
    return RelativeState(
        X=X.copy(),
        R=R.copy(),
        Gamma=(m / h) * (F2 @ pair.X - X) + hh * p.dU_dX,
        Pi=(2.0 / h) * _vee(F @ J_dR) + hh * M,
        Pi2=(2.0 / h) * _vee(F2 @ b2.J_d) - hh * (cross(X, p.dU_dX) + M),
        x2=pair.x2_prev.copy(),
        gamma2=(b2.mass / h) * (pair.x2 - pair.x2_prev) - hh * (R2 @ p.dU_dX),
        R2=R2.copy(),
    )


def relative_legendre_plus(system, pair: RelativeConfigPair, h: float) -> RelativeState:
    """Hamiltonian relative state at the later configuration of ``pair``."""
    system = as_system(system)
    b1, b2 = system.bodies
    m = system.reduced_mass
    hh = 0.5 * h
    X1, R1, R2_1 = pair.X, pair.R, pair.R2
    p1 = system.relative_potential(X1, R1)
    M1 = moment_relative(R1, p1.dU_dR)
    F2 = pair.R2_prev.T @ R2_1
    F = F2 @ R1 @ pair.R_prev.T
    J_dR = pair.R_prev @ b1.J_d @ pair.R_prev.T
    return RelativeState(
        X=X1.copy(),
        R=R1.copy(),
        Gamma=(m / h) * (X1 - F2.T @ pair.X_prev) - hh * p1.dU_dX,
        Pi=F2.T @ ((2.0 / h) * _vee(F @ J_dR)) - hh * M1,
        Pi2=(2.0 / h) * _vee(b2.J_d @ F2) + hh * (cross(X1, p1.dU_dX) + M1),
        x2=pair.x2.copy(),
        gamma2=(b2.mass / h) * (pair.x2 - pair.x2_prev) + hh * (R2_1 @ p1.dU_dX),
        R2=R2_1.copy(),
    )


def relative_pair_from_state(system, state: RelativeState, h: float, cfg=None, stats=None) -> RelativeConfigPair:
    nxt = step_relative_hamiltonian(system, state, h, cfg, stats)
    return RelativeConfigPair(
        state.X.copy(), state.R.copy(), state.R2.copy(), state.x2.copy(),
        nxt.X, nxt.R, nxt.R2, nxt.x2,
    )


# ------------------------------------------------------------- composition


@dataclass(frozen=True)
class CompositionScheme:
    weights: tuple[float, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if not self.weights:
            raise ValueError("a composition scheme needs at least one substep")
        if abs(math.fsum(self.weights) - 1.0) > 1e-15:
            raise ValueError(f"substep weights sum to {math.fsum(self.weights)!r}, not 1")


def _yoshida_weights() -> tuple[float, float, float]:
    c = 2.0 ** (1.0 / 3.0)
    l1 = 1.0 / (2.0 - c)
    l2 = -c / (2.0 - c)
    if l1 + l2 + l1 != 1.0:
        l2 = 1.0 - 2.0 * l1
    return l1, l2, l1


YOSHIDA4 = CompositionScheme(_yoshida_weights(), "yoshida4")

StepFn = Callable[..., object]


def yoshida4(base_step: StepFn, scheme: CompositionScheme = YOSHIDA4) -> StepFn:
    """Compose a one-step map as ``Phi_{l_s h} o ... o Phi_{l_1 h}``.

    With a self-adjoint second-order base map and the default weights the
    result is fourth order. The middle substep runs backwards in time.
    """
    weights = scheme.weights

    def step(system, state, h, cfg=None, stats=None):
        for w in weights:
            state = base_step(system, state, w * h, cfg, stats)
        return state

    step.__name__ = f"{scheme.name or 'composed'}_{getattr(base_step, '__name__', 'step')}"
    return step
