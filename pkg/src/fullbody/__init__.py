"""Lie group variational integrators for rigid bodies in mutual gravity."""

from .config import SimConfig, load_config, normalize, denormalize, flyby_config
from .continuous import (
    deriv_inertial_hamiltonian,
    deriv_inertial_lagrangian,
    deriv_relative_hamiltonian,
    deriv_relative_lagrangian,
    rk4_step,
)
from .diagnostics import DiagnosticsRecord, diagnostics_inertial, diagnostics_relative
from .errors import (
    BodiesOverlap,
    ConfigError,
    FullBodyError,
    InvalidPhysicalUnits,
    NoConvergence,
    NonPositiveMass,
    NonSkewInput,
    NonSymmetricInput,
    NotARotation,
    SingularInertia,
    SingularJacobian,
)
from .lgvi import (
    YOSHIDA4,
    CompositionScheme,
    SolverConfig,
    SolverStats,
    StepIncrement,
    legendre_to_momenta,
    solve_implicit_F,
    step_inertial_hamiltonian,
    step_inertial_lagrangian,
    step_relative_hamiltonian,
    step_relative_lagrangian,
    yoshida4,
)
from .liegroup import hat, orthogonality_error, rodrigues_exp, vee
from .potential import BodyModel, dumbbell_model, point_mass_body
from .runner import compare, converge, run
from .state import (
    InertialConfigPair,
    InertialState,
    RelativeConfigPair,
    RelativeState,
    reconstruct_state,
    reduce_state,
    relative_from_initial,
)
from .system import BodySystem

__version__ = "0.1.0"
