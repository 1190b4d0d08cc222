"""Run configuration: INI parsing, validation and unit normalization.

A configuration file has the sections ``[run]``, ``[units]``, ``[body1]``,
``[body2]`` and ``[initial]``; see ``data/flyby_dumbbells.ini`` for a complete
example. Vectors are comma separated, rotations are either ``identity`` or
nine row-major numbers.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError, InvalidPhysicalUnits
from .liegroup import as_rotation
from .potential import BodyModel, dumbbell_model, point_mass_body
from .system import BodySystem

INTEGRATORS = (
    "lgvi-inertial-h",
    "lgvi-inertial-l",
    "lgvi-relative-h",
    "lgvi-relative-l",
    "rk4-inertial",
    "rk4-relative",
    "lgvi-yoshida4",
)

FLYBY_CONFIG = "flyby"


@dataclass(frozen=True, eq=False)
class BodySpec:
    """One body: a dumbbell of given ``length`` or explicit point masses."""

    mass: float
    length: float | None = None
    points: np.ndarray | None = None
    fractions: np.ndarray | None = None
    inertia: np.ndarray | None = None

    def model(self) -> BodyModel:
        if self.points is not None:
            return point_mass_body(self.mass, self.points, self.fractions, self.inertia)
        return dumbbell_model(self.mass, self.length or 0.0, self.inertia)


@dataclass(frozen=True, eq=False)
class InitialConditions:
    """Relative position and velocity of body 1 in the body-2 frame, body
    angular velocities in their own frames, and the inertial motion of
    body 2."""

    X: np.ndarray
    V: np.ndarray
    Omega1: np.ndarray
    R: np.ndarray
    x2: np.ndarray
    v2: np.ndarray
    Omega2: np.ndarray
    R2: np.ndarray


@dataclass(frozen=True)
class Units:
    """Unit system of a configuration.

    For ``system == "normalized"`` the scales record the physical size of
    one normalized unit (all 1.0 when the input was normalized to begin
    with); ``denormalize`` uses them to map back.
    """

    system: str = "normalized"
    G: float | None = None
    reference_length: float | None = None
    mass_scale: float = 1.0
    length_scale: float = 1.0
    time_scale: float = 1.0


@dataclass(frozen=True, eq=False)
class SimConfig:
    body1: BodySpec
    body2: BodySpec
    initial: InitialConditions
    h: float = 1e-3
    t_final: float = 12.0
    integrator: str = "lgvi-relative-h"
    tolerance: float = 1e-15
    max_iterations: int = 50
    sample_every: int = 10
    output: str | None = None
    units: Units = field(default_factory=Units)

    def __post_init__(self):
        validate(self)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.h))

    def system(self) -> BodySystem:
        if self.units.system != "normalized":
            raise ConfigError("normalize the configuration before building the system")
        return BodySystem.pair(self.body1.model(), self.body2.model())

    def with_overrides(self, **kw) -> "SimConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


def validate(cfg: SimConfig) -> None:
    if cfg.integrator not in INTEGRATORS:
        raise ConfigError(f"unknown integrator {cfg.integrator!r}; choose from {', '.join(INTEGRATORS)}")
    if not (math.isfinite(cfg.h) and cfg.h > 0):
        raise ConfigError("h must be a positive number")
    if not (math.isfinite(cfg.t_final) and cfg.t_final >= 0):
        raise ConfigError("t_final must be non-negative")
    if cfg.t_final > 0 and cfg.n_steps < 1:
        raise ConfigError("t_final / h rounds to zero steps")
    if cfg.t_final > 0 and abs(cfg.n_steps * cfg.h - cfg.t_final) > 1e-9 * cfg.t_final:
        raise ConfigError(f"t_final = {cfg.t_final!r} is not a whole number of steps of h = {cfg.h!r}")
    if int(cfg.sample_every) < 1:
        raise ConfigError("sample_every must be at least 1")
    if not cfg.tolerance > 0 or int(cfg.max_iterations) < 1:
        raise ConfigError("solver tolerance must be positive and max_iterations at least 1")
    if cfg.units.system not in ("normalized", "physical"):
        raise ConfigError("units.system must be 'normalized' or 'physical'")
    for b in (cfg.body1, cfg.body2):
        if not b.mass > 0:
            raise ConfigError("body masses must be positive")
    for name in ("R", "R2"):
        try:
            as_rotation(getattr(cfg.initial, name))
        except ValueError as exc:
            raise ConfigError(f"initial.{name}: {exc}") from exc


# ------------------------------------------------------------------ parsing


def _vec(text: str, n: int, key: str) -> np.ndarray:
    try:
        vals = [float(t) for t in text.replace(";", ",").split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc
    if len(vals) != n:
        raise ConfigError(f"{key}: expected {n} numbers, got {len(vals)}")
    return np.array(vals)


def _rotation(text: str, key: str) -> np.ndarray:
    if text.strip().lower() in ("identity", "i", "eye"):
        return np.eye(3)
    return _vec(text, 9, key).reshape(3, 3)


def _float(sec, key, default=None):
    if key not in sec:
        if default is None:
            raise ConfigError(f"[{sec.name}] is missing {key!r}")
        return default
    try:
        return float(sec[key])
    except ValueError as exc:
        raise ConfigError(f"[{sec.name}] {key}: {exc}") from exc


def _int(sec, key, default):
    try:
        return int(sec.get(key, default))
    except ValueError as exc:
        raise ConfigError(f"[{sec.name}] {key}: {exc}") from exc


def _body(cp, name) -> BodySpec:
    if name not in cp:
        raise ConfigError(f"missing section [{name}]")
    sec = cp[name]
    mass = _float(sec, "mass")
    inertia = None
    if "inertia" in sec:
        vals = [float(t) for t in sec["inertia"].split(",") if t.strip()]
        if len(vals) == 3:
            inertia = np.array(vals)
        elif len(vals) == 9:
            inertia = np.array(vals).reshape(3, 3)
        else:
            raise ConfigError(f"[{name}] inertia: expected 3 or 9 numbers")
    if "points" in sec:
        rows = [r for r in sec["points"].split(";") if r.strip()]
        points = np.array([_vec(r, 3, f"[{name}] points") for r in rows])
        fractions = None
        if "fractions" in sec:
            fractions = _vec(sec["fractions"], len(rows), f"[{name}] fractions")
        return BodySpec(mass, None, points, fractions, inertia)
    return BodySpec(mass, _float(sec, "length", 0.0), None, None, inertia)


def parse_config(text: str) -> SimConfig:
    """Parse an INI document into a configuration (normalized if needed)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";;"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    run = cp["run"] if "run" in cp else cp[cp.default_section]
    units_sec = cp["units"] if "units" in cp else None
    if "initial" not in cp:
        raise ConfigError("missing section [initial]")
    ini = cp["initial"]
    initial = InitialConditions(
        X=_vec(ini.get("X", ""), 3, "initial.X"),
        V=_vec(ini.get("V", ""), 3, "initial.V"),
        Omega1=_vec(ini.get("Omega1", "0,0,0"), 3, "initial.Omega1"),
        R=_rotation(ini.get("R", "identity"), "initial.R"),
        x2=_vec(ini.get("x2", "0,0,0"), 3, "initial.x2"),
        v2=_vec(ini.get("v2", "0,0,0"), 3, "initial.v2"),
        Omega2=_vec(ini.get("Omega2", "0,0,0"), 3, "initial.Omega2"),
        R2=_rotation(ini.get("R2", "identity"), "initial.R2"),
    )
    units = Units()
    if units_sec is not None:
        system = units_sec.get("system", "normalized").strip().lower()
        G = _float(units_sec, "G", math.nan)
        ref = _float(units_sec, "reference_length", math.nan)
        units = Units(
            system=system,
            G=None if math.isnan(G) else G,
            reference_length=None if math.isnan(ref) else ref,
        )
    try:
        cfg = SimConfig(
            body1=_body(cp, "body1"),
            body2=_body(cp, "body2"),
            initial=initial,
            h=_float(run, "h", 1e-3),
            t_final=_float(run, "t_final", 12.0),
            integrator=run.get("integrator", "lgvi-relative-h").strip(),
            tolerance=_float(run, "tolerance", 1e-15),
            max_iterations=_int(run, "max_iterations", 50),
            sample_every=_int(run, "sample_every", 10),
            output=run.get("output"),
            units=units,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return normalize(cfg)


def load_config(path: str | Path) -> SimConfig:
    """Load a configuration file; the name ``flyby`` selects the shipped
    two-dumbbell experiment."""
    if str(path) == FLYBY_CONFIG:
        text = resources.files("fullbody").joinpath("data/flyby_dumbbells.ini").read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text)


def flyby_config() -> SimConfig:
    return load_config(FLYBY_CONFIG)


# ------------------------------------------------------------ normalization


def _scale_body(b: BodySpec, mass: float, length: float) -> BodySpec:
    return BodySpec(
        mass=b.mass / mass,
        length=None if b.length is None else b.length / length,
        points=None if b.points is None else b.points / length,
        fractions=b.fractions,
        inertia=None if b.inertia is None else b.inertia / (mass * length * length),
    )


def _scale_initial(ic: InitialConditions, length: float, time: float) -> InitialConditions:
    v = length / time
    return InitialConditions(
        X=ic.X / length, V=ic.V / v, Omega1=ic.Omega1 * time, R=ic.R,
        x2=ic.x2 / length, v2=ic.v2 / v, Omega2=ic.Omega2 * time, R2=ic.R2,
    )


def normalize(cfg: SimConfig) -> SimConfig:
    """Express a physical configuration in normalized units.

    Masses are divided by the reduced mass, lengths by the reference length
    ``l`` (default: the horizontal distance between the mass centers, i.e.
    the norm of the first two components of ``X``) and times are multiplied
    by ``sqrt(G (m1 + m2) / l^3)``. Normalized input passes through.
    """
    u = cfg.units
    if u.system == "normalized":
        return cfg
    m1, m2 = cfg.body1.mass, cfg.body2.mass
    G = u.G
    if G is None or not (math.isfinite(G) and G > 0):
        raise InvalidPhysicalUnits("physical units need a positive gravitational constant G")
    if not (m1 > 0 and m2 > 0):
        raise InvalidPhysicalUnits("masses must be positive")
    l = u.reference_length
    if l is None:
        l = math.hypot(cfg.initial.X[0], cfg.initial.X[1])
    if not (math.isfinite(l) and l > 0):
        raise InvalidPhysicalUnits("reference length must be positive")
    mred = m1 * m2 / (m1 + m2)
    w0 = math.sqrt(G * (m1 + m2) / l**3)
    T = 1.0 / w0
    return replace(
        cfg,
        body1=_scale_body(cfg.body1, mred, l),
        body2=_scale_body(cfg.body2, mred, l),
        initial=_scale_initial(cfg.initial, l, T),
        h=cfg.h / T,
        t_final=cfg.t_final / T,
        units=Units("normalized", G, l, mred, l, T),
    )


def denormalize(cfg: SimConfig) -> SimConfig:
    """Inverse of :func:`normalize`, using the scales it recorded."""
    u = cfg.units
    if u.system != "normalized":
        return cfg
    if u.G is None:
        raise InvalidPhysicalUnits("configuration carries no physical scales")
    M, L, T = u.mass_scale, u.length_scale, u.time_scale
    return replace(
        cfg,
        body1=_scale_body(cfg.body1, 1.0 / M, 1.0 / L),
        body2=_scale_body(cfg.body2, 1.0 / M, 1.0 / L),
        initial=_scale_initial(cfg.initial, 1.0 / L, 1.0 / T),
        h=cfg.h * T,
        t_final=cfg.t_final * T,
        units=Units("physical", u.G, u.reference_length),
    )
