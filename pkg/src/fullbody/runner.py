"""Batch workflows: single runs, LGVI vs RK4 comparisons, convergence studies."""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import SimConfig
from .continuous import deriv_inertial_hamiltonian, deriv_relative_hamiltonian, rk4_step
from .diagnostics import DiagnosticsRecord, diagnostics_inertial, diagnostics_relative
from .errors import StepError
from .lgvi import (
    YOSHIDA4,
    SolverConfig,
    SolverStats,
    _inertial_h,
    _relative_h,
    inertial_pair_from_state,
    inertial_state_from_pair,
    relative_legendre_plus,
    relative_pair_from_state,
    step_inertial_lagrangian,
    step_relative_lagrangian,
)
from .state import InertialState, RelativeState, reconstruct_state, relative_from_initial
from .system import BodySystem

THREADS_ENV = "FULLBODY_THREADS"


# ------------------------------------------------------------------ engines
#
# An engine owns the evolving representation of one integrator (a state,
# a configuration pair, cached potential values) and exposes the current
# configuration-momentum state after every step.


class _RelativeH:
    frame = "relative"

    def __init__(self, system, s0, solver, stats, weights=(1.0,)):
        self.system, self.solver, self.stats = system, solver, stats
        self.weights = weights
        self.s = s0
        self.p = system.relative_potential(s0.X, s0.R)

    def advance(self, h):
        s, p = self.s, self.p
        for w in self.weights:
            s, p = _relative_h(self.system, s, w * h, self.solver, self.stats, p)
        self.s, self.p = s, p

    def state(self):
        return self.s

    def potential_energy(self):
        return self.p.U


class _InertialH:
    frame = "inertial"

    def __init__(self, system, s0, solver, stats):
        self.system, self.solver, self.stats = system, solver, stats
        self.s = s0
        self.pot = system.inertial_potential(s0.x, s0.R)

    def advance(self, h):
        self.s, self.pot = _inertial_h(self.system, self.s, h, self.solver, self.stats, self.pot)

    def state(self):
        return self.s

    def potential_energy(self):
        return self.pot[0]


class _Lagrangian:
    """Two-step map started by one step of the matching Hamiltonian map."""

    def __init__(self, system, s0, solver, stats, start, step, plus, frame):
        self.system, self.solver, self.stats = system, solver, stats
        self._start, self._step, self._plus = start, step, plus
        self.frame = frame
        self.s0 = s0
        self.pair = None
        self.h = None

    def advance(self, h):
        if self.pair is None:
            self.pair = self._start(self.system, self.s0, h, self.solver, self.stats)
        else:
            self.pair = self._step(self.system, self.pair, h, self.solver, self.stats)
        self.h = h

    def state(self):
        if self.pair is None:
            return self.s0
        return self._plus(self.system, self.pair, self.h)

    def potential_energy(self):
        return None


class _RK4:
    def __init__(self, system, s0, deriv, frame):
        self.s = s0
        self.frame = frame
        self._f = lambda st: deriv(system, st)

    def advance(self, h):
        self.s = rk4_step(self._f, self.s, h)

    def state(self):
        return self.s

    def potential_energy(self):
        return None


def make_engine(integrator: str, system: BodySystem, s0: RelativeState, solver=None, stats=None):
    """Engine for ``integrator`` starting from the relative state ``s0``."""
    inertial0 = None
    if "inertial" in integrator:
        inertial0 = reconstruct_state(system, s0)
    if integrator == "lgvi-relative-h":
        return _RelativeH(system, s0, solver, stats)
    if integrator == "lgvi-yoshida4":
        return _RelativeH(system, s0, solver, stats, YOSHIDA4.weights)
    if integrator == "lgvi-inertial-h":
        return _InertialH(system, inertial0, solver, stats)
    if integrator == "lgvi-relative-l":
        return _Lagrangian(system, s0, solver, stats, relative_pair_from_state,
                           step_relative_lagrangian, relative_legendre_plus, "relative")
    if integrator == "lgvi-inertial-l":
        return _Lagrangian(system, inertial0, solver, stats, inertial_pair_from_state,
                           step_inertial_lagrangian, inertial_state_from_pair, "inertial")
    if integrator == "rk4-relative":
        return _RK4(system, s0, deriv_relative_hamiltonian, "relative")
    if integrator == "rk4-inertial":
        return _RK4(system, inertial0, deriv_inertial_hamiltonian, "inertial")
    raise ValueError(f"unknown integrator {integrator!r}")


def initial_state(cfg: SimConfig, system: BodySystem | None = None) -> RelativeState:
    system = system or cfg.system()
    ic = cfg.initial
    return relative_from_initial(system, ic.X, ic.V, ic.Omega1, ic.R, ic.x2, ic.v2, ic.Omega2, ic.R2)


# ---------------------------------------------------------------------- csv

_DIAG_COLUMNS = ["E", "Ttrans", "Trot", "U", "gT1", "gT2", "gT3", "piT1", "piT2", "piT3", "orth_err"]


def _vec_cols(prefix):
    return [f"{prefix}{i}" for i in (1, 2, 3)]


def _mat_cols(prefix):
    return [f"{prefix}{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)]


def csv_columns(frame: str, n_bodies: int = 2) -> list[str]:
    if frame == "relative":
        cols = (["t"] + _vec_cols("X") + _mat_cols("R") + _vec_cols("G") + _vec_cols("P")
                + _vec_cols("P2") + _vec_cols("x2") + _vec_cols("g2") + _mat_cols("R2"))
    else:
        cols = ["t"]
        for i in range(1, n_bodies + 1):
            cols += _vec_cols(f"x{i}_") + _mat_cols(f"R{i}_") + _vec_cols(f"g{i}_") + _vec_cols(f"P{i}_")
    return cols + _DIAG_COLUMNS


def _state_values(s) -> np.ndarray:
    if isinstance(s, RelativeState):
        return np.concatenate([s.X, s.R.ravel(), s.Gamma, s.Pi, s.Pi2, s.x2, s.gamma2, s.R2.ravel()])
    parts = []
    for i in range(s.x.shape[0]):
        parts += [s.x[i], s.R[i].ravel(), s.gamma[i], s.Pi[i]]
    return np.concatenate(parts)


def _row(t, s, d: DiagnosticsRecord) -> list[str]:
    vals = np.concatenate([[t], _state_values(s), [d.E, d.T_trans, d.T_rot, d.U], d.gamma_T, d.pi_T, [d.orth_err_max]])
    return [f"{v:.17g}" for v in vals]


# ---------------------------------------------------------------------- run


@dataclass(eq=False)
class RunResult:
    integrator: str
    frame: str
    h: float
    n_steps: int
    initial: DiagnosticsRecord
    final: DiagnosticsRecord
    final_state: object
    energy_dev: np.ndarray  # |E_k - E_0| for k = 0..N
    orth_err: np.ndarray  # worst attitude error for k = 0..N
    max_gamma_dev: float
    max_pi_dev: float
    newton_solves: int
    newton_iterations: int
    newton_max_iterations: int
    wall_time: float
    samples: list = field(default_factory=list)

    @property
    def t_final(self) -> float:
        return self.n_steps * self.h

    @property
    def max_energy_dev(self) -> float:
        return float(self.energy_dev.max())

    @property
    def max_orth_err(self) -> float:
        return float(self.orth_err.max())

    def energy_decile_max(self) -> list[float]:
        """Max energy deviation within each tenth of the steps 1..N."""
        n = self.n_steps
        if n < 10:
            return []
        dev = self.energy_dev
        edges = [round(i * n / 10) for i in range(11)]
        return [float(dev[edges[i] + 1: edges[i + 1] + 1].max()) for i in range(10)]

    def inertial_final(self, system: BodySystem) -> InertialState:
        s = self.final_state
        return reconstruct_state(system, s) if isinstance(s, RelativeState) else s

    def summary(self, include_wall_time: bool = True) -> dict:
        pi0 = float(np.linalg.norm(self.initial.pi_T))
        out = {
            "integrator": self.integrator,
            "frame": self.frame,
            "h": self.h,
            "steps": self.n_steps,
            "t_final": self.t_final,
            "E0": self.initial.E,
            "max_energy_deviation": self.max_energy_dev,
            "energy_deviation_decile_max": self.energy_decile_max(),
            "max_orthogonality_error": self.max_orth_err,
            "max_linear_momentum_deviation": self.max_gamma_dev,
            "max_angular_momentum_deviation": self.max_pi_dev,
            "max_angular_momentum_relative_deviation": self.max_pi_dev / pi0 if pi0 > 0 else self.max_pi_dev,
            "newton_solves": self.newton_solves,
            "newton_iterations": self.newton_iterations,
            "newton_max_iterations_per_solve": self.newton_max_iterations,
        }
        if include_wall_time:
            out["wall_time_s"] = self.wall_time
        return out


def run(cfg: SimConfig, out_dir: str | Path | None = None, keep_samples: bool = False) -> RunResult:
    """Integrate ``cfg`` from t = 0 to ``t_final``.

    Diagnostics are computed after every step for the running maxima; rows
    go to ``trajectory.csv`` every ``sample_every`` steps and at the final
    step. The initial state is summarized but not written as a row.
    """
    t_start = time.perf_counter()
    system = cfg.system()
    s0 = initial_state(cfg, system)
    solver = SolverConfig(cfg.tolerance, cfg.max_iterations)
    stats = SolverStats()
    try:
        engine = make_engine(cfg.integrator, system, s0, solver, stats)
        diag = diagnostics_relative if engine.frame == "relative" else diagnostics_inertial
        d0 = diag(system, engine.state(), 0.0, engine.potential_energy())
    except StepError as exc:
        exc.step = 0
        raise
    n = cfg.n_steps if cfg.t_final > 0 else 0
    h = cfg.h

    energy_dev = np.zeros(n + 1)
    orth = np.empty(n + 1)
    orth[0] = d0.orth_err_max
    gmax = pmax = 0.0
    samples = []
    d = d0

    writer = fh = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        fh = open(out / "trajectory.csv", "w", newline="")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(csv_columns(engine.frame, system.n))
    try:
        for k in range(1, n + 1):
            try:
                engine.advance(h)
                s = engine.state()
                d = diag(system, s, k * h, engine.potential_energy())
            except StepError as exc:
                exc.step = k
                raise
            energy_dev[k] = abs(d.E - d0.E)
            orth[k] = d.orth_err_max
            gmax = max(gmax, float(np.linalg.norm(d.gamma_T - d0.gamma_T)))
            pmax = max(pmax, float(np.linalg.norm(d.pi_T - d0.pi_T)))
            if k % cfg.sample_every == 0 or k == n:
                if writer is not None:
                    writer.writerow(_row(k * h, s, d))
                if keep_samples:
                    samples.append(d)
    finally:
        if fh is not None:
            fh.close()

    result = RunResult(
        integrator=cfg.integrator,
        frame=engine.frame,
        h=h,
        n_steps=n,
        initial=d0,
        final=d,
        final_state=engine.state(),
        energy_dev=energy_dev,
        orth_err=orth,
        max_gamma_dev=gmax,
        max_pi_dev=pmax,
        newton_solves=stats.solves,
        newton_iterations=stats.iterations,
        newton_max_iterations=stats.max_iterations,
        wall_time=time.perf_counter() - t_start,
        samples=samples,
    )
    if out_dir is not None:
        with open(Path(out_dir) / "summary.json", "w") as f:
            json.dump(result.summary(), f, indent=2)
            f.write("\n")
    return result


# ------------------------------------------------------------ multi-run


def worker_count(n_jobs: int) -> int:
    try:
        cap = int(os.environ.get(THREADS_ENV, "1"))
    except ValueError:
        cap = 1
    return max(1, min(cap, n_jobs))


def _run_job(args):
    cfg, out = args
    return run(cfg, out)


def run_many(jobs: list[tuple[SimConfig, Path | None]]) -> list[RunResult]:
    """Run independent configurations, in parallel if ``FULLBODY_THREADS`` > 1."""
    workers = worker_count(len(jobs))
    if workers == 1:
        return [_run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_job, jobs))


def _rk4_partner(integrator: str) -> tuple[str, str]:
    if integrator.startswith("rk4-"):
        frame = integrator.split("-", 1)[1]
        return f"lgvi-{frame}-h", integrator
    frame = "inertial" if "inertial" in integrator else "relative"
    return integrator, f"rk4-{frame}"


def _linear_trend(y: np.ndarray) -> float:
    if y.size < 2:
        return 0.0
    x = np.arange(y.size, dtype=float)
    return float(np.polyfit(x, y, 1)[0])


def compare(cfg: SimConfig, out_dir: str | Path | None = None) -> dict:
    """Run an LGVI and the RK4 baseline in the same frame on ``cfg``.

    The report is deterministic: it contains no timings.
    """
    lgvi_name, rk_name = _rk4_partner(cfg.integrator)
    names = (lgvi_name, rk_name)
    out = Path(out_dir) if out_dir is not None else None
    jobs = [(cfg.with_overrides(integrator=n), out / n if out else None) for n in names]
    results = run_many(jobs)
    rows = {}
    for r in results:
        rows[r.integrator] = {
            "max_energy_deviation": r.max_energy_dev,
            "max_orthogonality_error": r.max_orth_err,
            "orthogonality_trend_per_step": _linear_trend(r.orth_err),
            "max_linear_momentum_deviation": r.max_gamma_dev,
            "max_angular_momentum_deviation": r.max_pi_dev,
        }
    a, b = rows[lgvi_name]["max_orthogonality_error"], rows[rk_name]["max_orthogonality_error"]
    report = {
        "h": cfg.h,
        "t_final": cfg.t_final,
        "runs": rows,
        "orthogonality_ratio_rk4_over_lgvi": b / a if a > 0 else math.inf,
    }
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "compare.json", "w") as f:
            json.dump(report, f, indent=2)
            f.write("\n")
        (out / "compare.txt").write_text(format_compare(report))
    return report


def format_compare(report: dict) -> str:
    lines = [f"h = {report['h']:.6g}, t_final = {report['t_final']:.6g}", ""]
    lines.append(f"{'integrator':<18}{'max |E - E0|':>16}{'max |I - R^T R|':>18}")
    for name, r in report["runs"].items():
        lines.append(f"{name:<18}{r['max_energy_deviation']:>16.4e}{r['max_orthogonality_error']:>18.4e}")
    lines.append("")
    lines.append(f"orthogonality ratio rk4/lgvi: {report['orthogonality_ratio_rk4_over_lgvi']:.4e}")
    return "\n".join(lines) + "\n"


def configuration_error(a: InertialState, b: InertialState) -> float:
    """Max-norm distance between two inertial configurations."""
    return float(max(np.abs(a.x - b.x).max(), np.abs(a.R - b.R).max()))


def converge(
    cfg: SimConfig,
    h_list,
    integrators=None,
    reference_h: float | None = None,
    out_dir: str | Path | None = None,
) -> dict:
    """Global error at ``t_final`` against a fine reference, per integrator.

    The reference is the Yoshida-composed LGVI at ``min(h_list) / 4`` unless
    ``reference_h`` is given. Errors are measured on the inertial
    configuration (positions and attitude entries) and the reported order is
    the least-squares slope of log(error) against log(h).
    """
    h_list = [float(h) for h in h_list]
    if len(h_list) < 3:
        raise ValueError("need at least three step sizes")
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise ValueError("step sizes must be strictly decreasing")
    integrators = list(integrators or [cfg.integrator])
    if reference_h is None:
        reference_h = min(h_list) / 4.0
    system = cfg.system()
    jobs = [(cfg.with_overrides(integrator="lgvi-yoshida4", h=reference_h), None)]
    for name in integrators:
        for h in h_list:
            jobs.append((cfg.with_overrides(integrator=name, h=h), None))
    results = run_many(jobs)
    ref = results[0].inertial_final(system)
    report = {"t_final": cfg.t_final, "reference": {"integrator": "lgvi-yoshida4", "h": reference_h}, "integrators": {}}
    i = 1
    for name in integrators:
        errs = []
        for h in h_list:
            errs.append(configuration_error(results[i].inertial_final(system), ref))
            i += 1
        slope = float(np.polyfit(np.log(h_list), np.log(errs), 1)[0])
        report["integrators"][name] = {"h": h_list, "error": errs, "order": slope}
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "converge.json", "w") as f:
            json.dump(report, f, indent=2)
            f.write("\n")
    return report
