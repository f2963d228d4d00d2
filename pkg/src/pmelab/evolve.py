"""Time integration of d(mu)/dt = c_eq * L psi(mu).

Two normalizations of the evolution coefficient are first class:
c_eq = 1/(1+beta) (the default) and c_eq = 1; they differ by a global time
rescale. The explicit scheme is the reference integrator (monotone under the
CFL bound, so discrete comparison holds structurally); the implicit scheme is
a backward-Euler/Newton solver for stiff runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded

from . import analysis, kernels
from .errors import NewtonError, ParameterError, ShapeError, StabilityError, ZeroFieldError
from .mesh import DensityField, WeightedMesh
from .operators import ZERO_FLUX, BoundaryCondition, dirichlet_energy, stencil_bands

SCHEMES = ("explicit_euler", "implicit_euler")

_MAX_STEPS_PER_INTERVAL = 10**9


@dataclass(frozen=True)
class SolverConfig:
    """Scheme selection, equation normalization and tolerances.

    c_eq = None selects 1/(1+beta). cfl_safety > 1 is accepted (it produces a
    deliberately unstable explicit run, which the stepper then reports as a
    stability violation).
    """

    beta: float
    c_eq: float | None = None
    scheme: str = "explicit_euler"
    cfl_safety: float = 0.2
    dt_max: float = 1e-2
    newton_tol: float = 1e-11
    newton_max_iter: int = 50
    bc: BoundaryCondition = field(default_factory=lambda: ZERO_FLUX)

    def __post_init__(self):
        if self.beta <= 0:
            raise ParameterError(f"beta must be positive, got {self.beta}")
        c = self.c_eq
        if c is None:
            c = 1.0 / (1.0 + self.beta)
            object.__setattr__(self, "c_eq", c)
        if not (c == 1.0 or abs(c - 1.0 / (1.0 + self.beta)) <= 1e-12):
            raise ParameterError(
                f"c_eq must be 1 or 1/(1+beta)={1.0 / (1.0 + self.beta)}, got {c}"
            )
        if self.scheme not in SCHEMES:
            raise ParameterError(f"unknown scheme {self.scheme!r}")
        if self.cfl_safety <= 0:
            raise ParameterError(f"cfl_safety must be positive, got {self.cfl_safety}")
        if self.dt_max <= 0:
            raise ParameterError(f"dt_max must be positive, got {self.dt_max}")
        if self.newton_tol <= 0:
            raise ParameterError(f"newton_tol must be positive, got {self.newton_tol}")


@dataclass(frozen=True)
class Trajectory:
    """Ordered snapshots with per-snapshot diagnostics.

    Diagnostics: mass m(t), K_p(t), D_p(t) (against the initial mass) and the
    Dirichlet energy of mu^((p+beta)/2). K_p/D_p are -inf for a zero field.
    """

    mesh: WeightedMesh
    config: SolverConfig
    p: float
    times: np.ndarray
    fields: tuple
    mass: np.ndarray
    kp: np.ndarray
    dp: np.ndarray
    energy: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.size == 0 or t[0] != 0.0:
            raise ParameterError("trajectory times must start at 0")
        if np.any(np.diff(t) <= 0):
            raise ParameterError("trajectory times must be strictly increasing")

    @property
    def snapshots(self):
        return list(zip(self.times.tolist(), self.fields))

    def __len__(self):
        return len(self.fields)


def _record(mesh, fld, p, beta, m0):
    m = mesh.integrate(fld.values)
    try:
        k = analysis.kp(fld, mesh, p)
        d = analysis.dp(fld, mesh, p, m0) if m0 > 0 else -np.inf
    except ZeroFieldError:
        k = -np.inf
        d = -np.inf
    e = dirichlet_energy(fld.values ** (0.5 * (p + beta)), mesh)
    return m, k, d, e


def _make_trajectory(mesh, cfg, p, times, fields, m0):
    diags = [_record(mesh, f, p, cfg.beta, m0) for f in fields]
    m, k, d, e = (np.array(col) for col in zip(*diags))
    return Trajectory(mesh=mesh, config=cfg, p=p, times=np.asarray(times, dtype=float),
                      fields=tuple(fields), mass=m, kp=k, dp=d, energy=e)


def stable_dt(fld: DensityField, mesh: WeightedMesh, cfg: SolverConfig) -> float:
    """CFL time step for the explicit scheme.

    min(dt_max, cfl_safety * h^2 / (2 c_eq (1+beta) max(mu)^beta w_max)) with
    w_max the mesh's worst face-to-cell weight ratio; dt_max when mu = 0.
    """
    mumax = float(np.max(fld.values)) if len(fld) else 0.0
    if mumax <= 0.0:
        return cfg.dt_max
    denom = 2.0 * cfg.c_eq * (1.0 + cfg.beta) * mumax**cfg.beta * mesh.cfl_weight_max
    return min(cfg.dt_max, cfg.cfl_safety * mesh.h**2 / denom)


def _bc_args(bc: BoundaryCondition):
    return (0, 0.0) if bc.kind == "zero_flux" else (1, bc.value)


def step_explicit(fld: DensityField, mesh: WeightedMesh, cfg: SolverConfig,
                  dt: float) -> DensityField:
    """One forward-Euler step mu + dt c_eq L psi(mu); caller enforces dt."""
    if fld.values.shape[0] != mesh.n_cells:
        raise ShapeError(f"field has {len(fld)} cells but mesh has {mesh.n_cells}")
    bc_kind, bc_value = _bc_args(cfg.bc)
    out, bad = kernels.explicit_step(fld.values, mesh.cell_weights, mesh.face_weights,
                                     mesh.h, cfg.beta, cfg.c_eq, dt, bc_kind, bc_value)
    if bad >= 0:
        raise StabilityError(
            f"explicit step produced {out[bad]:.3e} < -1e-13 in cell {bad} at dt={dt:.3e}",
            dt=dt, cell=bad)
    return DensityField(out, time=fld.time + dt)


def _newton_solve(mu, mesh, cfg, dt):
    """Backward-Euler solve for one step; returns (values, iterations, residual)."""
    # bands for a unit wall value: the affine term scales linearly, and the
    # stepped operator acts on psi(mu) whose wall value is psi(g), not g
    unit_bc = cfg.bc if cfg.bc.kind == "zero_flux" else BoundaryCondition("dirichlet", 1.0)
    lower, diag, upper, b_unit = stencil_bands(mesh, unit_bc)
    beta = cfg.beta
    a = dt * cfg.c_eq
    psig = cfg.bc.value ** (1.0 + beta) if cfg.bc.kind == "dirichlet" else 0.0
    rhs_const = a * b_unit * psig
    y = mu.copy()
    resid = np.inf
    for it in range(cfg.newton_max_iter):
        yc = np.maximum(y, 0.0)
        w = yc ** (1.0 + beta)
        lw = np.empty_like(y)
        lw[:] = diag * w
        lw[:-1] += upper[:-1] * w[1:]
        lw[1:] += lower[1:] * w[:-1]
        f = y - a * lw - rhs_const - mu
        resid = float(np.max(np.abs(f)))
        if resid <= cfg.newton_tol:
            return np.maximum(y, 0.0), it, resid
        dpsi = (1.0 + beta) * yc**beta
        ab = np.zeros((3, y.size))
        ab[0, 1:] = -a * upper[:-1] * dpsi[1:]
        ab[1, :] = 1.0 - a * diag * dpsi
        ab[2, :-1] = -a * lower[1:] * dpsi[:-1]
        y = y - solve_banded((1, 1), ab, f)
    raise NewtonError(
        f"Newton stalled after {cfg.newton_max_iter} iterations "
        f"(residual {resid:.3e}, dt={dt:.3e})",
        residual=resid, iterations=cfg.newton_max_iter)


def step_implicit(fld: DensityField, mesh: WeightedMesh, cfg: SolverConfig,
                  dt: float) -> DensityField:
    """One backward-Euler step solved by Newton with a tridiagonal Jacobian."""
    if fld.values.shape[0] != mesh.n_cells:
        raise ShapeError(f"field has {len(fld)} cells but mesh has {mesh.n_cells}")
    out, _, _ = _newton_solve(fld.values, mesh, cfg, dt)
    return DensityField(out, time=fld.time + dt)


def _advance_explicit(values, mesh, cfg, t0, t1):
    bc_kind, bc_value = _bc_args(cfg.bc)
    out, steps, status, bad, bad_dt = kernels.explicit_advance(
        values, mesh.cell_weights, mesh.face_weights, mesh.h, cfg.beta, cfg.c_eq,
        cfg.cfl_safety, cfg.dt_max, mesh.cfl_weight_max, t0, t1,
        bc_kind, bc_value, _MAX_STEPS_PER_INTERVAL)
    if status == kernels.STATUS_UNSTABLE:
        raise StabilityError(
            f"explicit step produced {out[bad]:.3e} < -1e-13 in cell {bad} "
            f"at dt={bad_dt:.3e}", dt=bad_dt, cell=bad)
    if status == kernels.STATUS_STEP_BUDGET:
        raise StabilityError(
            f"step budget {_MAX_STEPS_PER_INTERVAL} exhausted before t={t1}",
            dt=bad_dt, cell=-1)
    return out


def _advance_implicit(values, mesh, cfg, t0, t1):
    t = t0
    cur = values
    min_dt = cfg.dt_max * 2.0**-40
    while t < t1 - 1e-15 * max(1.0, t1):
        dt = min(cfg.dt_max, t1 - t)
        while True:
            try:
                cur_new, _, _ = _newton_solve(cur, mesh, cfg, dt)
                break
            except NewtonError:
                dt *= 0.5
                if dt < min_dt:
                    raise
        cur = cur_new
        t += dt
    return cur


def _normalize_output_times(output_times, T):
    times = np.atleast_1d(np.asarray(output_times, dtype=float))
    if times.size == 0:
        times = np.array([0.0, T])
    if np.any(np.diff(times) <= 0):
        raise ParameterError("output_times must be strictly increasing")
    if times[0] < 0 or times[-1] > T * (1 + 1e-12):
        raise ParameterError(f"output_times must lie in [0, {T}]")
    if times[0] > 0.0:
        times = np.concatenate([[0.0], times])
    return times


def run(initial: DensityField, mesh: WeightedMesh, cfg: SolverConfig, T: float,
        output_times, p: float) -> Trajectory:
    """Integrate to T, recording snapshots at output_times by dt truncation.

    Snapshot times always include t = 0. Step failures propagate annotated
    with the time reached and carry the partial trajectory.
    """
    if T <= 0:
        raise ParameterError(f"horizon must be positive, got {T}")
    if p <= 1:
        raise ParameterError(f"diagnostics need p > 1, got {p}")
    if initial.values.shape[0] != mesh.n_cells:
        raise ShapeError(f"field has {len(initial)} cells but mesh has {mesh.n_cells}")
    times = _normalize_output_times(output_times, T)
    m0 = mesh.integrate(initial.values)

    advance = _advance_explicit if cfg.scheme == "explicit_euler" else _advance_implicit
    fields = [DensityField(initial.values.copy(), time=0.0)]
    cur = fields[0].values
    for t_prev, t_next in zip(times[:-1], times[1:]):
        try:
            cur = advance(cur, mesh, cfg, t_prev, t_next)
        except (StabilityError, NewtonError) as err:
            err.t_reached = t_prev
            err.partial = _make_trajectory(mesh, cfg, p, times[: len(fields)], fields, m0)
            raise
        fields.append(DensityField(cur, time=float(t_next)))
    return _make_trajectory(mesh, cfg, p, times, fields, m0)


def run_dirichlet_cascade(initial: DensityField, mesh: WeightedMesh,
                          cfg: SolverConfig, T: float, levels: int,
                          output_times=None, p: float = 2.0) -> list:
    """Run the monotone family of Dirichlet problems g_i = 2^-i, i = 1..levels.

    Level i evolves initial + 2^-i with boundary value 2^-i; all levels share
    the same snapshot grid so they can be compared pointwise.
    """
    if levels < 2:
        raise ParameterError(f"need at least 2 cascade levels, got {levels}")
    if cfg.bc.kind != "dirichlet":
        raise ParameterError("cascade requires a dirichlet boundary condition")
    if output_times is None:
        output_times = np.linspace(0.0, T, 9)
    trajectories = []
    for i in range(1, levels + 1):
        g = 2.0**-i
        cfg_i = replace(cfg, bc=BoundaryCondition("dirichlet", g))
        init_i = DensityField(initial.values + g, time=0.0)
        trajectories.append(run(init_i, mesh, cfg_i, T, output_times, p))
    return trajectories


def rescale_solution(traj: Trajectory, eta: float) -> Trajectory:
    """Map a run to the solution with initial data scaled by eta.

    Values scale by eta and times by eta^-beta; diagnostics are recomputed
    for the scaled snapshots.
    """
    if eta <= 0:
        raise ParameterError(f"eta must be positive, got {eta}")
    beta = traj.config.beta
    times = traj.times * eta**-beta
    fields = [DensityField(eta * f.values, time=float(t))
              for t, f in zip(times, traj.fields)]
    m0 = traj.mesh.integrate(fields[0].values)
    return _make_trajectory(traj.mesh, traj.config, traj.p, times, fields, m0)
