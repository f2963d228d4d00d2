"""Scenario runner: one config in, trajectory.csv + summary.csv out.

The trajectory file holds the monitored functionals together with the bound
columns; the summary file holds one row per requested check with the measured
quantity, its bound and the remaining slack. A check passes when
measured <= bound, and the runner's exit status is 0 exactly when all rows
pass. Output is deterministic for a fixed config and seed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis
from .config import RunConfig, build_initial
from .errors import ConfigError, DomainError, SolverError, StabilityError
from .evolve import SolverConfig, run, run_dirichlet_cascade, rescale_solution
from .mesh import DensityField, build_mesh
from .operators import BoundaryCondition, pressure
from .spectral import estimate_poincare

TRAJECTORY_COLUMNS = ("t", "mass", "kp", "dp", "envelope", "unconditional_bound",
                      "dissipation_lhs", "dissipation_rhs", "ab_margin")

SUMMARY_COLUMNS = ("check", "status", "measured", "bound", "slack")


@dataclass(frozen=True)
class CheckRow:
    check: str
    status: str
    measured: float
    bound: float

    @property
    def slack(self):
        return self.bound - self.measured

    @property
    def passed(self):
        return self.status == "pass"


@dataclass(frozen=True)
class ScenarioResult:
    status: int
    rows: tuple
    trajectory_path: Path
    summary_path: Path


def _fmt(v):
    return f"{v:.12g}"


def _solver_config(cfg: RunConfig, bc: BoundaryCondition | None = None) -> SolverConfig:
    return SolverConfig(
        beta=cfg.beta, c_eq=cfg.c_eq, scheme=cfg.scheme,
        cfl_safety=cfg.cfl_safety, dt_max=cfg.dt_max,
        newton_tol=cfg.newton_tol, newton_max_iter=cfg.newton_max_iter,
        bc=bc if bc is not None else cfg.bc)


def _row(check, measured, bound):
    ok = np.isfinite(measured) and measured <= bound
    return CheckRow(check=check, status="pass" if ok else "fail",
                    measured=float(measured), bound=float(bound))


def _envelope_columns(cfg, traj, lam):
    """Envelope and data-independent bound per snapshot, D_p scale."""
    p, beta = cfg.p, cfg.beta
    m0 = float(traj.mass[0])
    if m0 <= 0:
        return [np.nan] * len(traj), [np.nan] * len(traj)
    dp0 = float(traj.dp[0])
    params = analysis.EnvelopeParams(lam=lam, beta=beta, p=p, mass=m0,
                                     dp0=dp0 if np.isfinite(dp0) else np.inf)
    t0 = analysis.detect_t0(traj, p, m0)
    dp_at = None
    if t0 is not None and t0 == 0.0:
        dp_at = min(dp0, params.threshold)
    env, unc = [], []
    for t in traj.times:
        if t <= 0:
            env.append(dp0 if np.isfinite(dp0) else np.inf)
            unc.append(np.inf)
            continue
        env.append(analysis.decay_envelope(params, float(t), t0=t0, dp_at_t0=dp_at))
        kb = analysis.unconditional_kp_bound(lam, beta, p, m0**beta * float(t))
        unc.append((p - 1.0) / p * kb)
    return env, unc


def _dissipation_columns(cfg, traj):
    p, beta = cfg.p, cfg.beta
    const = 4.0 * p * (p - 1.0) / (p + beta) ** 2
    if cfg.c_eq == 1.0:
        const *= 1.0 + beta
    n = len(traj)
    lhs = [np.nan] * n
    rhs = [np.nan] * n
    ip = [traj.mesh.integrate(f.values**p) for f in traj.fields]
    for k in range(n):
        rhs[k] = -const * traj.energy[k]
        if 1 <= k <= n - 2:
            lhs[k] = (ip[k + 1] - ip[k - 1]) / (traj.times[k + 1] - traj.times[k - 1])
    return lhs, rhs


def _ab_column(cfg, traj):
    out = []
    for t, fld in zip(traj.times, traj.fields):
        if t <= 0:
            out.append(np.nan)
            continue
        try:
            out.append(analysis.aronson_benilan_margin(fld, traj.mesh, cfg.beta,
                                                       float(t), cfg.c_eq))
        except DomainError:
            out.append(np.nan)
    return out


def write_trajectory_csv(path, cfg, traj, lam):
    env, unc = _envelope_columns(cfg, traj, lam)
    lhs, rhs = _dissipation_columns(cfg, traj)
    ab = _ab_column(cfg, traj)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(TRAJECTORY_COLUMNS) + "\n")
        for k, t in enumerate(traj.times):
            cells = (t, traj.mass[k], traj.kp[k], traj.dp[k], env[k], unc[k],
                     lhs[k], rhs[k], ab[k])
            fh.write(",".join(_fmt(float(c)) for c in cells) + "\n")


def write_summary_csv(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for r in rows:
            fh.write(f"{r.check},{r.status},{_fmt(r.measured)},{_fmt(r.bound)},"
                     f"{_fmt(r.slack)}\n")


def _check_mass(cfg, traj):
    m0 = traj.mass[0]
    if m0 > 0:
        measured = float(np.max(np.abs(traj.mass - m0)) / m0)
    else:
        measured = float(np.max(np.abs(traj.mass)))
    return _row("mass", measured, 1e-10)


def _check_envelope(cfg, traj, lam):
    env, _ = _envelope_columns(cfg, traj, lam)
    over = [traj.dp[k] - env[k] for k, t in enumerate(traj.times) if t >= 0.05]
    measured = max(0.0, max(over)) if over else np.nan
    return _row("envelope", measured, 0.05)


def _check_dissipation(cfg, traj):
    worst = -np.inf
    usable = 0
    for i in range(1, len(traj) - 1):
        dtl = traj.times[i] - traj.times[i - 1]
        dtr = traj.times[i + 1] - traj.times[i]
        if abs(dtr - dtl) > 1e-9 * max(dtl, dtr):
            continue
        if min(f.values.min() for f in traj.fields[i - 1:i + 2]) < 1e-6:
            continue
        usable += 1
        worst = max(worst, analysis.dissipation_residual(traj, i, cfg.p))
    measured = worst if usable else np.nan
    return _row("dissipation", measured, 0.02)


def _check_contraction(cfg, mesh, traj):
    scfg = _solver_config(cfg)
    other = build_initial(cfg.initial2, mesh)
    traj2 = run(other, mesh, scfg, cfg.T, traj.times, cfg.p)
    dists = [analysis.l1_distance(a, b, mesh)
             for a, b in zip(traj.fields, traj2.fields)]
    measured = float(np.max(np.diff(dists))) if len(dists) > 1 else 0.0
    return _row("contraction", measured, 1e-8 + 10.0 * mesh.h**2)


def _check_comparison(cfg, mesh, traj):
    scfg = _solver_config(cfg)
    upper = DensityField(traj.fields[0].values + 0.1)
    traj_up = run(upper, mesh, scfg, cfg.T, traj.times, cfg.p)
    gap = min(float(np.min(a.values - b.values))
              for a, b in zip(traj_up.fields, traj.fields))
    return _row("comparison", -gap, 1e-8)


def _check_ab(cfg, traj):
    worst = -np.inf
    seen = False
    for t, fld in zip(traj.times, traj.fields):
        if t < 0.05:
            continue
        margin = analysis.aronson_benilan_margin(fld, traj.mesh, cfg.beta,
                                                 float(t), cfg.c_eq)
        worst = max(worst, -margin - 0.05 / (cfg.beta * float(t)))
        seen = True
    return _row("ab", worst if seen else np.nan, 0.0)


def _check_barrier(cfg, mesh, traj):
    x0 = cfg.barrier_ball["center"]
    r = cfg.barrier_ball["radius"]
    x = mesh.centers
    ball = np.abs(x - x0) < r
    edge = (np.abs(x - x0) >= r - mesh.h) & (np.abs(x - x0) <= r + mesh.h)
    if not ball.any() or not edge.any():
        return _row("barrier", np.nan, 10.0 * mesh.h**2)
    nu0 = pressure(traj.fields[0], cfg.beta)
    c = float(np.min(nu0[ball]))
    zeta = min(float(np.min(pressure(f, cfg.beta)[edge])) for f in traj.fields)
    if c <= 0 or zeta <= 0:
        return _row("barrier", np.nan, 10.0 * mesh.h**2)
    params = analysis.barrier_select(c, r, x0, zeta, cfg.beta, cfg.potential)
    margin = analysis.barrier_margin(traj, mesh, cfg.beta, params, cfg.c_eq)
    return _row("barrier", -margin, 10.0 * mesh.h**2)


def _check_scaling(cfg, mesh, traj):
    eta = 2.0
    scfg = _solver_config(cfg)
    rescaled = rescale_solution(traj, eta)
    scaled_init = DensityField(eta * traj.fields[0].values)
    traj2 = run(scaled_init, mesh, scfg, float(rescaled.times[-1]),
                rescaled.times, cfg.p)
    measured = max(analysis.l1_distance(a, b, mesh)
                   for a, b in zip(rescaled.fields, traj2.fields))
    return _row("scaling", measured, 5e-4)


def _check_cascade(cfg, mesh):
    if cfg.bc.kind != "dirichlet":
        raise ConfigError("checks: cascade requires bc.kind = dirichlet")
    base = build_initial(cfg.initial, mesh)
    scfg = _solver_config(cfg)
    times = cfg.resolve_output_times()
    levels = cfg.cascade_levels
    trajs = run_dirichlet_cascade(base, mesh, scfg, cfg.T, levels,
                                  output_times=times, p=cfg.p)
    # level i has the larger wall value and must dominate level i+1 pointwise
    ordering = max(float(np.max(deep.values - shallow.values))
                   for upper, lower in zip(trajs[:-1], trajs[1:])
                   for shallow, deep in zip(upper.fields, lower.fields))
    gaps = np.array([analysis.l1_distance(a, b, mesh)
                     for a, b in zip(trajs[-2].fields, trajs[-1].fields)])
    gap_slack = 1e-8 + 10.0 * mesh.h**2
    ok = (ordering <= 1e-8
          and gaps[0] <= 2.0 * 2.0**-levels
          and np.max(np.diff(gaps)) <= gap_slack)
    return CheckRow(check="cascade", status="pass" if ok else "fail",
                    measured=float(ordering), bound=1e-8)


def run_scenario(cfg: RunConfig, out_dir) -> ScenarioResult:
    """Run one scenario and write trajectory.csv / summary.csv into out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    traj_path = out_dir / "trajectory.csv"
    summary_path = out_dir / "summary.csv"

    mesh = build_mesh(cfg.potential, cfg.R, cfg.n)
    lam = estimate_poincare(mesh).lam
    initial = build_initial(cfg.initial, mesh)
    times = cfg.resolve_output_times()

    rows = []
    try:
        traj = run(initial, mesh, _solver_config(cfg), cfg.T, times, cfg.p)
    except SolverError as err:
        if err.partial is not None:
            write_trajectory_csv(traj_path, cfg, err.partial, lam)
        else:
            traj_path.write_text(",".join(TRAJECTORY_COLUMNS) + "\n", encoding="utf-8")
        kind = "stability" if isinstance(err, StabilityError) else "newton"
        dt_bad = getattr(err, "dt", None)
        rows.append(CheckRow(check=f"solver_{kind}", status="fail",
                             measured=float(dt_bad) if dt_bad else np.nan,
                             bound=np.nan))
        write_summary_csv(summary_path, rows)
        return ScenarioResult(status=1, rows=tuple(rows),
                              trajectory_path=traj_path, summary_path=summary_path)

    write_trajectory_csv(traj_path, cfg, traj, lam)
    for name in cfg.checks:
        if name == "mass":
            rows.append(_check_mass(cfg, traj))
        elif name == "envelope":
            rows.append(_check_envelope(cfg, traj, lam))
        elif name == "dissipation":
            rows.append(_check_dissipation(cfg, traj))
        elif name == "contraction":
            rows.append(_check_contraction(cfg, mesh, traj))
        elif name == "comparison":
            rows.append(_check_comparison(cfg, mesh, traj))
        elif name == "ab":
            rows.append(_check_ab(cfg, traj))
        elif name == "barrier":
            rows.append(_check_barrier(cfg, mesh, traj))
        elif name == "scaling":
            rows.append(_check_scaling(cfg, mesh, traj))
        elif name == "cascade":
            rows.append(_check_cascade(cfg, mesh))
    write_summary_csv(summary_path, rows)
    status = 0 if all(r.passed for r in rows) else 1
    return ScenarioResult(status=status, rows=tuple(rows),
                          trajectory_path=traj_path, summary_path=summary_path)


def poincare_report(cfg: RunConfig, n_vectors: int = 200):
    """Estimate the gap for a config and validate the variational inequality.

    Draws n_vectors random zero-mean vectors with the config's seed and
    returns (result, worst_violation); the inequality holds when the worst
    violation is <= 0.
    """
    mesh = build_mesh(cfg.potential, cfg.R, cfg.n)
    res = estimate_poincare(mesh)
    rng = np.random.default_rng(cfg.seed)
    from .operators import dirichlet_energy, weighted_inner

    worst = -np.inf
    for _ in range(n_vectors):
        u = rng.standard_normal(mesh.n_cells)
        u -= mesh.integrate(u)  # zero pi-mean on the probability measure
        norm_sq = weighted_inner(u, u, mesh)
        if norm_sq == 0.0:
            continue
        worst = max(worst, (res.lam - 1e-9) * norm_sq - dirichlet_energy(u, mesh))
    return res, worst


def resolve_out_dir(name: str, cli_out=None) -> Path:
    """Output directory: --out wins, then $PMELAB_OUT/<name>, then ./pmelab_out/<name>."""
    if cli_out:
        return Path(cli_out)
    base = os.environ.get("PMELAB_OUT")
    if base:
        return Path(base) / name
    return Path("pmelab_out") / name
