"""Monitored functionals and certified bounds along the flow.

K_p(mu) = log(int mu^p dpi) / (p-1) and D_p(mu) = log ||mu||_p - log ||initial||_1
drive the two-phase decay envelope: super-exponential while D_p > (p-1)/p,
plain exponential with rate 2 p lambda m^beta / (p+beta)^2 afterwards. The
crossing time t0 is detected from trajectories by linear interpolation.

All bounds are evaluated with the spectral gap of the *discrete* weighted
measure, so the inequality chain (Poincare -> dissipation -> envelope) is
internally consistent on the mesh itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError, ShapeError, ZeroFieldError
from .mesh import DensityField, WeightedMesh, lp_norm
from .operators import ZERO_FLUX, apply_L, dirichlet_energy
from .operators import pressure as pressure_transform

VACUUM_THRESHOLD = 1e-8


def kp(fld: DensityField, mesh: WeightedMesh, p: float) -> float:
    """log(int mu^p dpi) / (p - 1)."""
    if p <= 1:
        raise ParameterError(f"kp needs p > 1, got {p}")
    norm = lp_norm(fld, mesh, p)
    if norm == 0.0:
        raise ZeroFieldError("kp is -inf for an identically zero field")
    return float(p * math.log(norm) / (p - 1.0))


def dp(fld: DensityField, mesh: WeightedMesh, p: float, m: float) -> float:
    """log ||mu||_p - log m, the monitored smoothing gap."""
    if p <= 1:
        raise ParameterError(f"dp needs p > 1, got {p}")
    if m <= 0:
        raise ParameterError(f"dp needs a positive reference mass, got {m}")
    norm = lp_norm(fld, mesh, p)
    if norm == 0.0:
        raise ZeroFieldError("dp is -inf for an identically zero field")
    return float(math.log(norm) - math.log(m))


def l1_distance(u: DensityField, v: DensityField, mesh: WeightedMesh) -> float:
    """Weighted L1 distance h * sum |u_i - v_i| pi_i."""
    if u.values.shape != v.values.shape:
        raise ShapeError(f"field shapes differ: {u.values.shape} vs {v.values.shape}")
    return mesh.integrate(np.abs(u.values - v.values))


@dataclass(frozen=True)
class EnvelopeParams:
    """Parameters of the two-phase decay bound.

    dp0 is D_p of the initial data and may be +inf (data merely integrable);
    admissibility requires p > 1, beta > 0 and p + beta >= 2.
    """

    lam: float
    beta: float
    p: float
    mass: float
    dp0: float

    def __post_init__(self):
        if self.lam <= 0:
            raise ParameterError(f"spectral gap must be positive, got {self.lam}")
        if self.beta <= 0:
            raise ParameterError(f"beta must be positive, got {self.beta}")
        if self.p <= 1:
            raise ParameterError(f"p must exceed 1, got {self.p}")
        if self.p + self.beta < 2:
            raise ParameterError(
                f"smoothing envelope needs p + beta >= 2, got {self.p + self.beta}")
        if self.mass <= 0:
            raise ParameterError(f"mass must be positive, got {self.mass}")
        if self.dp0 < 0:
            raise ParameterError(f"dp0 must be >= 0, got {self.dp0}")

    @property
    def threshold(self):
        """Phase boundary (p-1)/p for D_p."""
        return (self.p - 1.0) / self.p

    @property
    def phase1_coef(self):
        """Coefficient of t inside the phase-1 logarithm."""
        return (2.0 * self.beta * self.lam * (self.p - 1.0)
                / (self.p + self.beta) ** 2 * self.mass**self.beta)

    @property
    def phase2_rate(self):
        """Exponential decay rate of the late phase."""
        return (2.0 * self.p * self.lam * self.mass**self.beta
                / (self.p + self.beta) ** 2)

    def crossing_time(self):
        """Time at which the phase-1 curve reaches the threshold."""
        if self.dp0 <= self.threshold:
            return 0.0
        lo = math.exp(-self.beta * self.dp0) if np.isfinite(self.dp0) else 0.0
        return (math.exp(-self.beta * self.threshold) - lo) / self.phase1_coef


def decay_envelope(params: EnvelopeParams, t: float, t0: float | None = None,
                   dp_at_t0: float | None = None) -> float:
    """Two-phase upper bound on D_p at time t.

    With t0 = None the phase switch is the phase-1 curve's own crossing of
    (p-1)/p (value-matched, hence continuous). Passing a measured (t0,
    dp_at_t0) pins the switch to a trajectory instead.
    """
    if t <= 0:
        raise ParameterError(f"envelope needs t > 0, got {t}")
    if t0 is None:
        t0 = params.crossing_time()
        boundary = min(params.dp0, params.threshold)
    else:
        if t0 < 0:
            raise ParameterError(f"t0 must be >= 0, got {t0}")
        boundary = params.threshold if dp_at_t0 is None else dp_at_t0
    if t < t0:
        lo = math.exp(-params.beta * params.dp0) if np.isfinite(params.dp0) else 0.0
        return -math.log(lo + params.phase1_coef * t) / params.beta
    return math.exp(-params.phase2_rate * (t - t0)) * boundary


def unconditional_kp_bound(lam: float, beta: float, p: float, t: float) -> float:
    """Data-independent bound on K_p for unit-mass initial data.

    max(-p log(2 beta lam (p-1) t / (p+beta)^2) / (beta (p-1)), 1); valid for
    any initial data, however peaked.
    """
    if lam <= 0 or beta <= 0 or p <= 1:
        raise ParameterError(f"invalid bound parameters lam={lam}, beta={beta}, p={p}")
    if t <= 0:
        raise ParameterError(f"bound needs t > 0, got {t}")
    inner = 2.0 * beta * lam * (p - 1.0) * t / (p + beta) ** 2
    return max(-p * math.log(inner) / (beta * (p - 1.0)), 1.0)


def detect_t0(traj, p: float, m: float):
    """First time D_p drops to (p-1)/p, interpolated between snapshots.

    Returns 0.0 when the initial data is already below the threshold and None
    when the threshold is never attained within the horizon.
    """
    if p <= 1:
        raise ParameterError(f"detect_t0 needs p > 1, got {p}")
    threshold = (p - 1.0) / p
    values = []
    for fld in traj.fields:
        try:
            values.append(dp(fld, traj.mesh, p, m))
        except ZeroFieldError:
            values.append(-np.inf)
    times = traj.times
    if values[0] <= threshold:
        return 0.0
    for k in range(1, len(values)):
        if values[k] <= threshold:
            frac = (values[k - 1] - threshold) / (values[k - 1] - values[k])
            return float(times[k - 1] + frac * (times[k] - times[k - 1]))
    return None


def _dissipation_constant(p: float, beta: float, c_eq: float) -> float:
    c = 4.0 * p * (p - 1.0) / (p + beta) ** 2
    if c_eq == 1.0:
        c *= 1.0 + beta
    return c


def dissipation_residual(traj, i: int, p: float) -> float:
    """Relative defect of d/dt int mu^p dpi = -c * energy(mu^((p+beta)/2)).

    Uses a centered difference at interior snapshot i (uniform local spacing
    required); the defect is normalized by the energy term.
    """
    if p <= 1:
        raise ParameterError(f"dissipation_residual needs p > 1, got {p}")
    if not 1 <= i <= len(traj) - 2:
        raise ParameterError(f"snapshot index {i} is not interior (1..{len(traj) - 2})")
    times = traj.times
    dt_left = times[i] - times[i - 1]
    dt_right = times[i + 1] - times[i]
    if abs(dt_right - dt_left) > 1e-9 * max(dt_left, dt_right):
        raise ParameterError(
            f"snapshot spacing around index {i} is not uniform "
            f"({dt_left} vs {dt_right})")
    beta = traj.config.beta
    ip = [traj.mesh.integrate(traj.fields[k].values ** p) for k in (i - 1, i + 1)]
    didt = (ip[1] - ip[0]) / (times[i + 1] - times[i - 1])
    energy = dirichlet_energy(traj.fields[i].values ** (0.5 * (p + beta)), traj.mesh)
    c = _dissipation_constant(p, beta, traj.config.c_eq)
    defect = abs(didt + c * energy)
    if energy == 0.0:
        return 0.0 if didt == 0.0 else np.inf
    return float(defect / (c * energy))


def aronson_benilan_margin(fld: DensityField, mesh: WeightedMesh, beta: float,
                           t: float, c_eq: float) -> float:
    """Worst slack of the pressure lower bound L(nu) >= -c/(beta t).

    c = 1 for c_eq = 1 and 1+beta for c_eq = 1/(1+beta) (time-map of the same
    statement). Near-vacuum cells (mu < 1e-8) and the two wall cells are
    excluded; a nonnegative return means the bound holds.
    """
    if t <= 0:
        raise ParameterError(f"bound needs t > 0, got {t}")
    if beta <= 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    nu = pressure_transform(fld, beta)
    lnu = apply_L(nu, mesh, ZERO_FLUX)
    interior = np.zeros(mesh.n_cells, dtype=bool)
    interior[1:-1] = True
    included = interior & (fld.values >= VACUUM_THRESHOLD)
    if not np.any(included):
        raise DomainError("no interior cells above the vacuum threshold")
    c_ab = 1.0 if c_eq == 1.0 else 1.0 + beta
    return float(np.min(lnu[included]) + c_ab / (beta * t))


@dataclass(frozen=True)
class BarrierParams:
    """Explicit subsolution eps*(R^2 - (x-x0)^2)/(t+tau) forcing positivity."""

    epsilon: float
    tau: float
    R: float
    center: float
    zeta: float
    c: float

    def __post_init__(self):
        for name in ("epsilon", "tau", "R", "zeta", "c"):
            v = getattr(self, name)
            if v <= 0:
                raise ParameterError(f"barrier parameter {name} must be positive, got {v}")

    def value(self, x, t):
        """Barrier evaluated at positions x and time t."""
        x = np.asarray(x, dtype=float)
        return self.epsilon * (self.R**2 - (x - self.center) ** 2) / (t + self.tau)


def barrier_select(c: float, R: float, x0: float, zeta: float, beta: float,
                   potential) -> BarrierParams:
    """Pick (epsilon, tau) so the barrier starts below c and stays admissible.

    epsilon = min(1, 1/(2 beta (M+1))) with M the sampled sup over the ball of
    |-2 + 2 V'(x)(x-x0)|; tau = epsilon (R^2 + zeta) / c. Both parabolicity
    conditions then hold by construction.
    """
    if c <= 0 or zeta <= 0 or R <= 0:
        raise ParameterError(f"barrier needs c, zeta, R > 0 (got {c}, {zeta}, {R})")
    if beta <= 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    xs = x0 + np.linspace(-R, R, 10**4)
    vp = np.asarray(potential.grad(xs), dtype=float)
    if not np.all(np.isfinite(vp)):
        x_bad = xs[~np.isfinite(vp)][0]
        raise DomainError(f"potential gradient is not finite at x = {x_bad}")
    m_sup = float(np.max(np.abs(-2.0 + 2.0 * vp * (xs - x0))))
    epsilon = min(1.0, 1.0 / (2.0 * beta * (m_sup + 1.0)))
    tau = epsilon * (R**2 + zeta) / c
    return BarrierParams(epsilon=epsilon, tau=tau, R=R, center=x0, zeta=zeta, c=c)


def barrier_margin(traj, mesh: WeightedMesh, beta: float, params: BarrierParams,
                   c_eq: float) -> float:
    """Worst slack of nu >= barrier over the ball across all snapshots.

    For c_eq = 1/(1+beta) the barrier is evaluated at the mapped time
    s = t/(1+beta). Nonnegative return means the positivity bound holds.
    """
    if beta <= 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    x = mesh.centers
    ball = np.abs(x - params.center) < params.R
    if not np.any(ball):
        raise DomainError("no mesh cells inside the barrier ball")
    nu0 = pressure_transform(traj.fields[0], beta)
    low = nu0[ball] - params.c
    if np.min(low) < -1e-12:
        cell = int(np.flatnonzero(ball)[np.argmin(low)])
        raise DomainError(
            f"initial pressure {nu0[cell]:.3e} at cell {cell} is below c = {params.c}")
    time_scale = 1.0 if c_eq == 1.0 else 1.0 / (1.0 + beta)
    worst = np.inf
    for t, fld in zip(traj.times, traj.fields):
        nu = pressure_transform(fld, beta)
        gap = nu[ball] - params.value(x[ball], time_scale * t)
        worst = min(worst, float(np.min(gap)))
    return worst
