"""Pure-NumPy stepping kernels, the fallback backend.

Semantics are shared with the compiled backend in ``_kernels.pyx``: flux-form
update, negativity clamp at -1e-13, per-step CFL dt with truncation landing
on the target time. Status codes instead of exceptions so both backends stay
interchangeable; the solver layer turns them into typed errors.
"""

import numpy as np

NEG_TOL = 1e-13

STATUS_OK = 0
STATUS_UNSTABLE = 1
STATUS_STEP_BUDGET = 2


def _psi(mu, beta):
    if beta == 1.0:
        return mu * mu
    return mu ** (1.0 + beta)


def _step(mu, pi_c, pi_f, h2, beta, c_eq, dt, bc_kind, psig):
    """One forward-Euler flux-form update. Returns (mu_new, bad_cell)."""
    w = _psi(mu, beta)
    g = np.empty(mu.size + 1)
    g[1:-1] = pi_f[1:-1] * np.diff(w)
    if bc_kind == 0:
        g[0] = 0.0
        g[-1] = 0.0
    else:
        g[0] = 2.0 * pi_f[0] * (w[0] - psig)
        g[-1] = 2.0 * pi_f[-1] * (psig - w[-1])
    out = mu + (dt * c_eq / h2) * np.diff(g) / pi_c
    worst = out.min()
    if worst < 0.0:
        if worst < -NEG_TOL:
            return out, int(np.argmin(out))
        np.maximum(out, 0.0, out=out)
    return out, -1


def explicit_step(mu, pi_c, pi_f, h, beta, c_eq, dt, bc_kind, bc_value):
    """Single explicit step. Returns (mu_new, bad_cell); bad_cell = -1 on success."""
    psig = bc_value ** (1.0 + beta) if bc_kind == 1 else 0.0
    return _step(np.array(mu, dtype=float), pi_c, pi_f, h * h, beta, c_eq, dt,
                 bc_kind, psig)


def explicit_advance(mu, pi_c, pi_f, h, beta, c_eq, safety, dt_max, wmax,
                     t_start, t_end, bc_kind, bc_value, max_steps):
    """Advance from t_start to t_end with per-step CFL dt.

    Returns (mu_final, n_steps, status, bad_cell, bad_dt).
    """
    mu = np.array(mu, dtype=float)
    h2 = h * h
    psig = bc_value ** (1.0 + beta) if bc_kind == 1 else 0.0
    denom = 2.0 * c_eq * (1.0 + beta) * wmax
    t = t_start
    steps = 0
    while t < t_end:
        remaining = t_end - t
        if remaining <= 1e-15 * max(1.0, abs(t_end)):
            break
        mumax = mu.max()
        if mumax <= 0.0:
            dt = dt_max
        else:
            dt = min(dt_max, safety * h2 / (denom * mumax**beta))
        landing = dt >= remaining * (1.0 - 1e-12)
        if landing:
            dt = remaining
        if steps >= max_steps:
            return mu, steps, STATUS_STEP_BUDGET, -1, dt
        mu, bad = _step(mu, pi_c, pi_f, h2, beta, c_eq, dt, bc_kind, psig)
        if bad >= 0:
            return mu, steps, STATUS_UNSTABLE, bad, dt
        steps += 1
        t = t_end if landing else t + dt
    return mu, steps, STATUS_OK, -1, 0.0
