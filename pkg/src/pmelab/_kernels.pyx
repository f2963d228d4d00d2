# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernels (hot loop of the explicit scheme).

Mirrors the semantics of ``_kernels_py``: flux-form update, negativity clamp
at -1e-13, per-step CFL dt with truncation landing. On a stability violation
the offending cell keeps its unclamped value so callers can report it.
"""

from libc.math cimport pow

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF NEG_TOL = 1e-13

STATUS_OK = 0
STATUS_UNSTABLE = 1
STATUS_STEP_BUDGET = 2


cdef inline double _psi_scalar(double x, double beta) noexcept nogil:
    if beta == 1.0:
        return x * x
    return pow(x, 1.0 + beta)


cdef int _step_inplace(double[::1] mu, double[::1] w, double[::1] pi_c,
                       double[::1] pi_f, double h2, double beta, double c_eq,
                       double dt, int bc_kind, double psig,
                       double* newmax) noexcept nogil:
    """One flux-form update, writing mu in place. Returns bad cell or -1."""
    cdef Py_ssize_t n = mu.shape[0]
    cdef Py_ssize_t i
    cdef double coef = dt * c_eq / h2
    cdef double fl, fr, val, mx
    cdef int bad = -1

    for i in range(n):
        w[i] = _psi_scalar(mu[i], beta)

    if bc_kind == 0:
        fl = 0.0
    else:
        fl = 2.0 * pi_f[0] * (w[0] - psig)

    mx = 0.0
    for i in range(n):
        if i < n - 1:
            fr = pi_f[i + 1] * (w[i + 1] - w[i])
        elif bc_kind == 0:
            fr = 0.0
        else:
            fr = 2.0 * pi_f[n] * (psig - w[n - 1])
        val = mu[i] + coef * (fr - fl) / pi_c[i]
        if val < 0.0:
            if val < -NEG_TOL:
                if bad < 0:
                    bad = <int> i
            else:
                val = 0.0
        mu[i] = val
        if val > mx:
            mx = val
        fl = fr
    newmax[0] = mx
    return bad


def explicit_step(mu, pi_c, pi_f, double h, double beta, double c_eq,
                  double dt, int bc_kind, double bc_value):
    """Single explicit step. Returns (mu_new, bad_cell); bad_cell = -1 on success."""
    cdef cnp.ndarray[double, ndim=1] out = np.array(mu, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] w = np.empty_like(out)
    cdef double[::1] pc = np.ascontiguousarray(pi_c, dtype=np.float64)
    cdef double[::1] pf = np.ascontiguousarray(pi_f, dtype=np.float64)
    cdef double psig = pow(bc_value, 1.0 + beta) if bc_kind == 1 else 0.0
    cdef double mx = 0.0
    cdef int bad
    bad = _step_inplace(out, w, pc, pf, h * h, beta, c_eq, dt, bc_kind, psig, &mx)
    return out, bad


def explicit_advance(mu, pi_c, pi_f, double h, double beta, double c_eq,
                     double safety, double dt_max, double wmax,
                     double t_start, double t_end, int bc_kind,
                     double bc_value, long max_steps):
    """Advance from t_start to t_end with per-step CFL dt.

    Returns (mu_final, n_steps, status, bad_cell, bad_dt).
    """
    cdef cnp.ndarray[double, ndim=1] state = np.array(mu, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] w = np.empty_like(state)
    cdef double[::1] mv = state
    cdef double[::1] wv = w
    cdef double[::1] pc = np.ascontiguousarray(pi_c, dtype=np.float64)
    cdef double[::1] pf = np.ascontiguousarray(pi_f, dtype=np.float64)
    cdef double h2 = h * h
    cdef double psig = pow(bc_value, 1.0 + beta) if bc_kind == 1 else 0.0
    cdef double denom = 2.0 * c_eq * (1.0 + beta) * wmax
    cdef double t = t_start
    cdef double tiny = 1e-15 * max(1.0, abs(t_end))
    cdef long steps = 0
    cdef long hit_budget = 0
    cdef double mumax, dt, remaining, mx
    cdef double bad_dt = 0.0
    cdef int bad = -1
    cdef int landing
    cdef Py_ssize_t i, n = state.shape[0]

    mumax = 0.0
    for i in range(n):
        if mv[i] > mumax:
            mumax = mv[i]

    with nogil:
        while t < t_end:
            remaining = t_end - t
            if remaining <= tiny:
                break
            if mumax <= 0.0:
                dt = dt_max
            else:
                dt = safety * h2 / (denom * pow(mumax, beta))
                if dt > dt_max:
                    dt = dt_max
            landing = dt >= remaining * (1.0 - 1e-12)
            if landing:
                dt = remaining
            if steps >= max_steps:
                hit_budget = 1
                bad_dt = dt
                break
            bad = _step_inplace(mv, wv, pc, pf, h2, beta, c_eq, dt,
                                bc_kind, psig, &mx)
            if bad >= 0:
                bad_dt = dt
                break
            mumax = mx
            steps += 1
            if landing:
                t = t_end
            else:
                t = t + dt

    if bad >= 0:
        return state, steps, STATUS_UNSTABLE, bad, bad_dt
    if hit_budget:
        return state, steps, STATUS_STEP_BUDGET, -1, bad_dt
    return state, steps, STATUS_OK, -1, 0.0
