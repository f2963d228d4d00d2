"""Monitored functionals, decay bounds and the pressure estimates."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmelab import (
    BarrierParams,
    DensityField,
    EnvelopeParams,
    Potential,
    SolverConfig,
    aronson_benilan_margin,
    barrier_margin,
    barrier_select,
    build_mesh,
    decay_envelope,
    detect_t0,
    dissipation_residual,
    dp,
    kp,
    l1_distance,
    run,
    unconditional_kp_bound,
)
from pmelab.analysis import _dissipation_constant
from pmelab.errors import DomainError, ParameterError, ZeroFieldError

from conftest import gaussian_bump_field


@pytest.fixture(scope="module")
def flat4():
    return build_mesh(Potential("flat"), 1.0, 4)


@pytest.fixture(scope="module")
def gmesh():
    return build_mesh(Potential("gaussian"), 8.0, 256)


def constant_trajectory(mesh, levels, times, p=2.0, beta=1.0, c_eq=0.5):
    """Stationary snapshots with prescribed constant values (test helper)."""
    from pmelab.evolve import SolverConfig, _make_trajectory

    cfg = SolverConfig(beta=beta, c_eq=c_eq)
    fields = [DensityField(np.full(mesh.n_cells, v), time=t)
              for v, t in zip(levels, times)]
    return _make_trajectory(mesh, cfg, p, np.asarray(times, dtype=float),
                            fields, mesh.integrate(fields[0].values))


class TestKp:
    def test_unit_field(self, gmesh):
        assert kp(DensityField(np.ones(256)), gmesh, 2.0) == pytest.approx(0.0, abs=1e-13)

    def test_constant_e_gives_two(self, gmesh):
        fld = DensityField(np.full(256, math.e))
        assert kp(fld, gmesh, 2.0) == pytest.approx(2.0, rel=1e-12)

    def test_half_indicator_hand_value(self, flat4):
        fld = DensityField(np.array([1.0, 1.0, 0.0, 0.0]))
        assert kp(fld, flat4, 2.0) == pytest.approx(-0.6931471805599453, abs=1e-12)

    def test_zero_field_sentinel(self, flat4):
        with pytest.raises(ZeroFieldError):
            kp(DensityField(np.zeros(4)), flat4, 2.0)

    def test_p_validation(self, flat4):
        with pytest.raises(ParameterError):
            kp(DensityField(np.ones(4)), flat4, 1.0)


class TestDp:
    def test_constants_are_equality_case(self, gmesh):
        assert dp(DensityField(np.ones(256)), gmesh, 2.0, 1.0) == pytest.approx(0.0, abs=1e-13)
        assert dp(DensityField(np.full(256, 2.0)), gmesh, 2.0, 2.0) == \
            pytest.approx(0.0, abs=1e-13)

    def test_algebraic_relation_to_kp_at_unit_mass(self, gmesh):
        rng = np.random.default_rng(11)
        for p in (1.5, 2.0, 4.0):
            raw = rng.uniform(0.1, 2.0, 256)
            fld = DensityField(raw / gmesh.integrate(raw))
            assert dp(fld, gmesh, p, 1.0) == pytest.approx(
                (p - 1.0) / p * kp(fld, gmesh, p), abs=1e-12)

    def test_nonnegative_along_conservative_run(self, reference_run_512):
        traj = reference_run_512
        assert np.min(traj.dp) >= -10 * traj.mesh.h**2

    def test_validation(self, flat4):
        fld = DensityField(np.ones(4))
        with pytest.raises(ParameterError):
            dp(fld, flat4, 2.0, 0.0)
        with pytest.raises(ZeroFieldError):
            dp(DensityField(np.zeros(4)), flat4, 2.0, 1.0)


class TestEnvelope:
    def test_infinite_dp0_frozen_value(self):
        # lam=1, beta=1, p=2, m=1, t=0.5: -log((2/9) * 0.5) = log 9
        params = EnvelopeParams(lam=1.0, beta=1.0, p=2.0, mass=1.0, dp0=np.inf)
        assert decay_envelope(params, 0.5) == pytest.approx(
            2.1972245773362196, rel=1e-12)

    def test_zero_dp0_is_identically_zero(self):
        params = EnvelopeParams(lam=1.0, beta=1.0, p=2.0, mass=1.0, dp0=0.0)
        for t in (1e-6, 0.1, 1.0, 100.0):
            assert decay_envelope(params, t) == 0.0

    def test_continuity_at_initial_time(self):
        params = EnvelopeParams(lam=1.0, beta=1.0, p=2.0, mass=1.0, dp0=1.0)
        assert decay_envelope(params, 1e-12) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("lam", [0.3, 1.0])
    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
    @pytest.mark.parametrize("dp0", [0.2, 1.0, 5.0, np.inf])
    def test_monotone_and_continuous_across_switch(self, lam, beta, p, dp0):
        if p + beta < 2:
            pytest.skip("inadmissible exponents")
        params = EnvelopeParams(lam=lam, beta=beta, p=p, mass=1.0, dp0=dp0)
        t0 = params.crossing_time()
        ts = np.unique(np.concatenate([
            np.linspace(1e-4, max(4 * t0, 1.0), 200),
            [max(t0, 1e-12) * (1 + s) for s in (-1e-9, 0.0, 1e-9) if t0 > 0],
        ]))
        vals = [decay_envelope(params, float(t)) for t in ts]
        assert all(b <= a + 1e-11 for a, b in zip(vals, vals[1:]))
        if t0 > 0 and np.isfinite(dp0):
            below = decay_envelope(params, t0 * (1 - 1e-12))
            above = decay_envelope(params, t0 * (1 + 1e-12))
            assert below == pytest.approx(above, abs=1e-9)

    def test_measured_switch_mode(self):
        params = EnvelopeParams(lam=1.0, beta=1.0, p=2.0, mass=1.0, dp0=2.0)
        v = decay_envelope(params, 3.0, t0=1.0, dp_at_t0=0.4)
        rate = params.phase2_rate
        assert v == pytest.approx(0.4 * math.exp(-rate * 2.0), rel=1e-12)

    def test_validation(self):
        with pytest.raises(ParameterError):
            EnvelopeParams(lam=1.0, beta=0.3, p=1.5, mass=1.0, dp0=0.0)
        params = EnvelopeParams(lam=1.0, beta=1.0, p=2.0, mass=1.0, dp0=1.0)
        with pytest.raises(ParameterError):
            decay_envelope(params, 0.0)


class TestUnconditionalBound:
    def test_crossing_point(self):
        assert unconditional_kp_bound(1.0, 1.0, 2.0, 4.5) == pytest.approx(1.0)

    def test_early_value_frozen(self):
        # t = 0.45: -2 log(0.1) = 2 log 10
        assert unconditional_kp_bound(1.0, 1.0, 2.0, 0.45) == pytest.approx(
            4.605170185988091, rel=1e-12)

    def test_saturates_at_one(self):
        for t in (10.0, 1e3, 1e9):
            assert unconditional_kp_bound(1.0, 1.0, 2.0, t) == 1.0

    def test_validation(self):
        with pytest.raises(ParameterError):
            unconditional_kp_bound(1.0, 1.0, 2.0, 0.0)


class TestDetectT0:
    def test_constant_initial_returns_zero(self, flat4):
        traj = constant_trajectory(flat4, [1.0, 1.0], [0.0, 1.0])
        assert detect_t0(traj, 2.0, 1.0) == 0.0

    def test_never_attained_returns_none(self, flat4):
        levels = [math.e**2, math.e**1.5]
        traj = constant_trajectory(flat4, levels, [0.0, 1.0])
        assert detect_t0(traj, 2.0, 1.0) is None

    def test_linear_interpolation_frozen(self, flat4):
        # dp sequence (1.2, 0.9, 0.3) at t = (0, 1, 2), threshold 0.5 -> 5/3
        levels = [math.e**1.2, math.e**0.9, math.e**0.3]
        traj = constant_trajectory(flat4, levels, [0.0, 1.0, 2.0])
        assert detect_t0(traj, 2.0, 1.0) == pytest.approx(5.0 / 3.0, abs=1e-9)


class TestDissipation:
    def test_displayed_constants(self):
        assert _dissipation_constant(2.0, 1.0, 0.5) == pytest.approx(8.0 / 9.0)
        assert _dissipation_constant(2.0, 1.0, 1.0) == pytest.approx(16.0 / 9.0)

    def test_constant_trajectory_zero_residual(self, flat4):
        traj = constant_trajectory(flat4, [2.0, 2.0, 2.0], [0.0, 0.5, 1.0])
        assert dissipation_residual(traj, 1, 2.0) == 0.0

    def test_residual_refines_second_order(self):
        resids = []
        for n, spacing in ((128, 2e-3), (256, 1e-3)):
            mesh = build_mesh(Potential("gaussian"), 8.0, n)
            init = DensityField(
                gaussian_bump_field(mesh, width=0.5, mass=0.95).values + 0.05)
            cfg = SolverConfig(beta=1.0)
            ts = np.concatenate([[0.0], 0.3 + np.arange(21) * spacing])
            traj = run(init, mesh, cfg, T=float(ts[-1]), output_times=ts, p=2.0)
            resids.append(max(dissipation_residual(traj, i, 2.0)
                              for i in range(2, len(traj) - 1)))
        assert resids[0] / resids[1] >= 3.0

    def test_index_and_spacing_validation(self, flat4):
        traj = constant_trajectory(flat4, [1.0, 1.0, 1.0], [0.0, 0.4, 1.0])
        with pytest.raises(ParameterError):
            dissipation_residual(traj, 0, 2.0)
        with pytest.raises(ParameterError):
            dissipation_residual(traj, 1, 2.0)  # nonuniform spacing


class TestAronsonBenilan:
    def test_constant_field_margin(self, gmesh):
        fld = DensityField(np.full(256, 0.8))
        # c_eq = 1: margin is exactly 1/(beta t)
        assert aronson_benilan_margin(fld, gmesh, 1.0, 0.5, 1.0) == \
            pytest.approx(2.0, rel=1e-12)
        # c_eq = 1/(1+beta): the mapped constant is 1+beta
        assert aronson_benilan_margin(fld, gmesh, 1.0, 0.5, 0.5) == \
            pytest.approx(4.0, rel=1e-12)

    def test_vacuum_cells_are_excluded(self, gmesh):
        values = np.zeros(256)
        values[100:140] = 1.0
        margin = aronson_benilan_margin(DensityField(values), gmesh, 1.0, 0.1, 1.0)
        assert np.isfinite(margin)

    def test_all_vacuum_rejected(self, gmesh):
        with pytest.raises(DomainError):
            aronson_benilan_margin(DensityField(np.zeros(256)), gmesh, 1.0, 0.1, 1.0)

    def test_time_validation(self, gmesh):
        fld = DensityField(np.ones(256))
        with pytest.raises(ParameterError):
            aronson_benilan_margin(fld, gmesh, 1.0, 0.0, 1.0)

    def test_late_time_reference_margin(self, reference_run_512):
        traj = reference_run_512
        cfg = traj.config
        t, fld = traj.times[-1], traj.fields[-1]
        margin = aronson_benilan_margin(fld, traj.mesh, cfg.beta, float(t), cfg.c_eq)
        assert margin == pytest.approx(2.0 / t, rel=1e-3)


class TestBarrier:
    def test_flat_selection_frozen(self):
        params = barrier_select(1.0, 1.0, 0.0, 1.0, 1.0, Potential("flat"))
        assert params.epsilon == pytest.approx(1.0 / 6.0, rel=1e-6)
        assert params.tau == pytest.approx(1.0 / 3.0, rel=1e-6)

    def test_doubling_c_halves_tau(self):
        pot = Potential("gaussian")
        p1 = barrier_select(1.0, 1.0, 0.0, 1.0, 1.0, pot)
        p2 = barrier_select(2.0, 1.0, 0.0, 1.0, 1.0, pot)
        assert p2.tau == pytest.approx(p1.tau / 2.0, rel=1e-12)

    def test_parabolicity_condition_holds(self):
        for kind, params in (("gaussian", ()), ("double_well", (1.0,))):
            pot = Potential(kind, params)
            bp = barrier_select(0.5, 2.0, 0.3, 0.2, 1.5, pot)
            xs = bp.center + np.linspace(-bp.R, bp.R, 2001)
            cond = 1.0 + 1.5 * bp.epsilon * (-2.0 + 2.0 * pot.grad(xs) * (xs - bp.center))
            assert np.all(cond > 0)

    def test_initial_barrier_below_c(self):
        bp = barrier_select(0.7, 1.5, 0.0, 0.4, 1.0, Potential("gaussian"))
        xs = np.linspace(-1.5, 1.5, 501)
        assert np.max(bp.value(xs, 0.0)) <= 0.7 * (1 + 1e-12)

    def test_constant_state_margin_positive(self, gmesh):
        beta = 1.0
        fld = DensityField(np.full(256, 0.5))
        nu = 2.0 * 0.5  # (beta+1)/beta * mu^beta
        traj = constant_trajectory(gmesh, [0.5, 0.5], [0.0, 1.0], beta=beta, c_eq=1.0)
        params = barrier_select(nu, 1.0, 0.0, 0.3, beta, Potential("gaussian"))
        assert barrier_margin(traj, gmesh, beta, params, 1.0) >= 0.0

    def test_margin_monotone_in_tau(self, gmesh):
        beta = 1.0
        traj = constant_trajectory(gmesh, [0.5, 0.5], [0.0, 1.0], beta=beta, c_eq=1.0)
        base = barrier_select(1.0, 1.0, 0.0, 0.3, beta, Potential("gaussian"))
        weaker = BarrierParams(epsilon=base.epsilon, tau=2.0 * base.tau, R=base.R,
                               center=base.center, zeta=base.zeta, c=base.c)
        m1 = barrier_margin(traj, gmesh, beta, base, 1.0)
        m2 = barrier_margin(traj, gmesh, beta, weaker, 1.0)
        assert m2 >= m1

    def test_initial_violation_names_cell(self, gmesh):
        beta = 1.0
        traj = constant_trajectory(gmesh, [0.1, 0.1], [0.0, 1.0], beta=beta, c_eq=1.0)
        params = BarrierParams(epsilon=0.1, tau=1.0, R=1.0, center=0.0,
                               zeta=0.1, c=5.0)
        with pytest.raises(DomainError, match="cell"):
            barrier_margin(traj, gmesh, beta, params, 1.0)


class TestL1Distance:
    def test_examples(self, gmesh):
        u = DensityField(np.full(256, 2.0))
        v = DensityField(np.ones(256))
        assert l1_distance(u, u, gmesh) == 0.0
        assert l1_distance(u, v, gmesh) == pytest.approx(1.0, abs=1e-13)
        assert l1_distance(u, v, gmesh) == l1_distance(v, u, gmesh)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_triangle_inequality(self, seed):
        mesh = build_mesh(Potential("flat"), 1.0, 16)
        rng = np.random.default_rng(seed)
        u, v, w = (DensityField(rng.uniform(0, 3, 16)) for _ in range(3))
        duw = l1_distance(u, w, mesh)
        assert duw <= l1_distance(u, v, mesh) + l1_distance(v, w, mesh) + 1e-12
