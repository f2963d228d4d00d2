"""Weighted mesh construction and the discrete norms."""

import numpy as np
import pytest
from scipy.integrate import quad

from pmelab import DensityField, Potential, build_mesh, lp_norm
from pmelab.errors import (
    DomainError,
    MeshConstructionError,
    ParameterError,
    ShapeError,
)


class TestPotential:
    def test_unknown_kind_rejected(self):
        with pytest.raises(ParameterError):
            Potential("quartic")

    def test_bad_params_rejected(self):
        with pytest.raises(ParameterError):
            Potential("smoothed_power", (0.0, 1e-2))
        with pytest.raises(ParameterError):
            Potential("smoothed_power", (1.0, 0.0))
        with pytest.raises(ParameterError):
            Potential("gaussian", (-1.0,))

    @pytest.mark.parametrize("kind,params", [
        ("gaussian", ()),
        ("gaussian", (2.5,)),
        ("smoothed_power", (1.0, 1e-2)),
        ("smoothed_power", (3.0, 0.5)),
        ("double_well", (1.0,)),
        ("flat", ()),
    ])
    def test_grad_matches_finite_differences(self, kind, params):
        pot = Potential(kind, params)
        x = np.linspace(-3.0, 3.0, 41)
        eps = 1e-6
        fd = (pot.value(x + eps) - pot.value(x - eps)) / (2 * eps)
        assert np.allclose(pot.grad(x), fd, atol=1e-7, rtol=1e-6)

    def test_gaussian_value(self):
        pot = Potential("gaussian")
        assert pot.value(2.0) == pytest.approx(2.0)
        assert pot.grad(2.0) == pytest.approx(2.0)


class TestBuildMesh:
    def test_flat_r1_n4_uniform_weights(self, flat_mesh_4):
        # flat weight on [-1, 1]: pi_i = 1/(2R) = 1/2 and Z_h = 2R = 2
        assert np.allclose(flat_mesh_4.cell_weights, 0.5, rtol=1e-14)
        assert np.allclose(flat_mesh_4.face_weights, 0.5, rtol=1e-14)
        assert flat_mesh_4.normalizer == pytest.approx(2.0, rel=1e-14)

    def test_normalization_identity(self, gauss_mesh_512):
        total = gauss_mesh_512.h * np.sum(gauss_mesh_512.cell_weights)
        assert abs(total - 1.0) <= 1e-14

    def test_gaussian_normalizer_against_quadrature(self):
        # independent oracle: adaptive quadrature of the unnormalized weight
        mesh = build_mesh(Potential("gaussian"), 8.0, 1024)
        oracle, err = quad(lambda x: np.exp(-0.5 * x * x), -8.0, 8.0,
                           epsabs=1e-12, epsrel=1e-12)
        assert err < 1e-10
        assert abs(mesh.normalizer - oracle) < 1e-6

    @pytest.mark.parametrize("kind,params,R", [
        ("gaussian", (), 8.0),
        ("gaussian", (2.0,), 5.0),
        ("smoothed_power", (1.0, 1e-2), 10.0),
        ("double_well", (1.0,), 4.0),
        ("flat", (), 1.0),
    ])
    @pytest.mark.parametrize("n", [16, 257, 1024])
    def test_probability_measure_everywhere(self, kind, params, R, n):
        mesh = build_mesh(Potential(kind, params), R, n)
        assert abs(mesh.h * np.sum(mesh.cell_weights) - 1.0) <= 1e-14
        assert np.all(mesh.cell_weights > 0)
        assert np.all(mesh.face_weights > 0)
        assert mesh.face_weights.size == n + 1

    def test_face_weights_are_pointwise_evaluations(self):
        mesh = build_mesh(Potential("gaussian"), 6.0, 64)
        faces = mesh.faces
        expected = np.exp(-mesh.potential.value(faces)) / mesh.normalizer
        assert np.allclose(mesh.face_weights, expected, rtol=1e-12)

    def test_normalizer_midpoint_second_order(self):
        # small R so the boundary derivative of the weight is visible
        oracle, _ = quad(lambda x: np.exp(-0.5 * x * x), -2.0, 2.0,
                         epsabs=1e-13, epsrel=1e-13)
        errs = [abs(build_mesh(Potential("gaussian"), 2.0, n).normalizer - oracle)
                for n in (64, 128, 256)]
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)
        assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.1)

    @pytest.mark.filterwarnings("ignore:overflow encountered")
    def test_non_finite_potential_names_location(self):
        # extreme exponent overflows to inf away from the origin
        pot = Potential("smoothed_power", (10000.0, 1e-2))
        with pytest.raises(MeshConstructionError, match="not finite at x"):
            build_mesh(pot, 8.0, 64)

    def test_underflow_to_zero_weight_rejected(self):
        with pytest.raises(MeshConstructionError, match="underflow"):
            build_mesh(Potential("gaussian", (1e6,)), 8.0, 64)

    def test_parameter_errors(self):
        with pytest.raises(ParameterError):
            build_mesh(Potential("gaussian"), 0.0, 64)
        with pytest.raises(ParameterError):
            build_mesh(Potential("gaussian"), 8.0, 1)


class TestDensityField:
    def test_rejects_negative(self):
        with pytest.raises(DomainError, match="cell 2"):
            DensityField(np.array([0.0, 1.0, -0.5]))

    def test_rejects_non_finite(self):
        with pytest.raises(DomainError):
            DensityField(np.array([1.0, np.nan]))
        with pytest.raises(DomainError):
            DensityField(np.array([1.0, np.inf]))

    def test_rejects_matrix(self):
        with pytest.raises(ShapeError):
            DensityField(np.ones((2, 2)))


class TestLpNorm:
    def test_unit_field_any_p(self, gauss_mesh_512):
        fld = DensityField(np.ones(512))
        for p in (0.5, 1.0, 2.0, 7.5):
            assert lp_norm(fld, gauss_mesh_512, p) == pytest.approx(1.0, abs=1e-13)

    def test_homogeneity_p1(self, gauss_mesh_512):
        fld = DensityField(np.full(512, 2.0))
        assert lp_norm(fld, gauss_mesh_512, 1.0) == pytest.approx(2.0, abs=1e-13)

    def test_half_indicator_hand_quadrature(self, flat_mesh_4):
        # two of four cells at weight 1/2 and h = 1/2: (1/2)^(1/2)
        fld = DensityField(np.array([1.0, 1.0, 0.0, 0.0]))
        assert lp_norm(fld, flat_mesh_4, 2.0) == pytest.approx(
            0.7071067811865476, abs=1e-14)

    def test_zero_iff_zero_field(self, flat_mesh_4):
        assert lp_norm(DensityField(np.zeros(4)), flat_mesh_4, 2.0) == 0.0
        assert lp_norm(DensityField(np.array([0, 0, 1e-300, 0.0])),
                       flat_mesh_4, 1.0) > 0.0

    def test_monotone_in_p_at_unit_mass(self, gauss_mesh_512):
        rng = np.random.default_rng(7)
        ps = (1.0, 1.5, 2.0, 3.0, 6.0)
        for _ in range(25):
            raw = rng.uniform(0.0, 1.0, 512) ** 3
            m = gauss_mesh_512.integrate(raw)
            fld = DensityField(raw / m * rng.uniform(0.1, 1.0))  # mass <= 1
            norms = [lp_norm(fld, gauss_mesh_512, p) for p in ps]
            assert all(a <= b * (1 + 1e-12) for a, b in zip(norms, norms[1:]))

    def test_invalid_p(self, flat_mesh_4):
        with pytest.raises(ParameterError):
            lp_norm(DensityField(np.ones(4)), flat_mesh_4, 0.0)

    def test_shape_mismatch(self, flat_mesh_4):
        with pytest.raises(ShapeError):
            lp_norm(DensityField(np.ones(5)), flat_mesh_4, 2.0)
