import numpy as np
import pytest

from bochner2d import bochner as bo
from bochner2d import integrate as ig
from bochner2d import operators as op
from bochner2d import surfaces as surf
from bochner2d.errors import ChiIndeterminateError


class TestSurfaceIntegral:
    def test_torus_area(self, torus21):
        res = ig.surface_area(torus21, surf.chart_grid(torus21, 64, 64))
        assert abs(res.value - 8 * np.pi**2) < 1e-10
        assert res.rule == "periodic-trapezoid"
        assert res.estimated_error >= 0.0

    def test_sphere_area_mixed_rule(self, sphere1):
        res = ig.surface_area(sphere1, surf.chart_grid(sphere1, 32, 64))
        assert abs(res.value - 4 * np.pi) < 1e-10
        assert res.rule == "gauss-legendre-mixed"

    def test_zero_integrand(self, torus21):
        res = ig.surface_integral(torus21,
                                  lambda u, v: np.zeros(np.broadcast(u, v).shape),
                                  surf.chart_grid(torus21, 16, 16))
        assert res.value == 0.0

    def test_clifford_area(self, clifford1):
        # flat metric det g = 1/4, chart (2 pi)^2 -> area 2 pi^2
        res = ig.surface_area(clifford1, surf.chart_grid(clifford1, 32, 32))
        assert abs(res.value - 2 * np.pi**2) < 1e-10

    def test_spectral_error_decay(self, torus21):
        # sharp but analytic periodic integrand: trapezoid error collapses
        # by far more than x100 when the grid doubles from 32^2 to 64^2
        def f(u, v):
            return 1.0 / (1.3 - np.cos(u)) + 1.0 / (1.3 - np.cos(v))

        res32 = ig.surface_integral(torus21, f, surf.chart_grid(torus21, 32, 32))
        res64 = ig.surface_integral(torus21, f, surf.chart_grid(torus21, 64, 64))
        assert res64.estimated_error > 0.0
        assert res32.estimated_error / res64.estimated_error >= 100.0


class TestEulerCharacteristic:
    def test_sphere(self, sphere1):
        chi = ig.euler_characteristic(sphere1, surf.chart_grid(sphere1, 32, 64))
        assert chi.rounded == 2 and chi.margin < 0.01
        assert abs(chi.raw - 2.0) < 1e-12

    def test_torus(self, torus21):
        chi = ig.euler_characteristic(torus21, surf.chart_grid(torus21, 64, 64))
        assert chi.rounded == 0 and chi.margin < 0.01

    def test_ellipsoid(self, ellipsoid_abc):
        chi = ig.euler_characteristic(ellipsoid_abc,
                                      surf.chart_grid(ellipsoid_abc, 64, 64))
        assert chi.rounded == 2 and chi.margin < 0.01

    def test_clifford(self, clifford1):
        chi = ig.euler_characteristic(clifford1, surf.chart_grid(clifford1, 16, 16))
        assert chi.rounded == 0 and chi.margin < 1e-14

    def test_matches_declared_chi(self, all_surfaces):
        for s in all_surfaces:
            chi = ig.euler_characteristic(s, surf.chart_grid(s, 48, 48))
            assert chi.rounded == s.known_chi, s.name

    def test_underresolved_is_indeterminate(self, ellipsoid_abc):
        with pytest.raises(ChiIndeterminateError) as exc:
            ig.euler_characteristic(ellipsoid_abc,
                                    surf.chart_grid(ellipsoid_abc, 8, 8))
        assert exc.value.estimate is not None
        assert exc.value.estimate.margin >= 0.01

    def test_definitional_consistency(self, sphere1):
        # 2 pi * raw must be the total-curvature integral, no rewiring allowed
        grid = surf.chart_grid(sphere1, 32, 64)
        total = ig.total_curvature(sphere1, grid)
        chi = ig.euler_characteristic(sphere1, grid)
        assert abs(2 * np.pi * chi.raw - total.value) < 1e-12


class TestTotalCurvature:
    def test_torus_integral_vanishes(self, torus21):
        res = ig.total_curvature(torus21, surf.chart_grid(torus21, 64, 64))
        assert abs(res.value) < 1e-10

    def test_sphere_integral(self, sphere1):
        res = ig.total_curvature(sphere1, surf.chart_grid(sphere1, 32, 64))
        assert abs(res.value - 4 * np.pi) < 1e-8


class TestDivergenceTheorem:
    def test_zero_field_exact(self, torus21):
        zero = op.constant_field(0.0, 0.0)
        res = ig.divergence_theorem_residual(torus21, zero,
                                             surf.chart_grid(torus21, 16, 16))
        assert res.value == 0.0

    def test_curvature_potential_on_torus(self, torus21):
        T = bo.normalize_field(torus21, op.coordinate_field(0))
        Y = bo.curvature_potential_field(torus21, T)
        res = ig.divergence_theorem_residual(torus21, Y,
                                             surf.chart_grid(torus21, 64, 64))
        assert abs(res.value) < 1e-8

    def test_smooth_periodic_field(self, torus21):
        X = op.TangentField(
            lambda u, v: np.stack(
                np.broadcast_arrays(np.cos(u), np.sin(v) * np.cos(u)), axis=-1),
            name="periodic")
        res = ig.divergence_theorem_residual(torus21, X,
                                             surf.chart_grid(torus21, 64, 64))
        assert abs(res.value) < 1e-10

    def test_end_to_end_torus_story(self, torus21):
        # nowhere-zero field -> potential field integrates to zero -> chi = 0
        grid = surf.chart_grid(torus21, 64, 64)
        T = bo.normalize_field(
            torus21, op.add_fields(op.coordinate_field(0), op.coordinate_field(1)))
        Y = bo.curvature_potential_field(torus21, T)
        res = ig.divergence_theorem_residual(torus21, Y, grid)
        chi = ig.euler_characteristic(torus21, grid)
        assert abs(res.value) < 1e-8
        assert chi.rounded == 0

    def test_sphere_exposes_obstruction(self, sphere1):
        # the azimuthal field vanishes at the poles; its potential field is
        # chart-singular there and the closed-surface integral picks up the
        # full curvature 4 pi instead of zero
        T = bo.normalize_field(sphere1, op.coordinate_field(1))
        Y = bo.curvature_potential_field(sphere1, T)
        res = ig.divergence_theorem_residual(sphere1, Y,
                                             surf.chart_grid(sphere1, 32, 64))
        assert abs(res.value - 4 * np.pi) < 1e-6

    def test_chi_zero_iff_torus(self, all_surfaces):
        for s in all_surfaces:
            chi = ig.euler_characteristic(s, surf.chart_grid(s, 48, 48))
            admits_nowhere_zero = s.known_chi == 0
            assert (chi.rounded == 0) == admits_nowhere_zero, s.name
