import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bochner2d import _stencils
from bochner2d import surfaces as surf
from bochner2d.errors import DegenerateMetricError, InvalidParameterError

from conftest import interior_points


def test_torus_embed_origin(torus21):
    np.testing.assert_allclose(torus21.embed(0.0, 0.0), [3.0, 0.0, 0.0], atol=1e-15)


def test_clifford_points_on_unit_sphere(clifford1):
    u, v = interior_points(clifford1, 20)
    norms = np.linalg.norm(clifford1.embed(u, v), axis=-1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-14)


@pytest.mark.parametrize("kind,params", [
    ("torus", (1.0, 2.0)),       # tube radius exceeds ring radius
    ("torus", (2.0, -1.0)),
    ("sphere", (-1.0,)),
    ("sphere", (0.0,)),
    ("ellipsoid", (1.0, -1.3, 0.7)),
    ("clifford_torus", (0.0,)),
])
def test_invalid_parameters(kind, params):
    with pytest.raises(InvalidParameterError):
        surf.make_surface(kind, params)


def test_unknown_kind_and_mode():
    with pytest.raises(InvalidParameterError):
        surf.make_surface("mobius", (1.0,))
    with pytest.raises(InvalidParameterError):
        surf.make_surface("sphere", (1.0,), mode="symbolic")


def test_torus_metric_closed_form(torus21):
    u, v = interior_points(torus21, 15)
    md = surf.metric_at(torus21, u, v)
    expected = np.zeros(u.shape + (2, 2))
    expected[..., 0, 0] = (2.0 + np.cos(v)) ** 2
    expected[..., 1, 1] = 1.0
    np.testing.assert_allclose(md.g, expected, atol=1e-13)


def test_clifford_metric_constant(clifford1):
    u, v = interior_points(clifford1, 10)
    md = surf.metric_at(clifford1, u, v)
    np.testing.assert_allclose(md.g, np.broadcast_to(0.5 * np.eye(2), u.shape + (2, 2)),
                               atol=1e-15)
    np.testing.assert_allclose(md.dg, 0.0, atol=1e-15)
    np.testing.assert_allclose(md.ddg, 0.0, atol=1e-15)


def test_sphere_metric_closed_form(sphere1):
    u, v = interior_points(sphere1, 10)
    md = surf.metric_at(sphere1, u, v)
    np.testing.assert_allclose(md.g[..., 0, 0], 1.0, atol=1e-14)
    np.testing.assert_allclose(md.g[..., 1, 1], np.sin(u) ** 2, atol=1e-14)
    np.testing.assert_allclose(md.g[..., 0, 1], 0.0, atol=1e-14)


def test_sphere_pole_is_degenerate(sphere1):
    with pytest.raises(DegenerateMetricError):
        surf.metric_at(sphere1, 1e-7, 0.3)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 6.2), st.floats(0.05, 6.2))
def test_metric_invariants_torus(u, v):
    t = surf.torus(2.0, 1.0)
    md = surf.metric_at(t, u, v)
    assert md.det_g > 0
    np.testing.assert_allclose(md.g, np.swapaxes(md.g, -1, -2), atol=1e-15)
    np.testing.assert_allclose(md.g @ md.g_inv, np.eye(2), atol=1e-10)


def test_metric_invariants_all(all_surfaces):
    for s in all_surfaces:
        u, v = interior_points(s, 40, seed=3)
        md = surf.metric_at(s, u, v)
        assert np.all(md.det_g > 0)
        np.testing.assert_allclose(md.g, np.swapaxes(md.g, -1, -2), atol=1e-14)
        ident = np.broadcast_to(np.eye(2), md.g.shape)
        np.testing.assert_allclose(md.g @ md.g_inv, ident, atol=1e-10)


def test_embedding_derivative_closed_forms(all_surfaces):
    # the registered d1/d2/d3 maps must match stencils of the embedding itself
    for s in all_surfaces:
        u, v = interior_points(s, 8, seed=5)
        d1 = s.maps.d1(u, v)
        fd1 = _stencils.gradient(s.maps.embed, u, v, 1e-4)
        np.testing.assert_allclose(np.stack([fd1[:, 0], fd1[:, 1]], axis=-1), d1,
                                   atol=1e-10, err_msg=s.name)
        d2 = s.maps.d2(u, v)
        fd2 = _stencils.hessian(s.maps.embed, u, v, 1e-3)
        np.testing.assert_allclose(np.stack([fd2[:, 0], fd2[:, 1], fd2[:, 2]], axis=-1),
                                   d2, atol=1e-8, err_msg=s.name)
        # nested stencils: inner first derivative at 1e-3, outer second at 5e-3
        # keeps the eps/h^3-style noise of the composition under the tolerance
        d3 = s.maps.d3(u, v)
        fd3_uuu = _stencils.diff2(lambda a, b: _stencils.diff1(s.maps.embed, a, b, 0, 1e-3),
                                  u, v, 0, 5e-3)
        np.testing.assert_allclose(fd3_uuu, d3[..., 0], atol=1e-6, err_msg=s.name)
        fd3_vvv = _stencils.diff2(lambda a, b: _stencils.diff1(s.maps.embed, a, b, 1, 1e-3),
                                  u, v, 1, 5e-3)
        np.testing.assert_allclose(fd3_vvv, d3[..., 3], atol=1e-6, err_msg=s.name)
        fd3_uuv = _stencils.diff2(lambda a, b: _stencils.diff1(s.maps.embed, a, b, 1, 1e-3),
                                  u, v, 0, 5e-3)
        np.testing.assert_allclose(fd3_uuv, d3[..., 1], atol=1e-6, err_msg=s.name)
        fd3_uvv = _stencils.diff2(lambda a, b: _stencils.diff1(s.maps.embed, a, b, 0, 1e-3),
                                  u, v, 1, 5e-3)
        np.testing.assert_allclose(fd3_uvv, d3[..., 2], atol=1e-6, err_msg=s.name)


def test_periodic_edges_identified(all_surfaces):
    for s in all_surfaces:
        rect = s.chart_rect
        if rect.periodic_u:
            v = np.linspace(rect.v0 + 0.1, rect.v1 - 0.1, 9)
            np.testing.assert_allclose(s.embed(rect.u0, v), s.embed(rect.u1, v),
                                       atol=1e-12, err_msg=s.name)
            a = surf.metric_at(s, np.full_like(v, rect.u0 + 0.0), v)
            b = surf.metric_at(s, np.full_like(v, rect.u1), v)
            np.testing.assert_allclose(a.g, b.g, atol=1e-12, err_msg=s.name)
        if rect.periodic_v:
            u = np.linspace(rect.u0 + 0.2, rect.u1 - 0.2, 9)
            np.testing.assert_allclose(s.embed(u, rect.v0), s.embed(u, rect.v1),
                                       atol=1e-12, err_msg=s.name)


def test_torus_grid_uniform_weights(torus21):
    g = surf.chart_grid(torus21, 64, 64)
    assert g.U.shape == (64, 64)
    np.testing.assert_allclose(g.weights, (2 * np.pi / 64) ** 2, atol=1e-16)
    assert g.rule == "periodic-trapezoid"


def test_sphere_grid_interior_nodes(sphere1):
    g = surf.chart_grid(sphere1, 32, 64)
    assert g.rule == "gauss-legendre-mixed"
    assert np.all(g.u_nodes > 0.0) and np.all(g.u_nodes < np.pi)
    assert np.all(g.weights > 0.0)
    # azimuthal axis excludes the identified endpoint
    assert g.v_nodes[-1] < 2 * np.pi


def test_torus_grid_area(torus21):
    g = surf.chart_grid(torus21, 64, 64)
    area_elem = np.sqrt(surf.metric_at(torus21, g.U, g.V).det_g)
    area = float(np.sum(g.weights * area_elem))
    assert abs(area - 8 * np.pi ** 2) < 1e-10


def test_grid_rejects_tiny(torus21):
    with pytest.raises(InvalidParameterError):
        surf.chart_grid(torus21, 2, 64)


def test_fd_metric_derivatives_fourth_order(torus21):
    g = surf.chart_grid(torus21, 12, 12)
    md_exact = surf.metric_at(torus21, g.U, g.V)
    devs = []
    for h in (2e-2, 1e-2, 5e-3):
        fd = surf.torus(2.0, 1.0, mode="fd", step=h)
        md_fd = surf.metric_at(fd, g.U, g.V)
        devs.append(max(np.max(np.abs(md_fd.dg - md_exact.dg)),
                        np.max(np.abs(md_fd.ddg - md_exact.ddg))))
    assert devs[0] / devs[1] >= 12.0
    assert devs[1] / devs[2] >= 12.0


def test_fd_metric_matches_analytic_at_default_step(all_surfaces):
    for s in all_surfaces:
        fd = surf.make_surface(
            {"sphere(1)": "sphere", "torus(2,1)": "torus",
             "clifford_torus(1)": "clifford_torus",
             "ellipsoid(1,1.3,0.7)": "ellipsoid"}[s.name],
            tuple(s.params.values()), mode="fd")
        u, v = interior_points(s, 12, seed=9)
        ma = surf.metric_at(s, u, v)
        mf = surf.metric_at(fd, u, v)
        np.testing.assert_allclose(mf.g, ma.g, atol=1e-12, err_msg=s.name)
        np.testing.assert_allclose(mf.dg, ma.dg, atol=1e-9, err_msg=s.name)
        np.testing.assert_allclose(mf.ddg, ma.ddg, atol=1e-8, err_msg=s.name)


def test_guarded_mask(sphere1, torus21):
    g = surf.chart_grid(sphere1, 16, 16)
    mask = surf.guarded_mask(sphere1, g.U, g.V, band=0.3)
    assert np.all(g.U[mask] >= 0.3) and np.all(g.U[mask] <= np.pi - 0.3)
    assert np.all(surf.guarded_mask(torus21, g.U, g.V))
