"""Pointwise Riemannian operators on an embedded surface.

Chart-coefficient conventions (trailing axes):

  field values      a      -> (..., 2)          a[..., k] = k-th coefficient
  first partials    dX     -> (..., 2, 2)       dX[..., i, k] = d_i X^k
  second partials   ddX    -> (..., 3, 2)       rows ordered (uu, uv, vv)
  Christoffel       gamma  -> (..., 2, 2, 2)    gamma[..., k, i, j] = G^k_ij
  operator matrix   m      -> (..., 2, 2)       m[..., k, i] = (grad_{e_i} X)^k

Fields may register exact partial-derivative callbacks.  Callbacks are used
only when the surface runs in analytic mode; a finite-difference run treats
the whole pipeline as method-under-test and differentiates coefficients with
the same stencil order as the metric.  Fields without callbacks are
differentiated numerically: composite fields built by this package carry a
smaller step (H_OUTER) because their coefficients already contain one level
of differentiation.
"""

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from . import _stencils
from .errors import NotUnitFieldError
from .surfaces import DEFAULT_FD_STEP, metric_data, metric_only

H_OUTER = 1e-4   # first-derivative step for composite (derived) quantities
H_HESS = 1e-3    # second-derivative step; optimal region for 4th-order stencils

UNIT_TOL = 1e-8  # allowed deviation of g(T, T) from 1 for unit-field inputs


@dataclass(frozen=True)
class TangentField:
    """Tangent vector field given by chart-coefficient functions.

    coeff(u, v)    -> (..., 2)
    d_coeff(u, v)  -> (..., 2, 2), optional exact first partials
    dd_coeff(u, v) -> (..., 3, 2), optional exact second partials
    fd_step        -> step override when coefficients are differenced
    """
    coeff: Callable
    d_coeff: Optional[Callable] = None
    dd_coeff: Optional[Callable] = None
    name: str = "field"
    fd_step: Optional[float] = None

    def __call__(self, u, v):
        return np.asarray(self.coeff(u, v), dtype=float)


@dataclass(frozen=True)
class ScalarField:
    """Scalar chart function with optional exact gradient and Hessian."""
    value: Callable
    grad: Optional[Callable] = None
    hess: Optional[Callable] = None
    name: str = "scalar"
    fd_step: Optional[float] = None

    def __call__(self, u, v):
        return np.asarray(self.value(u, v), dtype=float)


def coordinate_field(axis, name=None):
    """The coordinate field d/du (axis 0) or d/dv (axis 1)."""
    e = np.zeros(2)
    e[axis] = 1.0

    def coeff(u, v):
        shape = np.broadcast(np.asarray(u), np.asarray(v)).shape
        return np.broadcast_to(e, shape + (2,)).copy()

    def d_coeff(u, v):
        shape = np.broadcast(np.asarray(u), np.asarray(v)).shape
        return np.zeros(shape + (2, 2))

    def dd_coeff(u, v):
        shape = np.broadcast(np.asarray(u), np.asarray(v)).shape
        return np.zeros(shape + (3, 2))

    return TangentField(coeff, d_coeff, dd_coeff,
                        name=name or ("du" if axis == 0 else "dv"))


def constant_field(au, av, name="constant"):
    base = np.array([float(au), float(av)])

    def coeff(u, v):
        shape = np.broadcast(np.asarray(u), np.asarray(v)).shape
        return np.broadcast_to(base, shape + (2,)).copy()

    def d_coeff(u, v):
        shape = np.broadcast(np.asarray(u), np.asarray(v)).shape
        return np.zeros(shape + (2, 2))

    def dd_coeff(u, v):
        shape = np.broadcast(np.asarray(u), np.asarray(v)).shape
        return np.zeros(shape + (3, 2))

    return TangentField(coeff, d_coeff, dd_coeff, name=name)


def add_fields(x, y, name=None):
    """Pointwise sum; derivative callbacks survive when both sides have them."""
    d = dd = None
    if x.d_coeff and y.d_coeff:
        d = lambda u, v: x.d_coeff(u, v) + y.d_coeff(u, v)
    if x.dd_coeff and y.dd_coeff:
        dd = lambda u, v: x.dd_coeff(u, v) + y.dd_coeff(u, v)
    step = max(filter(None, (x.fd_step, y.fd_step)), default=None)
    return TangentField(lambda u, v: x.coeff(u, v) + y.coeff(u, v), d, dd,
                        name=name or f"{x.name}+{y.name}", fd_step=step)


def scale_field(c, x, name=None):
    """Constant multiple of a field."""
    c = float(c)
    d = (lambda u, v: c * x.d_coeff(u, v)) if x.d_coeff else None
    dd = (lambda u, v: c * x.dd_coeff(u, v)) if x.dd_coeff else None
    return TangentField(lambda u, v: c * x.coeff(u, v), d, dd,
                        name=name or f"{c:g}*{x.name}", fd_step=x.fd_step)


def scalar_times_field(f, x, name=None):
    """Product field f*X with derivative callbacks assembled by product rule."""
    def coeff(u, v):
        return np.asarray(f.value(u, v))[..., None] * x.coeff(u, v)

    d = dd = None
    if f.grad is not None and x.d_coeff is not None:
        def d(u, v):
            fv = np.asarray(f.value(u, v))
            return (np.asarray(f.grad(u, v))[..., :, None] * x.coeff(u, v)[..., None, :]
                    + fv[..., None, None] * x.d_coeff(u, v))
    if f.hess is not None and f.grad is not None and x.dd_coeff is not None \
            and x.d_coeff is not None:
        def dd(u, v):
            fv = np.asarray(f.value(u, v))
            gf = np.asarray(f.grad(u, v))
            hf = np.asarray(f.hess(u, v))
            a = x.coeff(u, v)
            dX = x.d_coeff(u, v)
            ddX = x.dd_coeff(u, v)
            out = hf[..., :, None] * a[..., None, :] + fv[..., None, None] * ddX
            # cross terms d_m f d_l X + d_l f d_m X for (m,l) in (uu, uv, vv)
            pairs = ((0, 0), (0, 1), (1, 1))
            for row, (m, l) in enumerate(pairs):
                out[..., row, :] += (gf[..., m, None] * dX[..., l, :]
                                     + gf[..., l, None] * dX[..., m, :])
            return out

    step = max(filter(None, (f.fd_step, x.fd_step)), default=None)
    return TangentField(coeff, d, dd, name=name or f"{f.name}*{x.name}", fd_step=step)


def _field_steps(surface, fd_step):
    if surface.derivative_mode == "fd":
        return surface.fd_step, surface.fd_step
    step1 = fd_step if fd_step is not None else DEFAULT_FD_STEP
    return step1, H_HESS


def field_jet(surface, field, u, v, order=1):
    """Field values with partials up to `order`, honoring callbacks.

    Returns (a, dX) for order 1 and (a, dX, ddX) for order 2.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    a = np.asarray(field.coeff(u, v), dtype=float)
    analytic = surface.derivative_mode == "analytic"
    step1, step2 = _field_steps(surface, field.fd_step)

    if analytic and field.d_coeff is not None:
        dX = np.asarray(field.d_coeff(u, v), dtype=float)
    else:
        dX = _stencils.gradient(field.coeff, u, v, step1)
    if order == 1:
        return a, dX

    if analytic and field.dd_coeff is not None:
        ddX = np.asarray(field.dd_coeff(u, v), dtype=float)
    else:
        ddX = _stencils.hessian(field.coeff, u, v, step2)
    return a, dX, ddX


def scalar_jet(surface, f, u, v, order=1):
    """Scalar analogue of field_jet; returns (val, grad[, hess])."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    val = np.asarray(f.value(u, v), dtype=float)
    analytic = surface.derivative_mode == "analytic"
    step1, step2 = _field_steps(surface, f.fd_step)

    if analytic and f.grad is not None:
        grad = np.asarray(f.grad(u, v), dtype=float)
    else:
        grad = _stencils.gradient(f.value, u, v, step1)
    if order == 1:
        return val, grad

    if analytic and f.hess is not None:
        hess = np.asarray(f.hess(u, v), dtype=float)
    else:
        hess = _stencils.hessian(f.value, u, v, step2)
    return val, grad, hess


# ---------------------------------------------------------------------------
# connection and curvature
# ---------------------------------------------------------------------------

def christoffel_from_metric(md):
    """Levi-Civita symbols gamma[..., k, i, j] from metric data (order >= 1)."""
    # S[..., l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    dg = md.dg
    S = (np.einsum("...ijl->...lij", dg) + np.einsum("...jil->...lij", dg) - dg)
    return 0.5 * np.einsum("...kl,...lij->...kij", md.g_inv, S)


def christoffel_derivative_from_metric(md):
    """d_m gamma^k_ij, shape (..., 2, 2, 2, 2); needs order-2 metric data."""
    dg, ddg, g_inv = md.dg, md.ddg, md.g_inv
    S = (np.einsum("...ijl->...lij", dg) + np.einsum("...jil->...lij", dg) - dg)
    dginv = -np.einsum("...ka,...mab,...bl->...mkl", g_inv, dg, g_inv)
    dS = np.empty(dg.shape[:-3] + (2, 2, 2, 2), dtype=dg.dtype)
    for m in range(2):
        for l in range(2):
            for i in range(2):
                for j in range(2):
                    dS[..., m, l, i, j] = (ddg[..., m + i, j, l]
                                           + ddg[..., m + j, i, l]
                                           - ddg[..., m + l, i, j])
    return 0.5 * (np.einsum("...mkl,...lij->...mkij", dginv, S)
                  + np.einsum("...kl,...mlij->...mkij", g_inv, dS))


def christoffel_at(surface, u, v):
    """Levi-Civita connection symbols at chart points."""
    return christoffel_from_metric(metric_data(surface, u, v, order=1))


def gauss_curvature_from_metric(md):
    """Curvature of the first fundamental form via its determinant identity.

    Uses only the metric and its first and second partials, so it applies
    unchanged to surfaces with no distinguished unit normal (ambient R^4).
    """
    g, dg, ddg = md.g, md.dg, md.ddg
    E, F, G = g[..., 0, 0], g[..., 0, 1], g[..., 1, 1]
    E_u, E_v = dg[..., 0, 0, 0], dg[..., 1, 0, 0]
    F_u, F_v = dg[..., 0, 0, 1], dg[..., 1, 0, 1]
    G_u, G_v = dg[..., 0, 1, 1], dg[..., 1, 1, 1]
    E_vv, F_uv, G_uu = ddg[..., 2, 0, 0], ddg[..., 1, 0, 1], ddg[..., 0, 1, 1]

    def det3(a11, a12, a13, a21, a22, a23, a31, a32, a33):
        return (a11 * (a22 * a33 - a23 * a32)
                - a12 * (a21 * a33 - a23 * a31)
                + a13 * (a21 * a32 - a22 * a31))

    m1 = det3(-0.5 * E_vv + F_uv - 0.5 * G_uu, 0.5 * E_u, F_u - 0.5 * E_v,
              F_v - 0.5 * G_u, E, F,
              0.5 * G_v, F, G)
    m2 = det3(np.zeros_like(E), 0.5 * E_v, 0.5 * G_u,
              0.5 * E_v, E, F,
              0.5 * G_u, F, G)
    return (m1 - m2) / md.det_g**2


def gauss_curvature_at(surface, u, v):
    """Gauss curvature at chart points (analytic or stencil backend)."""
    return gauss_curvature_from_metric(metric_data(surface, u, v, order=2))


def riemann_tensor_from_metric(md):
    """R^l_{kij} from the connection, shape (..., 2, 2, 2, 2)."""
    gamma = christoffel_from_metric(md)
    dgamma = christoffel_derivative_from_metric(md)
    quad = np.einsum("...lim,...mjk->...lkij", gamma, gamma)
    return (np.einsum("...iljk->...lkij", dgamma)
            - np.einsum("...jlik->...lkij", dgamma)
            + quad - np.einsum("...lkji->...lkij", quad))


def ricci_tensor_from_metric(md):
    """Ric_{kj} by contracting the curvature tensor of the connection."""
    riem = riemann_tensor_from_metric(md)
    return np.einsum("...ikij->...kj", riem)


def ricci_tensor_at(surface, u, v):
    return ricci_tensor_from_metric(metric_data(surface, u, v, order=2))


# ---------------------------------------------------------------------------
# first-order field operators
# ---------------------------------------------------------------------------

def log_volume_gradient(md):
    """d_i log sqrt(det g), shape (..., 2)."""
    return 0.5 * np.einsum("...ab,...iab->...i", md.g_inv, md.dg)


def log_volume_hessian(md):
    """Second partials of log sqrt(det g), rows (uu, uv, vv)."""
    dginv = -np.einsum("...ka,...mab,...bl->...mkl", md.g_inv, md.dg, md.g_inv)
    out = np.empty(md.det_g.shape + (3,), dtype=md.g.dtype)
    for row, (m, i) in enumerate(((0, 0), (0, 1), (1, 1))):
        out[..., row] = 0.5 * (
            np.einsum("...ab,...ab->...", dginv[..., m, :, :], md.dg[..., i, :, :])
            + np.einsum("...ab,...ab->...", md.g_inv, md.ddg[..., m + i, :, :]))
    return out


def covariant_gradient_at(surface, X, u, v, md=None, jet=None):
    """Matrix of v -> grad_v X in the chart basis; columns are directions.

    Its negative is the operator whose trace equals -div X and whose square
    enters the curvature identities.
    """
    if md is None:
        md = metric_data(surface, u, v, order=1)
    gamma = christoffel_from_metric(md)
    a, dX = jet if jet is not None else field_jet(surface, X, u, v, order=1)
    return (np.einsum("...ik->...ki", dX)
            + np.einsum("...kij,...j->...ki", gamma, a))


def covariant_derivative(surface, X, direction, u, v):
    """grad_dir X as chart coefficients; `direction` is (..., 2) or length-2."""
    m = covariant_gradient_at(surface, X, u, v)
    direction = np.asarray(direction, dtype=float)
    return np.einsum("...ki,...i->...k", m, direction)


def divergence_at(surface, X, u, v, md=None, jet=None):
    """div X via the volume-weighted coordinate formula."""
    if md is None:
        md = metric_data(surface, u, v, order=1)
    a, dX = jet if jet is not None else field_jet(surface, X, u, v, order=1)
    return (np.einsum("...ii->...", dX)
            + np.einsum("...i,...i->...", a, log_volume_gradient(md)))


def divergence_scalar_field(surface, X, name=None):
    """div X packaged as a ScalarField with exact gradient when available.

    The gradient needs second field partials and second metric partials;
    without callbacks the value function is differenced at the composite step.
    """
    def value(u, v):
        return divergence_at(surface, X, u, v)

    grad = None
    if (surface.derivative_mode == "analytic" and X.d_coeff is not None
            and X.dd_coeff is not None):
        def grad(u, v):
            md = metric_data(surface, u, v, order=2)
            a, dX, ddX = field_jet(surface, X, u, v, order=2)
            dlogs = log_volume_gradient(md)
            ddlogs = log_volume_hessian(md)
            # d_m div = d_m d_i X^i + d_m X^i dlogs_i + X^i d_m dlogs_i
            out = np.empty(a.shape, dtype=float)
            for m in range(2):
                out[..., m] = (ddX[..., m + 0, 0] + ddX[..., m + 1, 1]
                               + dX[..., m, 0] * dlogs[..., 0]
                               + dX[..., m, 1] * dlogs[..., 1]
                               + a[..., 0] * ddlogs[..., m + 0]
                               + a[..., 1] * ddlogs[..., m + 1])
            return out

    return ScalarField(value, grad, None, name=name or f"div({X.name})",
                       fd_step=H_OUTER)


def field_norm(surface, X, u, v):
    """Pointwise metric norm g(X, X)^(1/2)."""
    g = metric_only(surface, u, v)
    a = np.asarray(X.coeff(u, v), dtype=float)
    return np.sqrt(np.einsum("...ij,...i,...j->...", g, a, a))


def require_unit(surface, X, u, v, tol=UNIT_TOL):
    """Raise NotUnitFieldError unless g(X, X) = 1 within tol at all points."""
    g = metric_only(surface, u, v)
    a = np.asarray(X.coeff(u, v), dtype=float)
    n2 = np.einsum("...ij,...i,...j->...", g, a, a)
    worst = float(np.max(np.abs(n2 - 1.0)))
    if worst > tol:
        raise NotUnitFieldError(
            f"field {X.name!r} is not unit: max |g(T,T)-1| = {worst:.3e} > {tol:g}")


def ricci_residual_at(surface, X, Y, u, v):
    """|Ric(X, Y) - K g(X, Y)| with Ric taken from the curvature tensor."""
    md = metric_data(surface, u, v, order=2)
    ric = ricci_tensor_from_metric(md)
    K = gauss_curvature_from_metric(md)
    a = np.asarray(X.coeff(u, v), dtype=float)
    b = np.asarray(Y.coeff(u, v), dtype=float)
    lhs = np.einsum("...ij,...i,...j->...", ric, a, b)
    rhs = K * np.einsum("...ij,...i,...j->...", md.g, a, b)
    return np.abs(lhs - rhs)


def product_rule_residual_at(surface, f, X, u, v):
    """|div(fX) - X(f) - f div(X)| for a scalar f and tangent field X."""
    md = metric_data(surface, u, v, order=1)
    fX = scalar_times_field(f, X)
    lhs = divergence_at(surface, fX, u, v, md=md)
    val, grad = scalar_jet(surface, f, u, v, order=1)
    a = np.asarray(X.coeff(u, v), dtype=float)
    x_of_f = np.einsum("...i,...i->...", a, grad)
    rhs = x_of_f + val * divergence_at(surface, X, u, v, md=md)
    return np.abs(lhs - rhs)
