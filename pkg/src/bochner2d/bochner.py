"""Curvature identities certified by pointwise residuals.

Given a unit tangent field T on a surface, the chain of identities checked
here is:

  (1)  T(div T) = -Ric(T, T) + div(grad_T T) - trace(A_T^2)   (Bochner)
  (2)  trace(A_T^2) = (div T)^2                               (unit field, dim 2)
  (3)  (div T)^2 = div((div T) T) - T(div T)                  (product rule)
  (4)  K = div(grad_T T - (div T) T)                          (combination)

with A_X(v) = -grad_v X.  Every identity is evaluated numerically on grids
and reported as |LHS - RHS| with a tolerance verdict; the toolkit certifies
rather than proves.

Residual functions return plain arrays over the broadcast shape of (u, v);
`residual_report` summarizes a sweep.  Tolerances default to 1e-6 for
analytic backends and 1e-3 for finite-difference backends.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NotUnitFieldError, ZeroFieldPointError
from .operators import (
    H_OUTER,
    TangentField,
    christoffel_derivative_from_metric,
    christoffel_from_metric,
    covariant_gradient_at,
    divergence_at,
    divergence_scalar_field,
    field_jet,
    gauss_curvature_from_metric,
    require_unit,
    ricci_tensor_from_metric,
    scalar_jet,
    scalar_times_field,
)
from .surfaces import ChartPoint, metric_data, metric_only

ANALYTIC_TOL = 1e-6
FD_TOL = 1e-3
ZERO_FLOOR = 1e-9


@dataclass(frozen=True)
class IdentityResidual:
    """Absolute residual of a named identity at a single chart point."""
    name: str
    point: ChartPoint
    value: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class ResidualReport:
    """Grid summary of a named identity residual."""
    name: str
    resolution: tuple
    sup: float
    mean: float
    worst_point: ChartPoint
    tolerance: float
    passed: bool
    n_points: int


def default_tolerance(surface):
    return ANALYTIC_TOL if surface.derivative_mode == "analytic" else FD_TOL


def residual_report(name, values, U, V, tolerance):
    """Summarize residual values over grid nodes into a ResidualReport."""
    values = np.asarray(values, dtype=float)
    U, V = np.broadcast_arrays(np.asarray(U, dtype=float), np.asarray(V, dtype=float))
    flat = values.ravel()
    iworst = int(np.argmax(flat))
    sup = float(flat[iworst])
    return ResidualReport(
        name=name, resolution=values.shape, sup=sup, mean=float(flat.mean()),
        worst_point=ChartPoint(float(U.ravel()[iworst]), float(V.ravel()[iworst])),
        tolerance=float(tolerance), passed=bool(sup <= tolerance),
        n_points=int(flat.size))


def point_residual(name, value, u, v, tolerance):
    value = float(value)
    return IdentityResidual(name=name, point=ChartPoint(float(u), float(v)),
                            value=value, tolerance=float(tolerance),
                            passed=bool(value <= tolerance))


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------

def normalize_field(surface, X, floor=ZERO_FLOOR):
    """Pointwise unit field X / g(X, X)^(1/2).

    Raises ZeroFieldPointError lazily whenever an evaluation meets a point
    where the metric norm of X falls below `floor`: the input is then not
    nowhere-zero at working precision.  Derivative callbacks are assembled
    exactly when the input field carries them and the surface is analytic.
    """
    if floor <= 0:
        raise ValueError("floor must be positive")

    def norm2(u, v):
        g = metric_only(surface, u, v)
        a = np.asarray(X.coeff(u, v), dtype=float)
        return np.einsum("...ij,...i,...j->...", g, a, a), a

    def check(n2, u, v):
        bad = n2 < floor**2
        if np.any(bad):
            U, V = np.broadcast_arrays(np.asarray(u, dtype=float),
                                       np.asarray(v, dtype=float))
            Ub = np.broadcast_to(U, bad.shape)[bad]
            Vb = np.broadcast_to(V, bad.shape)[bad]
            pts = [ChartPoint(float(a), float(b)) for a, b in zip(Ub.ravel()[:16],
                                                                  Vb.ravel()[:16])]
            raise ZeroFieldPointError(
                f"field {X.name!r} has norm below floor {floor:g} at "
                f"{int(np.count_nonzero(bad))} point(s), first {pts[0]}", points=pts)

    def coeff(u, v):
        n2, a = norm2(u, v)
        check(n2, u, v)
        return a / np.sqrt(n2)[..., None]

    d_coeff = dd_coeff = None
    analytic = surface.derivative_mode == "analytic"
    if analytic and X.d_coeff is not None:
        def d_coeff(u, v):
            md = metric_data(surface, u, v, order=1)
            a, dX = field_jet(surface, X, u, v, order=1)
            n2 = np.einsum("...ij,...i,...j->...", md.g, a, a)
            check(n2, u, v)
            dn2 = (np.einsum("...mij,...i,...j->...m", md.dg, a, a)
                   + 2.0 * np.einsum("...ij,...mi,...j->...m", md.g, dX, a))
            inv = 1.0 / np.sqrt(n2)
            return (dX * inv[..., None, None]
                    - 0.5 * a[..., None, :] * dn2[..., :, None]
                    * (inv**3)[..., None, None])

    if analytic and X.d_coeff is not None and X.dd_coeff is not None:
        def dd_coeff(u, v):
            md = metric_data(surface, u, v, order=2)
            a, dX, ddX = field_jet(surface, X, u, v, order=2)
            n2 = np.einsum("...ij,...i,...j->...", md.g, a, a)
            check(n2, u, v)
            dn2 = (np.einsum("...mij,...i,...j->...m", md.dg, a, a)
                   + 2.0 * np.einsum("...ij,...mi,...j->...m", md.g, dX, a))
            inv = 1.0 / np.sqrt(n2)
            out = np.empty(a.shape[:-1] + (3, 2), dtype=float)
            pairs = ((0, 0), (0, 1), (1, 1))
            for row, (l, m) in enumerate(pairs):
                ddn2 = (md.ddg[..., row, :, :] * a[..., :, None] * a[..., None, :]
                        ).sum((-1, -2))
                ddn2 += 2.0 * np.einsum("...ij,...i,...j->...",
                                        md.dg[..., m, :, :], dX[..., l, :], a)
                ddn2 += 2.0 * np.einsum("...ij,...i,...j->...",
                                        md.dg[..., l, :, :], dX[..., m, :], a)
                ddn2 += 2.0 * np.einsum("...ij,...i,...j->...",
                                        md.g, ddX[..., row, :], a)
                ddn2 += 2.0 * np.einsum("...ij,...i,...j->...",
                                        md.g, dX[..., m, :], dX[..., l, :])
                out[..., row, :] = (
                    ddX[..., row, :] * inv[..., None]
                    - 0.5 * dX[..., m, :] * (dn2[..., l] * inv**3)[..., None]
                    - 0.5 * dX[..., l, :] * (dn2[..., m] * inv**3)[..., None]
                    - 0.5 * a * (ddn2 * inv**3)[..., None]
                    + 0.75 * a * (dn2[..., l] * dn2[..., m] * inv**5)[..., None])
            return out

    return TangentField(coeff, d_coeff, dd_coeff,
                        name=f"unit({X.name})",
                        fd_step=H_OUTER if d_coeff is None else X.fd_step)


# ---------------------------------------------------------------------------
# field constructions
# ---------------------------------------------------------------------------

def self_covariant_derivative(surface, T):
    """grad_T T as a tangent field; exact partials when T carries them."""
    def coeff(u, v):
        md = metric_data(surface, u, v, order=1)
        a, dX = field_jet(surface, T, u, v, order=1)
        gamma = christoffel_from_metric(md)
        return (np.einsum("...i,...ik->...k", a, dX)
                + np.einsum("...kij,...i,...j->...k", gamma, a, a))

    d_coeff = None
    if (surface.derivative_mode == "analytic" and T.d_coeff is not None
            and T.dd_coeff is not None):
        def d_coeff(u, v):
            md = metric_data(surface, u, v, order=2)
            a, dX, ddX = field_jet(surface, T, u, v, order=2)
            gamma = christoffel_from_metric(md)
            dgamma = christoffel_derivative_from_metric(md)
            out = np.empty(a.shape[:-1] + (2, 2), dtype=float)
            for m in range(2):
                dd_rows = ddX[..., [m + 0, m + 1], :]  # d_m d_i a^k rows i=0,1
                out[..., m, :] = (
                    np.einsum("...i,...ik->...k", dX[..., m, :], dX)
                    + np.einsum("...i,...ik->...k", a, dd_rows)
                    + np.einsum("...kij,...i,...j->...k",
                                dgamma[..., m, :, :, :], a, a)
                    + 2.0 * np.einsum("...kij,...i,...j->...k",
                                      gamma, dX[..., m, :], a))
            return out

    return TangentField(coeff, d_coeff, None,
                        name=f"selfgrad({T.name})", fd_step=H_OUTER)


def curvature_potential_field(surface, T):
    """Tangent field whose divergence reproduces the Gauss curvature.

    For a unit field T this is grad_T T - (div T) T; its divergence equals K
    wherever T is defined.  Requires g(T, T) = 1 within the unit tolerance at
    every evaluated point.
    """
    grad_tt = self_covariant_derivative(surface, T)
    div_t = divergence_scalar_field(surface, T)
    scaled = scalar_times_field(div_t, T)

    def coeff(u, v):
        require_unit(surface, T, u, v)
        return grad_tt.coeff(u, v) - scaled.coeff(u, v)

    d_coeff = None
    if grad_tt.d_coeff is not None and scaled.d_coeff is not None:
        def d_coeff(u, v):
            return grad_tt.d_coeff(u, v) - scaled.d_coeff(u, v)

    return TangentField(coeff, d_coeff, None,
                        name=f"curvpot({T.name})", fd_step=H_OUTER)


# ---------------------------------------------------------------------------
# identity residuals
# ---------------------------------------------------------------------------

def bochner_residual(surface, X, u, v):
    """|X(div X) + Ric(X,X) - div(grad_X X) + trace(A_X^2)| pointwise.

    X need not be unit; it must be twice differentiable near the evaluation
    points (callbacks or stencil fallback).
    """
    md = metric_data(surface, u, v, order=2)
    jet = field_jet(surface, X, u, v, order=2)
    a, dX = jet[0], jet[1]

    div_x = divergence_scalar_field(surface, X)
    _, grad_div = scalar_jet(surface, div_x, u, v, order=1)
    lhs = np.einsum("...i,...i->...", a, grad_div)

    ric = ricci_tensor_from_metric(md)
    ric_xx = np.einsum("...ij,...i,...j->...", ric, a, a)

    grad_xx = self_covariant_derivative(surface, X)
    div_grad_xx = divergence_at(surface, grad_xx, u, v, md=md)

    m = covariant_gradient_at(surface, X, u, v, md=md, jet=(a, dX))
    trace_a2 = np.einsum("...ki,...ik->...", m, m)

    return np.abs(lhs - (-ric_xx + div_grad_xx - trace_a2))


def trace_identity_residual(surface, T, u, v):
    """|trace(A_T^2) - (div T)^2| for a unit field T."""
    require_unit(surface, T, u, v)
    md = metric_data(surface, u, v, order=1)
    jet = field_jet(surface, T, u, v, order=1)
    m = covariant_gradient_at(surface, T, u, v, md=md, jet=jet)
    trace_a2 = np.einsum("...ki,...ik->...", m, m)
    div_t = divergence_at(surface, T, u, v, md=md, jet=jet)
    return np.abs(trace_a2 - div_t**2)


def divergence_scaling_residual(surface, T, u, v):
    """|(div T)^2 - div((div T) T) + T(div T)|, the product-rule link."""
    div_t = divergence_scalar_field(surface, T)
    val, grad = scalar_jet(surface, div_t, u, v, order=1)
    a = np.asarray(T.coeff(u, v), dtype=float)
    t_of_div = np.einsum("...i,...i->...", a, grad)
    scaled = scalar_times_field(div_t, T)
    div_scaled = divergence_at(surface, scaled, u, v)
    return np.abs(val**2 - div_scaled + t_of_div)


def curvature_identity_residual(surface, T, u, v, potential=None):
    """|K - div(grad_T T - (div T) T)| for a unit field T."""
    require_unit(surface, T, u, v)
    md = metric_data(surface, u, v, order=2)
    K = gauss_curvature_from_metric(md)
    Y = potential if potential is not None else curvature_potential_field(surface, T)
    div_y = divergence_at(surface, Y, u, v, md=md)
    return np.abs(K - div_y)


def chained_residuals(surface, T, u, v):
    """All four residuals of the identity chain at the given points.

    Returns a dict with keys "bochner", "trace", "product", "curvature" and
    "bound_slack": curvature residual minus the sum of the other three.  The
    derivation makes the slack at most numerical-linearity noise (~1e-9).
    """
    r1 = bochner_residual(surface, T, u, v)
    r2 = trace_identity_residual(surface, T, u, v)
    r3 = divergence_scaling_residual(surface, T, u, v)
    r4 = curvature_identity_residual(surface, T, u, v)
    return {"bochner": r1, "trace": r2, "product": r3, "curvature": r4,
            "bound_slack": r4 - (r1 + r2 + r3)}


# ---------------------------------------------------------------------------
# orthonormal-frame check
# ---------------------------------------------------------------------------

NEAR_PARALLEL = 1.0 - 1e-6   # squared-cosine threshold for frame fallback


def unit_frame_companion(surface, T, u, v):
    """Unit field E with g(T, E) = 0, built by Gram-Schmidt from d/du.

    Falls back to d/dv at points where T is nearly parallel to d/du.
    Returns chart coefficients of E, shape (..., 2).
    """
    g = metric_only(surface, u, v)
    t = np.asarray(T.coeff(u, v), dtype=float)

    e_u = np.zeros_like(t)
    e_u[..., 0] = 1.0
    e_v = np.zeros_like(t)
    e_v[..., 1] = 1.0

    ip_u = np.einsum("...ij,...i,...j->...", g, t, e_u)
    guu = g[..., 0, 0]
    use_v = ip_u**2 > NEAR_PARALLEL * guu
    w = np.where(use_v[..., None], e_v, e_u)

    ip = np.einsum("...ij,...i,...j->...", g, t, w)
    e = w - ip[..., None] * t
    norm = np.sqrt(np.einsum("...ij,...i,...j->...", g, e, e))
    return e / norm[..., None]


def unit_frame_operator_matrix(surface, T, u, v):
    """Matrix of v -> -grad_v T in the orthonormal frame (T, E).

    For a unit field the first row vanishes identically: differentiate
    g(T, T) = 1 to see g(grad_v T, T) = 0 for every direction v.
    """
    require_unit(surface, T, u, v)
    md = metric_data(surface, u, v, order=1)
    m = -covariant_gradient_at(surface, T, u, v, md=md)
    t = np.asarray(T.coeff(u, v), dtype=float)
    e = unit_frame_companion(surface, T, u, v)
    basis = np.stack([t, e], axis=-1)              # columns T, E
    # entries M[i, j] = g(A(b_j), b_i)
    a_cols = np.einsum("...ki,...ij->...kj", m, basis)
    return np.einsum("...ij,...ik,...kl->...jl", basis, md.g, a_cols)
