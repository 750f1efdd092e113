"""Smoothing of continuous nowhere-zero tangent fields via ambient polynomials.

Pipeline: push the field to ambient space through the embedding Jacobian and
normalize it in the Euclidean norm (never differentiating the input, which
may be merely continuous); least-squares fit each ambient component by a
multivariate polynomial on a fit grid; certify the sup of the Euclidean
vector error on a denser verification grid; project the polynomial map back
onto the tangent planes.  Because orthogonal projection cannot expand the
pointwise error and the sampled field is unit, a certified sup error below
1/2 forces the projected field to stay above 1/2 in norm, hence nowhere zero.

Monomials restricted to an algebraic surface are linearly dependent (the
sphere satisfies a quadric, the torus a quartic), so the scaled normal
equations are solved by a truncated eigendecomposition: a minimum-norm
least-squares solution that is immune to the exact rank deficiency.
"""

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BudgetNotMetError, RankDeficientFitError, ZeroFieldPointError
from .operators import TangentField
from .surfaces import ChartPoint, chart_grid, metric_only

SAMPLE_FLOOR = 1e-9        # ambient norm below this flags a zero of the field
ERROR_BUDGET = 0.5         # certified sup error target for the vector fit
RCOND_CUTOFF = 1e-10       # eigenvalue truncation for the scaled normal system
VERIFY_FACTOR = 4          # verification grid density per axis vs fit grid
EVAL_CHUNK = 8192          # rows per block when streaming large point sets


@dataclass(frozen=True)
class AmbientFieldSamples:
    """Unit ambient tangent samples of a field on a chart grid."""
    surface: object
    field: object              # source TangentField, kept for denser resampling
    grid_shape: tuple
    chart_u: np.ndarray
    chart_v: np.ndarray
    positions: np.ndarray      # (m, n) ambient points
    values: np.ndarray         # (m, n) ambient vectors
    unit_certified: bool


@dataclass(frozen=True)
class PolynomialField:
    """Component polynomials in ambient coordinates with a certified error.

    Monomial ordering is graded lexicographic: ascending total degree,
    ties broken by descending exponent tuple.
    """
    ambient_dim: int
    degree: int
    exponents: np.ndarray      # (K, n) int
    coefficients: np.ndarray   # (n_components, K)
    sup_error: float
    fit_grid: tuple
    verify_grid: tuple
    rcond: float


@dataclass(frozen=True)
class SmoothedFieldReport:
    """Outcome of the degree-escalation smoothing run."""
    final_degree: int
    sup_error: float
    min_tangential_norm: float
    target: float
    passed: bool
    degrees_tried: tuple


def monomial_exponents(ambient_dim, degree):
    """Exponent rows in graded lexicographic order."""
    exps = []
    for total in range(degree + 1):
        layer = [e for e in itertools.product(range(total + 1), repeat=ambient_dim)
                 if sum(e) == total]
        layer.sort(reverse=True)
        exps.extend(layer)
    return np.array(exps, dtype=int)


def monomial_matrix(points, exponents):
    """Vandermonde-style matrix V[p, k] = prod_j points[p, j]^exponents[k, j]."""
    points = np.asarray(points, dtype=float)
    m, n = points.shape
    dmax = int(exponents.max()) if exponents.size else 0
    pows = [points[:, j][:, None] ** np.arange(dmax + 1) for j in range(n)]
    V = np.ones((m, exponents.shape[0]))
    for j in range(n):
        V *= pows[j][:, exponents[:, j]]
    return V


def evaluate_polynomial_field(poly, points):
    """Values of the component polynomials at ambient points, (m, n_components)."""
    points = np.asarray(points, dtype=float)
    out = np.zeros((points.shape[0], poly.coefficients.shape[0]))
    for lo in range(0, points.shape[0], EVAL_CHUNK):
        block = slice(lo, min(lo + EVAL_CHUNK, points.shape[0]))
        V = monomial_matrix(points[block], poly.exponents)
        out[block] = V @ poly.coefficients.T
    return out


def sample_unit_field(surface, X, grid, floor=SAMPLE_FLOOR):
    """Euclidean-unit ambient samples of a tangent field on a grid.

    The chart coefficients are pushed forward through the embedding Jacobian
    and normalized by their ambient norm; the input field is only evaluated,
    never differentiated.  Raises ZeroFieldPointError when the ambient norm
    falls below `floor` anywhere on the grid.
    """
    U, V = grid.U, grid.V
    jac = surface.jacobian(U, V)                      # (..., n, 2)
    coeff = np.asarray(X.coeff(U, V), dtype=float)    # (..., 2)
    ambient = np.einsum("...ai,...i->...a", jac, coeff)
    norms = np.linalg.norm(ambient, axis=-1)
    bad = norms < floor
    if np.any(bad):
        pts = [ChartPoint(float(a), float(b))
               for a, b in zip(U[bad].ravel()[:16], V[bad].ravel()[:16])]
        raise ZeroFieldPointError(
            f"field {X.name!r} has ambient norm below {floor:g} at "
            f"{int(np.count_nonzero(bad))} grid node(s)", points=pts)
    values = ambient / norms[..., None]
    positions = surface.embed(U, V)
    m = U.size
    return AmbientFieldSamples(
        surface=surface, field=X, grid_shape=(grid.nu, grid.nv),
        chart_u=U.reshape(m), chart_v=V.reshape(m),
        positions=positions.reshape(m, surface.ambient_dim),
        values=values.reshape(m, surface.ambient_dim),
        unit_certified=True)


def _dense_resample(samples, factor=VERIFY_FACTOR):
    nu, nv = samples.grid_shape
    grid = chart_grid(samples.surface, factor * nu, factor * nv)
    return sample_unit_field(samples.surface, samples.field, grid)


def fit_polynomial_field(samples, degree, verify_samples=None):
    """Least-squares polynomial per ambient component, sup error certified.

    The normal equations of the column-scaled monomial basis are solved by
    eigendecomposition with relative cutoff RCOND_CUTOFF; directions below
    the cutoff are discarded (minimum-norm solution).  RankDeficientFitError
    is raised only when the system is degenerate beyond that remedy
    (non-finite data or an identically zero basis).
    """
    if samples.positions.shape[0] == 0:
        raise RankDeficientFitError("no samples to fit")
    if degree < 0:
        raise ValueError("degree must be >= 0")
    exps = monomial_exponents(samples.positions.shape[1], degree)
    V = monomial_matrix(samples.positions, exps)
    if not np.all(np.isfinite(V)):
        raise RankDeficientFitError("monomial matrix contains non-finite entries")

    scale = np.max(np.abs(V), axis=0)
    scale = np.where(scale > 0.0, scale, 1.0)
    Vs = V / scale
    A = Vs.T @ Vs
    b = Vs.T @ samples.values                 # (K, n_components)
    if not np.all(np.isfinite(A)) or not np.all(np.isfinite(b)):
        raise RankDeficientFitError("normal system contains non-finite entries")

    w, Q = np.linalg.eigh(A)
    wmax = float(w[-1])
    if wmax <= 0.0:
        raise RankDeficientFitError("scaled normal system is identically zero")
    keep = w > RCOND_CUTOFF * wmax
    inv_w = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
    coeff_scaled = Q @ (inv_w[:, None] * (Q.T @ b))
    coefficients = (coeff_scaled / scale[:, None]).T   # (n_components, K)
    rcond = float(max(w[0], 0.0) / wmax)

    if verify_samples is None:
        verify_samples = _dense_resample(samples)
    poly = PolynomialField(
        ambient_dim=samples.positions.shape[1], degree=degree, exponents=exps,
        coefficients=coefficients, sup_error=np.nan,
        fit_grid=samples.grid_shape, verify_grid=verify_samples.grid_shape,
        rcond=rcond)
    pred = evaluate_polynomial_field(poly, verify_samples.positions)
    err = np.linalg.norm(pred - verify_samples.values, axis=1)
    return PolynomialField(
        ambient_dim=poly.ambient_dim, degree=degree, exponents=exps,
        coefficients=coefficients, sup_error=float(np.max(err)),
        fit_grid=poly.fit_grid, verify_grid=poly.verify_grid, rcond=rcond)


def project_to_tangent(surface, vectors, u, v):
    """Orthogonal projection of ambient vectors onto tangent planes.

    vectors has shape (..., n) aligned with the broadcast shape of (u, v).
    """
    jac = surface.jacobian(u, v)
    g_inv = np.linalg.inv(np.einsum("...ai,...aj->...ij", jac, jac))
    coeff = np.einsum("...ij,...aj,...a->...i", g_inv, jac, vectors)
    return np.einsum("...ai,...i->...a", jac, coeff)


def tangential_projection(surface, poly, u, v):
    """Tangential component of the polynomial map at chart points."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    pos = surface.embed(u, v)
    flat = pos.reshape(-1, surface.ambient_dim)
    vals = evaluate_polynomial_field(poly, flat).reshape(pos.shape)
    return project_to_tangent(surface, vals, u, v)


def chart_coefficients_field(surface, poly, name="smoothed"):
    """Chart-coefficient tangent field of the projected polynomial map.

    Coefficients are g^{-1} J^T P(x(u, v)): polynomial composed with the
    embedding, hence smooth wherever the chart is.
    """
    def coeff(u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        pos = surface.embed(u, v)
        flat = pos.reshape(-1, surface.ambient_dim)
        vals = evaluate_polynomial_field(poly, flat).reshape(pos.shape)
        jac = surface.jacobian(u, v)
        g_inv = np.linalg.inv(np.einsum("...ai,...aj->...ij", jac, jac))
        return np.einsum("...ij,...aj,...a->...i", g_inv, jac, vals)

    return TangentField(coeff, name=name)


def smooth_field(surface, X, max_degree=16, fit_grid=(64, 64), verify_grid=None,
                 floor=SAMPLE_FLOOR):
    """Escalate polynomial degree until the vector sup error is under 1/2.

    Degrees 2, 4, ... up to max_degree are tried on the fit grid; each fit is
    certified on the verification grid (VERIFY_FACTOR x denser per axis by
    default).  Returns (SmoothedFieldReport, smooth TangentField, poly).
    Raises BudgetNotMetError, carrying the report of the best attempt, when
    no tried degree meets the budget.
    """
    nu, nv = fit_grid
    if verify_grid is None:
        verify_grid = (VERIFY_FACTOR * nu, VERIFY_FACTOR * nv)
    fit_samples = sample_unit_field(surface, X, chart_grid(surface, nu, nv), floor)
    verify_samples = sample_unit_field(surface, X,
                                       chart_grid(surface, *verify_grid), floor)

    degrees = list(range(2, max_degree + 1, 2))
    best = None
    tried = []
    for d in degrees:
        poly = fit_polynomial_field(fit_samples, d, verify_samples)
        tried.append(d)
        if best is None or poly.sup_error < best.sup_error:
            best = poly
        if poly.sup_error < ERROR_BUDGET:
            break
    if best is None or best.sup_error >= ERROR_BUDGET:
        achieved = float("inf") if best is None else best.sup_error
        report = SmoothedFieldReport(
            final_degree=-1 if best is None else best.degree,
            sup_error=achieved, min_tangential_norm=0.0, target=ERROR_BUDGET,
            passed=False, degrees_tried=tuple(tried))
        raise BudgetNotMetError(
            f"no degree <= {max_degree} certified sup error < {ERROR_BUDGET:g} "
            f"(best achieved {achieved:.6g})", report=report)

    proj = project_to_tangent(
        surface,
        evaluate_polynomial_field(best, verify_samples.positions),
        verify_samples.chart_u, verify_samples.chart_v)
    min_tan = float(np.min(np.linalg.norm(proj, axis=-1)))
    report = SmoothedFieldReport(
        final_degree=best.degree, sup_error=best.sup_error,
        min_tangential_norm=min_tan, target=ERROR_BUDGET,
        passed=bool(best.sup_error < ERROR_BUDGET
                    and min_tan > ERROR_BUDGET - 1e-9),
        degrees_tried=tuple(tried))
    smooth = chart_coefficients_field(surface, best, name=f"smooth({X.name})")
    return report, smooth, best


# ---------------------------------------------------------------------------
# portable coefficient files
# ---------------------------------------------------------------------------

def write_coefficient_file(poly, path):
    """Plain-text export: header, then one coefficient row per component.

    The monomial basis is implied by (ambient_dim, degree) and the graded
    lexicographic ordering; coefficients carry 17 significant digits.
    """
    lines = [
        f"ambient_dim {poly.ambient_dim}",
        f"degree {poly.degree}",
        "monomial_ordering graded-lexicographic",
        f"components {poly.coefficients.shape[0]}",
        f"terms {poly.coefficients.shape[1]}",
    ]
    for row in poly.coefficients:
        lines.append(" ".join(f"{c:.17g}" for c in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_coefficient_file(path):
    """Inverse of write_coefficient_file; sup_error metadata is not stored."""
    with open(path) as fh:
        header = {}
        for _ in range(5):
            key, val = fh.readline().split()
            header[key] = val
        if header["monomial_ordering"] != "graded-lexicographic":
            raise ValueError("unsupported monomial ordering")
        n = int(header["ambient_dim"])
        degree = int(header["degree"])
        ncomp = int(header["components"])
        nterms = int(header["terms"])
        rows = [np.array([float(t) for t in fh.readline().split()])
                for _ in range(ncomp)]
    coeff = np.vstack(rows)
    exps = monomial_exponents(n, degree)
    if coeff.shape != (ncomp, nterms) or exps.shape[0] != nterms:
        raise ValueError("coefficient file is inconsistent with its header")
    return PolynomialField(ambient_dim=n, degree=degree, exponents=exps,
                           coefficients=coeff, sup_error=np.nan,
                           fit_grid=(), verify_grid=(), rcond=np.nan)
