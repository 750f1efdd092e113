"""Quadrature against the area element and the Euler-characteristic estimate.

Periodic chart axes use the equispaced trapezoidal rule (spectrally accurate
for smooth periodic integrands); non-periodic axes use Gauss-Legendre nodes,
which never touch the chart-singular ends.  The weighted reduction is an
ordinary fixed-order numpy sum, so results are reproducible bit-for-bit for
a given grid.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ChiIndeterminateError
from .operators import divergence_at, gauss_curvature_at
from .surfaces import chart_grid, metric_only

CHI_MARGIN = 0.01   # an order below the 0.5 rounding boundary


@dataclass(frozen=True)
class IntegralResult:
    """Value of a surface integral with an a-posteriori error estimate.

    estimated_error is the difference against the next-coarser grid
    (half the nodes per axis), a Richardson-style signal that works for
    both quadrature rules.
    """
    value: float
    resolution: tuple
    rule: str
    estimated_error: float


@dataclass(frozen=True)
class ChiEstimate:
    """Euler characteristic from the total-curvature integral."""
    raw: float
    rounded: int
    margin: float


def _weighted_sum(surface, f, grid):
    area_elem = np.sqrt(np.linalg.det(metric_only(surface, grid.U, grid.V)))
    vals = np.asarray(f(grid.U, grid.V), dtype=float)
    return float(np.sum(grid.weights * vals * area_elem))


def surface_integral(surface, f, grid):
    """Integral of the scalar chart function f against the area element."""
    value = _weighted_sum(surface, f, grid)
    coarse = chart_grid(surface, max(4, grid.nu // 2), max(4, grid.nv // 2))
    est = abs(value - _weighted_sum(surface, f, coarse))
    return IntegralResult(value=value, resolution=(grid.nu, grid.nv),
                          rule=grid.rule, estimated_error=est)


def surface_area(surface, grid):
    return surface_integral(surface, lambda u, v: np.ones(np.broadcast(u, v).shape), grid)


def total_curvature(surface, grid):
    """Integral of the Gauss curvature over the surface."""
    return surface_integral(surface, lambda u, v: gauss_curvature_at(surface, u, v),
                            grid)


def euler_characteristic(surface, grid):
    """Round the total curvature over 2*pi to the nearest integer.

    Raises ChiIndeterminateError when the raw value sits further than
    CHI_MARGIN from every integer, which signals an under-resolved grid.
    """
    total = total_curvature(surface, grid)
    raw = total.value / (2.0 * np.pi)
    rounded = int(np.rint(raw))
    margin = abs(raw - rounded)
    est = ChiEstimate(raw=raw, rounded=rounded, margin=margin)
    if margin >= CHI_MARGIN:
        raise ChiIndeterminateError(
            f"chi estimate {raw:.6f} is {margin:.3f} from the nearest integer "
            f"(limit {CHI_MARGIN:g}); refine the grid", estimate=est)
    return est


def divergence_theorem_residual(surface, X, grid):
    """Integral of div X over the closed surface; zero in exact arithmetic."""
    return surface_integral(surface,
                            lambda u, v: divergence_at(surface, X, u, v), grid)
