"""Fourth-order central finite-difference stencils on chart coordinates.

All helpers accept callables ``f(u, v)`` returning scalars or arrays whose
trailing axes are value axes; the broadcast shape of ``(u, v)`` is preserved.
Stencil nodes may leave the chart rectangle: the built-in embeddings are
entire functions of (u, v), so off-chart evaluation is well defined.

Weights are formed from exact integer numerators in the dtype of the
evaluation points; precomputing them in float64 would put an eps/h^2 noise
floor under extended-precision runs.
"""

import numpy as np

D1_OFFSETS = np.array([-2, -1, 1, 2])
D1_NUM = np.array([1, -8, 8, -1])          # /12h

D2_OFFSETS = np.array([-2, -1, 0, 1, 2])
D2_NUM = np.array([-1, 16, -30, 16, -1])   # /12h^2


def _weights(num, dtype):
    return num.astype(dtype) / dtype.type(12)


def _apply(f, u, v, axis, offsets, num, h):
    u = np.asarray(u)
    v = np.asarray(v)
    hh = u.dtype.type(h)
    offs = offsets.astype(u.dtype) * hh
    if axis == 0:
        vals = f(u[..., None] + offs, v[..., None])
    else:
        vals = f(u[..., None], v[..., None] + offs)
    vals = np.asarray(vals)
    # stencil axis sits right after the broadcast shape of (u, v)
    k = np.broadcast(u, v).ndim
    return np.tensordot(vals, _weights(num, vals.dtype), axes=([k], [0]))


def diff1(f, u, v, axis, h):
    """First partial of f along the given chart axis."""
    out = _apply(f, u, v, axis, D1_OFFSETS, D1_NUM, h)
    return out / out.dtype.type(h)


def diff2(f, u, v, axis, h):
    """Second partial of f along the given chart axis."""
    out = _apply(f, u, v, axis, D2_OFFSETS, D2_NUM, h)
    return out / out.dtype.type(h) ** 2


def diff_cross(f, u, v, h):
    """Mixed partial d^2 f / du dv via tensor-product first-derivative stencils."""
    u = np.asarray(u)
    v = np.asarray(v)
    hh = u.dtype.type(h)
    offs = D1_OFFSETS.astype(u.dtype) * hh
    vals = f(u[..., None, None] + offs[:, None], v[..., None, None] + offs[None, :])
    vals = np.asarray(vals)
    k = np.broadcast(u, v).ndim
    w = _weights(D1_NUM, vals.dtype)
    out = np.tensordot(vals, w, axes=([k + 1], [0]))
    out = np.tensordot(out, w, axes=([k], [0]))
    return out / out.dtype.type(h) ** 2


def gradient(f, u, v, h):
    """Stack (d_u f, d_v f); derivative axis inserted before value axes."""
    du = diff1(f, u, v, 0, h)
    dv = diff1(f, u, v, 1, h)
    return np.stack([du, dv], axis=np.broadcast(np.asarray(u), np.asarray(v)).ndim)


def hessian(f, u, v, h):
    """Stack (d_uu f, d_uv f, d_vv f); derivative axis before value axes."""
    duu = diff2(f, u, v, 0, h)
    duv = diff_cross(f, u, v, h)
    dvv = diff2(f, u, v, 1, h)
    return np.stack([duu, duv, dvv], axis=np.broadcast(np.asarray(u), np.asarray(v)).ndim)
