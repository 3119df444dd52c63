"""Flight-duration integrand and the discretized travel time with derivatives.

The integrand ``f(x, v)`` is the positive root of

    (vbar^2 - w.w) f^2 + 2 (v.w) f - v.v = 0,    w = w(x),

i.e. the pseudo-time rate at which a point moving with ground velocity
``v / f`` keeps airspeed ``vbar``.  Derivatives are taken by implicit
differentiation of that quadratic, which avoids the cancellation-prone
closed form.

The travel time uses the composite midpoint rule:
``T = sum_i f((x_i + x_{i+1}) / 2, N (x_{i+1} - x_i)) / N``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .trajectory import Trajectory
from .windfield import WindField


class WindExceedsAirspeedError(ValueError):
    pass


class SingularConfigurationError(ValueError):
    """f is not differentiable at a zero-length interval."""


@dataclass(frozen=True)
class ProblemSpec:
    field: WindField
    airspeed: float = 1.0
    N: int = 512
    fd_hessian: bool = False

    def __post_init__(self):
        if not self.airspeed > 0:
            raise ValueError("airspeed must be positive")
        if self.field.max_strength >= self.airspeed:
            raise WindExceedsAirspeedError(
                f"peak wind {self.field.max_strength} must stay below airspeed {self.airspeed}")


@dataclass
class Evaluation:
    value: float
    gradient: np.ndarray
    hessian: sparse.csr_matrix


def _f_from_wind(vbar, w, v):
    ww = np.einsum("...i,...i->...", w, w)
    a = vbar * vbar - ww
    if np.any(a <= 0.0):
        raise WindExceedsAirspeedError("wind speed reaches airspeed")
    b = np.einsum("...i,...i->...", v, w)
    c = np.einsum("...i,...i->...", v, v)
    root = np.sqrt(b * b + a * c)
    # f = (-b + root) / a rewritten as c / (b + root) to avoid cancellation in tailwind
    with np.errstate(invalid="ignore", divide="ignore"):
        f = np.where(c > 0.0, c / (b + root), 0.0)
    return f, root


def integrand(spec: ProblemSpec, xi, xi_tau):
    """Pseudo-time rate ``t_tau`` at position ``xi`` with path velocity ``xi_tau``."""
    w = spec.field.velocity(xi)
    f, _ = _f_from_wind(spec.airspeed, w, np.asarray(xi_tau, dtype=float))
    return f if np.ndim(f) else float(f)


def travel_time(spec: ProblemSpec, t: Trajectory) -> float:
    mid = 0.5 * (t.nodes[1:] + t.nodes[:-1])
    f, _ = _f_from_wind(spec.airspeed, spec.field.velocity(mid), t.derivative())
    return float(f.sum() / t.N)


def _integrand_derivatives(vbar, w, v):
    """f and its first/second derivatives with respect to (w, v), batched.

    Returns f (n,), grad (n, 4) and hess (n, 4, 4) in the variable order (w1, w2, v1, v2).
    """
    f, root = _f_from_wind(vbar, w, v)
    if np.any(np.einsum("ni,ni->n", v, v) == 0.0):
        raise SingularConfigurationError("zero-length interval")
    n = f.shape[0]
    a = vbar * vbar - np.einsum("ni,ni->n", w, w)
    phi_f = 2.0 * root                       # d Phi / d f
    phi_z = np.empty((n, 4))                 # d Phi / d (w, v)
    phi_z[:, :2] = 2.0 * (v * f[:, None] - w * (f * f)[:, None])
    phi_z[:, 2:] = 2.0 * (w * f[:, None] - v)
    grad = -phi_z / phi_f[:, None]

    phi_zf = np.empty((n, 4))
    phi_zf[:, :2] = 2.0 * v - 4.0 * w * f[:, None]
    phi_zf[:, 2:] = 2.0 * w
    phi_ff = 2.0 * a
    eye = np.eye(2)
    phi_zz = np.zeros((n, 4, 4))
    phi_zz[:, :2, :2] = -2.0 * (f * f)[:, None, None] * eye
    phi_zz[:, :2, 2:] = 2.0 * f[:, None, None] * eye
    phi_zz[:, 2:, :2] = 2.0 * f[:, None, None] * eye
    phi_zz[:, 2:, 2:] = -2.0 * eye
    cross = phi_zf[:, :, None] * grad[:, None, :]
    hess = -(phi_zz + cross + cross.transpose(0, 2, 1)
             + phi_ff[:, None, None] * grad[:, :, None] * grad[:, None, :]) / phi_f[:, None, None]
    return f, grad, hess


def interval_derivatives(spec: ProblemSpec, nodes: np.ndarray):
    """Per-interval value, gradient (n, 4) and Hessian (n, 4, 4) of ``f(mid_i, v_i) / N``
    with respect to the local coordinates ``(x_i, x_{i+1})``."""
    n_int = nodes.shape[0] - 1
    mid = 0.5 * (nodes[1:] + nodes[:-1])
    v = n_int * np.diff(nodes, axis=0)
    field = spec.field
    w = field.velocity(mid)
    dw = field.jacobian(mid)
    d2w = field.second_derivatives(mid)
    f, g, h = _integrand_derivatives(spec.airspeed, w, v)

    # chain rule through w(x): variables (x, v)
    g_x = np.einsum("ni,nij->nj", g[:, :2], dw)
    h_xx = np.einsum("nia,nij,njb->nab", dw, h[:, :2, :2], dw)
    h_xx += np.einsum("ni,nijk->njk", g[:, :2], d2w)
    h_xv = np.einsum("nia,nij->naj", dw, h[:, :2, 2:])
    h_vv = h[:, 2:, 2:]
    gx = np.concatenate([g_x, g[:, 2:]], axis=1)
    hx = np.empty((n_int, 4, 4))
    hx[:, :2, :2] = h_xx
    hx[:, :2, 2:] = h_xv
    hx[:, 2:, :2] = h_xv.transpose(0, 2, 1)
    hx[:, 2:, 2:] = h_vv

    # (mid, v) as a linear map of (x_i, x_{i+1})
    eye = np.eye(2)
    P = np.block([[0.5 * eye, 0.5 * eye], [-n_int * eye, n_int * eye]])
    loc_g = gx @ P / n_int
    loc_h = np.einsum("ai,nab,bj->nij", P, hx, P) / n_int
    return f / n_int, loc_g, loc_h


def assemble(local_g: np.ndarray, local_h: np.ndarray):
    """Scatter per-interval contributions onto the interior-node coordinates.

    Interior coordinates are ordered ``(x_1, y_1, x_2, y_2, ...)``; endpoint
    contributions are dropped because the endpoints are fixed.
    """
    n_int = local_g.shape[0]
    m = 2 * (n_int - 1)
    # global index of local coordinate j in interval i is 2*i + j - 2 (node i) ...
    idx = 2 * np.arange(n_int)[:, None] + np.arange(4)[None, :] - 2
    keep = (idx >= 0) & (idx < m)
    grad = np.zeros(m)
    np.add.at(grad, idx[keep], local_g[keep])
    rows = np.broadcast_to(idx[:, :, None], local_h.shape)
    cols = np.broadcast_to(idx[:, None, :], local_h.shape)
    mask = keep[:, :, None] & keep[:, None, :]
    hess = sparse.coo_matrix((local_h[mask], (rows[mask], cols[mask])), shape=(m, m)).tocsr()
    return grad, hess


def evaluate_with_derivatives(spec: ProblemSpec, t: Trajectory) -> Evaluation:
    f, lg, lh = interval_derivatives(spec, t.nodes)
    grad, hess = assemble(lg, lh)
    if spec.fd_hessian:
        hess = fd_hessian(spec, t)
    return Evaluation(float(f.sum()), grad, hess)


def gradient(spec: ProblemSpec, t: Trajectory) -> np.ndarray:
    _, lg, lh = interval_derivatives(spec, t.nodes)
    return assemble(lg, lh)[0]


def fd_hessian(spec: ProblemSpec, t: Trajectory, step: float = 1e-6) -> sparse.csr_matrix:
    """Central differences of the analytic gradient, symmetrized."""
    x0 = t.interior.ravel()
    m = x0.size
    cols = []
    for j in range(m):
        e = np.zeros(m)
        e[j] = step
        gp = gradient(spec, t.with_interior(x0 + e))
        gm = gradient(spec, t.with_interior(x0 - e))
        cols.append((gp - gm) / (2.0 * step))
    h = np.column_stack(cols)
    return sparse.csr_matrix(0.5 * (h + h.T))
