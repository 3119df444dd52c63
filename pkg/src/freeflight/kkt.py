"""Undamped Newton-KKT iteration for the constant-ground-speed travel-time problem.

Discrete problem: minimize ``T(x)`` over interior nodes subject to
``c_i = (|N (x_{i+1} - x_i)|^2 - L^2) / N = 0`` for every interval, with ``L``
a free scalar.  The unknown vector is ``z = (interior nodes, L, lambda)``.
"""
from __future__ import annotations

import enum
import math
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .timefunctional import (
    ProblemSpec,
    SingularConfigurationError,
    WindExceedsAirspeedError,
    assemble,
    fd_hessian,
    interval_derivatives,
    travel_time,
)
from .trajectory import (
    Trajectory,
    apply_deviations,
    build_deviation,
    discrete_w1inf_distance,
    straight_line,
)


class Status(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max-iterations"
    SINGULAR = "singular-system"
    DIVERGED = "diverged"


class NoConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class KKTState:
    trajectory: Trajectory
    L: float
    lam: np.ndarray

    @property
    def N(self) -> int:
        return self.trajectory.N

    @property
    def interior(self) -> np.ndarray:
        return self.trajectory.interior

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.interior.ravel(), [self.L], self.lam])

    def from_vector(self, z: np.ndarray) -> "KKTState":
        m = 2 * (self.N - 1)
        return KKTState(self.trajectory.with_interior(z[:m]), float(z[m]), z[m + 1:].copy())


@dataclass(frozen=True)
class SolveOptions:
    tol: float = 1e-10
    max_iter: int = 100
    box: tuple[float, float, float, float] = (-5.0, 6.0, -5.0, 5.0)


@dataclass
class SolveReport:
    status: Status
    iterations: int
    residual_history: list[float]
    final: KKTState
    travel_time: float = math.nan
    distance_to_reference: Optional[float] = None

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    def to_record(self) -> dict:
        return {
            "status": self.status.value,
            "iterations": self.iterations,
            "T": self.travel_time,
            "L": self.final.L,
            "distance_to_reference": self.distance_to_reference,
            "residual_history": list(self.residual_history),
        }


@dataclass(frozen=True)
class ReferenceOptimum:
    """A converged solution used as the basin anchor.

    The discrete multipliers are small but nonzero (quadrature error), so they
    are kept for restarting exactly at the solution.
    """

    trajectory: Trajectory
    L: float
    T: float
    lam: Optional[np.ndarray] = None

    def state(self) -> KKTState:
        lam = np.zeros(self.trajectory.N) if self.lam is None else self.lam
        return KKTState(self.trajectory, self.L, lam)


def initialize_state(t: Trajectory) -> KKTState:
    """Multipliers at zero and ``L`` at the candidate's path length."""
    return KKTState(t, t.length(), np.zeros(t.N))


def _constraint_parts(nodes: np.ndarray, L: float, lam: np.ndarray):
    n = nodes.shape[0] - 1
    v = n * np.diff(nodes, axis=0)
    c = (np.einsum("ni,ni->n", v, v) - L * L) / n
    dc = np.concatenate([-2.0 * v, 2.0 * v], axis=1)          # (n, 4) local gradients
    eye = np.eye(2)
    block = 2.0 * n * np.block([[eye, -eye], [-eye, eye]])
    d2c = lam[:, None, None] * block                           # lambda-weighted local Hessians
    return c, dc, d2c


@lru_cache(maxsize=64)
def _pattern(n: int):
    """Sparsity pattern of the KKT matrix for ``n`` intervals (row, col index arrays)."""
    m = 2 * (n - 1)
    idx = 2 * np.arange(n)[:, None] + np.arange(4)[None, :] - 2
    keep = (idx >= 0) & (idx < m)
    h_mask = keep[:, :, None] & keep[:, None, :]
    h_rows = np.broadcast_to(idx[:, :, None], (n, 4, 4))[h_mask]
    h_cols = np.broadcast_to(idx[:, None, :], (n, 4, 4))[h_mask]
    lam_idx = m + 1 + np.broadcast_to(np.arange(n)[:, None], (n, 4))[keep]
    b_rows = idx[keep]
    l_idx = np.full(n, m)
    lam_all = m + 1 + np.arange(n)
    rows = np.concatenate([h_rows, b_rows, lam_idx, l_idx, lam_all, [m]])
    cols = np.concatenate([h_cols, lam_idx, b_rows, lam_all, l_idx, [m]])
    return h_mask, keep, rows, cols, m + 1 + n


def _pieces(spec: ProblemSpec, s: KKTState, need_jacobian: bool):
    nodes = s.trajectory.nodes
    n = s.N
    f, lg, lh = interval_derivatives(spec, nodes)
    c, dc, d2c = _constraint_parts(nodes, s.L, s.lam)
    h_mask, keep, rows, cols, size = _pattern(n)
    g_loc = lg + s.lam[:, None] * dc
    m = 2 * (n - 1)
    grad = np.zeros(m)
    idx = 2 * np.arange(n)[:, None] + np.arange(4)[None, :] - 2
    np.add.at(grad, idx[keep], g_loc[keep])
    F = np.concatenate([grad, [-2.0 * s.L * s.lam.sum() / n], c])
    if not need_jacobian:
        return F, None, float(f.sum())
    b = dc[keep]
    tail = np.concatenate([b, b, np.full(2 * n, -2.0 * s.L / n), [-2.0 * s.lam.sum() / n]])
    if spec.fd_hessian:
        hess = fd_hessian(spec, s.trajectory) + assemble(np.zeros_like(lg), d2c)[1]
        hess = hess.tocoo()
        data = np.concatenate([hess.data, tail])
        rows = np.concatenate([hess.row, rows[h_mask.sum():]])
        cols = np.concatenate([hess.col, cols[h_mask.sum():]])
    else:
        data = np.concatenate([(lh + d2c)[h_mask], tail])
    J = sparse.csc_matrix((data, (rows, cols)), shape=(size, size))
    return F, J, float(f.sum())


def kkt_residual(spec: ProblemSpec, s: KKTState) -> np.ndarray:
    """Stationarity in the nodes, stationarity in ``L``, then the interval constraints."""
    return _pieces(spec, s, need_jacobian=False)[0]


def kkt_jacobian(spec: ProblemSpec, s: KKTState) -> sparse.csc_matrix:
    return _pieces(spec, s, need_jacobian=True)[1]


def _inside_box(s: KKTState, box) -> bool:
    x, y = s.trajectory.nodes[:, 0], s.trajectory.nodes[:, 1]
    return bool(np.all((x >= box[0]) & (x <= box[1]) & (y >= box[2]) & (y <= box[3])))


def newton_solve(spec: ProblemSpec, init: KKTState, opts: SolveOptions = SolveOptions()) -> SolveReport:
    """Plain Newton steps ``z <- z - J(z)^{-1} F(z)``; no line search or damping."""
    s = init
    history: list[float] = []
    z = s.to_vector()
    status = Status.MAX_ITERATIONS
    it = 0
    T = math.nan
    while True:
        try:
            F, J, T = _pieces(spec, s, need_jacobian=True)
        except (SingularConfigurationError, WindExceedsAirspeedError):
            status = Status.SINGULAR
            break
        r = float(np.max(np.abs(F)))
        if not np.isfinite(r):
            status = Status.DIVERGED
            break
        history.append(r)
        if r <= opts.tol:
            status = Status.CONVERGED
            break
        if it >= opts.max_iter:
            status = Status.MAX_ITERATIONS
            break
        try:
            with np.errstate(all="ignore"):
                step = splu(J).solve(F)
        except RuntimeError:
            status = Status.SINGULAR
            break
        if not np.all(np.isfinite(step)):
            status = Status.SINGULAR
            break
        z = z - step
        it += 1
        s = s.from_vector(z)
        if not (np.all(np.isfinite(z)) and _inside_box(s, opts.box)):
            status = Status.DIVERGED
            break
    return SolveReport(status, it, history, s, T if status is Status.CONVERGED else _safe_time(spec, s))


def _safe_time(spec, s):
    try:
        return travel_time(spec, s.trajectory)
    except (ValueError, FloatingPointError):
        return math.nan


def classify(report: SolveReport, ref: ReferenceOptimum, eps: float = 1e-3) -> bool:
    """True iff the solve converged and landed within ``eps`` of the reference (discrete W^{1,inf})."""
    if report.status is not Status.CONVERGED:
        return False
    if report.final.N != ref.trajectory.N:
        raise ValueError("report and reference live on different grids")
    return discrete_w1inf_distance(report.final.trajectory, ref.trajectory) <= eps


def solve_against(spec, start: Trajectory, ref: Optional[ReferenceOptimum],
                  opts: SolveOptions = SolveOptions()) -> SolveReport:
    report = newton_solve(spec, initialize_state(start), opts)
    if ref is not None and np.all(np.isfinite(report.final.trajectory.nodes)):
        report.distance_to_reference = discrete_w1inf_distance(report.final.trajectory, ref.trajectory)
    return report


DEFAULT_BEND_AMPLITUDES = (0.05, -0.05, 0.1, -0.1, 0.15, -0.15, 0.2, -0.2)


def find_reference_optimum(spec: ProblemSpec, x_o=(0.0, 0.0), x_d=(1.0, 0.0),
                           amplitudes: Sequence[float] = DEFAULT_BEND_AMPLITUDES,
                           opts: SolveOptions = SolveOptions()) -> ReferenceOptimum:
    """Multistart from the straight line and single-arc bends; keep the fastest converged route."""
    line = straight_line(x_o, x_d, spec.N)
    starts = [line] + [apply_deviations(line, [build_deviation(line, 1, a)]) for a in amplitudes]
    best = None
    for start in starts:
        report = newton_solve(spec, initialize_state(start), opts)
        if report.converged and (best is None or report.travel_time < best.travel_time):
            best = report
    if best is None:
        raise NoConvergenceError("no multistart candidate converged")
    return ReferenceOptimum(best.final.trajectory, best.final.L, best.travel_time, best.final.lam)
