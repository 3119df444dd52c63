"""Nonlinear alternating Schwarz smoothing in pseudo-time.

A pass splits the route at waypoints placed at equal arc-length fractions and
re-solves each piece with its endpoints frozen.  Pieces within a pass touch
only at waypoints, so they are independent; alternating passes shift the
waypoints by half a segment, which is where the overlap comes from.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .kkt import (
    ReferenceOptimum,
    SolveOptions,
    SolveReport,
    classify,
    initialize_state,
    newton_solve,
    solve_against,
)
from .timefunctional import ProblemSpec, travel_time
from .trajectory import Trajectory

log = logging.getLogger(__name__)

MIN_SEGMENT_INTERVALS = 2


class SegmentTooShortError(ValueError):
    pass


@dataclass(frozen=True)
class SegmentPlan:
    M: int
    boundaries: tuple[int, ...]
    shifted: bool

    @property
    def segments(self) -> list[tuple[int, int]]:
        return list(zip(self.boundaries[:-1], self.boundaries[1:]))


@dataclass
class SegmentOutcome:
    start: int
    stop: int
    accepted: bool
    status: str
    time_before: float
    time_after: float


@dataclass
class PassReport:
    plan: SegmentPlan
    segments: list[SegmentOutcome]
    time_before: float
    time_after: float
    trajectory: Trajectory

    @property
    def failed(self) -> list[tuple[int, int]]:
        return [(s.start, s.stop) for s in self.segments if not s.accepted]


def make_plan(t: Trajectory, M: int, shifted: bool = False) -> SegmentPlan:
    """Waypoints at the grid nodes closest to arc-length fractions ``i/M`` (or ``(i + 1/2)/M``)."""
    if M < 2:
        raise SegmentTooShortError("need at least two segments")
    if t.N < 4 * M:
        raise SegmentTooShortError(f"N={t.N} too small for {M} segments (need N >= 4M)")
    arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(t.nodes, axis=0), axis=1))])
    if shifted:
        fractions = (np.arange(M) + 0.5) / M
    else:
        fractions = np.arange(1, M) / M
    interior = [int(np.argmin(np.abs(arc - f * arc[-1]))) for f in fractions]
    boundaries = (0, *interior, t.N)
    steps = np.diff(boundaries)
    if np.any(steps < MIN_SEGMENT_INTERVALS):
        raise SegmentTooShortError(f"segment boundaries {boundaries} leave a piece that is too short")
    return SegmentPlan(M, tuple(boundaries), shifted)


def _segment_solve(spec, t, start, stop, opts):
    nodes = t.nodes
    piece = Trajectory(nodes[start:stop + 1])
    sub = ProblemSpec(spec.field, spec.airspeed, piece.N, spec.fd_hessian)
    before = travel_time(sub, piece)
    report = newton_solve(sub, initialize_state(piece), opts)
    after = report.travel_time
    # a KKT point need not be a minimizer; keep the old piece unless time improves
    accepted = report.converged and after <= before + 1e-12
    result = report.final.trajectory.nodes if accepted else piece.nodes
    return result, SegmentOutcome(start, stop, accepted, report.status.value, before,
                                  after if accepted else before)


def optimize_segment(spec: ProblemSpec, t: Trajectory, from_idx: int, to_idx: int,
                     opts: SolveOptions = SolveOptions()) -> tuple[Trajectory, SegmentOutcome]:
    """Re-solve the nodes strictly between ``from_idx`` and ``to_idx`` with both ends fixed."""
    if to_idx - from_idx < MIN_SEGMENT_INTERVALS:
        raise SegmentTooShortError(f"segment [{from_idx}, {to_idx}] is too short")
    result, outcome = _segment_solve(spec, t, from_idx, to_idx, opts)
    nodes = t.nodes.copy()
    nodes[from_idx:to_idx + 1] = result
    return Trajectory(nodes), outcome


def schwarz_pass(spec: ProblemSpec, t: Trajectory, plan: SegmentPlan,
                 opts: SolveOptions = SolveOptions(), order: Optional[Sequence[int]] = None) -> PassReport:
    segments = plan.segments
    order = range(len(segments)) if order is None else order
    nodes = t.nodes.copy()
    outcomes: dict[int, SegmentOutcome] = {}
    for j in order:
        start, stop = segments[j]
        # every piece reads the pass input, never a neighbour's result
        result, outcomes[j] = _segment_solve(spec, t, start, stop, opts)
        nodes[start + 1:stop] = result[1:-1]
    out = Trajectory(nodes)
    return PassReport(plan, [outcomes[j] for j in range(len(segments))],
                      travel_time(spec, t), travel_time(spec, out), out)


def schwarz_smooth(spec: ProblemSpec, t: Trajectory, M: int = 11, passes: int = 2,
                   opts: SolveOptions = SolveOptions()) -> tuple[Trajectory, list[PassReport]]:
    """Alternate unshifted and half-shifted passes; returns the smoothed route and per-pass reports."""
    reports = []
    current = t
    for p in range(passes):
        plan = make_plan(current, M, shifted=bool(p % 2))
        rep = schwarz_pass(spec, current, plan, opts)
        if rep.failed:
            log.debug("pass %d: %d segment(s) kept unchanged", p, len(rep.failed))
        reports.append(rep)
        current = rep.trajectory
    return current, reports


@dataclass
class SmoothedSolveReport:
    smoothed: Trajectory
    passes: list[PassReport]
    solve: SolveReport
    classified: Optional[bool] = None

    def to_record(self) -> dict:
        rec = self.solve.to_record()
        rec["classified"] = self.classified
        rec["passes"] = [
            {"shifted": p.plan.shifted, "boundaries": list(p.plan.boundaries),
             "T_before": p.time_before, "T_after": p.time_after,
             "failed_segments": [list(s) for s in p.failed]}
            for p in self.passes
        ]
        return rec


def smooth_then_solve(spec: ProblemSpec, t: Trajectory, M: int = 11,
                      ref: Optional[ReferenceOptimum] = None, passes: int = 2,
                      opts: SolveOptions = SolveOptions(), eps: float = 1e-3) -> SmoothedSolveReport:
    smoothed, reports = schwarz_smooth(spec, t, M, passes, opts)
    solve = solve_against(spec, smoothed, ref, opts)
    classified = classify(solve, ref, eps) if ref is not None else None
    return SmoothedSolveReport(smoothed, reports, solve, classified)
