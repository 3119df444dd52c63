"""Sampling the solver's basin over the two-frequency deviation plane."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..kkt import ReferenceOptimum, SolveOptions, classify, solve_against
from ..schwarz import smooth_then_solve
from ..timefunctional import ProblemSpec
from ..trajectory import apply_deviations, build_deviation

K_LF = 1
K_HF = 30


def amplitude_from_signed_norm(s: float, k: int) -> float:
    """Amplitude whose deviation ``a n sin(k pi tau)`` has W^{1,inf} norm ``|s|``; keeps the sign."""
    return s / (1.0 + k * math.pi)


def axis_values(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 2:
        raise ValueError("each sweep axis needs at least 2 steps")
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("sweep bounds must be finite")
    vals = lo + (hi - lo) * np.arange(steps) / (steps - 1)
    vals[np.abs(vals) < 1e-12 * max(abs(lo), abs(hi), 1.0)] = 0.0
    return vals


@dataclass(frozen=True)
class SweepSpec:
    problem: ProblemSpec
    reference: ReferenceOptimum
    hf_axis: tuple[float, float, int] = (-0.6, 0.6, 61)
    lf_axis: tuple[float, float, int] = (-0.6, 0.6, 61)
    k_hf: int = K_HF
    k_lf: int = K_LF
    use_smoothing: bool = False
    M: int = 11
    passes: int = 2
    opts: SolveOptions = field(default_factory=SolveOptions)
    eps: float = 1e-3

    def cells(self) -> list[tuple[float, float]]:
        hf = axis_values(*self.hf_axis)
        lf = axis_values(*self.lf_axis)
        return [(float(h), float(l)) for l in lf for h in hf]


@dataclass(frozen=True)
class CellResult:
    s_hf: float
    s_lf: float
    converged: bool
    iterations: int
    T: float
    distance: float
    status: str

    @property
    def combined_norm(self) -> float:
        return abs(self.s_hf) + abs(self.s_lf)


@dataclass
class ConvergenceMap:
    hf_values: np.ndarray
    lf_values: np.ndarray
    cells: list[CellResult]
    smoothed: bool = False

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.lf_values), len(self.hf_values)

    def converged_grid(self) -> np.ndarray:
        """Boolean array indexed ``[lf, hf]``."""
        return np.array([c.converged for c in self.cells]).reshape(self.shape)

    def converged_count(self) -> int:
        return sum(c.converged for c in self.cells)

    def cell(self, s_hf: float, s_lf: float) -> CellResult:
        for c in self.cells:
            if c.s_hf == s_hf and c.s_lf == s_lf:
                return c
        raise KeyError((s_hf, s_lf))

    @classmethod
    def from_csv(cls, path) -> "ConvergenceMap":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        cells = [CellResult(float(r["s_hf"]), float(r["s_lf"]), r["converged"] in ("1", "True", "true"),
                            int(r["iterations"]), float(r["T"]), float(r["distance"]),
                            r.get("status", "")) for r in rows]
        hf = sorted({c.s_hf for c in cells})
        lf = sorted({c.s_lf for c in cells})
        return cls(np.array(hf), np.array(lf), cells)


def start_for_cell(spec: SweepSpec, s_hf: float, s_lf: float):
    anchor = spec.reference.trajectory
    devs = [build_deviation(anchor, spec.k_hf, amplitude_from_signed_norm(s_hf, spec.k_hf)),
            build_deviation(anchor, spec.k_lf, amplitude_from_signed_norm(s_lf, spec.k_lf))]
    return apply_deviations(anchor, devs)


def solve_cell(spec: SweepSpec, s_hf: float, s_lf: float) -> CellResult:
    start = start_for_cell(spec, s_hf, s_lf)
    try:
        if spec.use_smoothing:
            rep = smooth_then_solve(spec.problem, start, spec.M, spec.reference,
                                    spec.passes, spec.opts, spec.eps)
            report, ok = rep.solve, bool(rep.classified)
        else:
            report = solve_against(spec.problem, start, spec.reference, spec.opts)
            ok = classify(report, spec.reference, spec.eps)
    except ValueError as exc:  # degenerate start geometry; record, never abort the sweep
        return CellResult(s_hf, s_lf, False, 0, math.nan, math.nan, f"error: {exc}")
    dist = report.distance_to_reference
    return CellResult(s_hf, s_lf, ok, report.iterations, float(report.travel_time),
                      math.nan if dist is None else float(dist), report.status.value)


def _solve_packed(args):
    spec, s_hf, s_lf = args
    return solve_cell(spec, s_hf, s_lf)


def run_sweep(spec: SweepSpec, workers: int = 1) -> ConvergenceMap:
    """Solve every grid cell; the result is ordered by cell index whatever the worker count."""
    cells = spec.cells()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(cells) // (8 * workers))
            results = list(pool.map(_solve_packed, [(spec, h, l) for h, l in cells], chunksize=chunk))
    else:
        results = [solve_cell(spec, h, l) for h, l in cells]
    return ConvergenceMap(axis_values(*spec.hf_axis), axis_values(*spec.lf_axis), results,
                          spec.use_smoothing)


def empirical_radius(cmap: ConvergenceMap) -> float:
    """Largest sampled combined norm ``r`` such that every cell with norm <= r converged."""
    if not cmap.cells:
        raise ValueError("empty convergence map")
    failed = [c.combined_norm for c in cmap.cells if not c.converged]
    bound = min(failed) if failed else math.inf
    inside = [c.combined_norm for c in cmap.cells if c.converged and c.combined_norm < bound]
    return max(inside, default=0.0)


def error_components(s_hf: float, s_lf: float, k_hf: int = K_HF, k_lf: int = K_LF) -> tuple[float, float]:
    """(distance error, angular error) of the deviation with signed norms ``s_hf``, ``s_lf``."""
    w_lf = 1.0 + k_lf * math.pi
    w_hf = 1.0 + k_hf * math.pi
    dist = abs(s_lf) / w_lf + abs(s_hf) / w_hf
    ang = abs(s_lf) * k_lf * math.pi / w_lf + abs(s_hf) * k_hf * math.pi / w_hf
    return dist, ang


@dataclass(frozen=True)
class TransformedCell:
    s_hf: float
    s_lf: float
    distance_error: float
    angular_error: float
    converged: bool
    quadrant: tuple[int, int]


def _quadrant(s_hf, s_lf):
    return (1 if s_hf >= 0 else -1, 1 if s_lf >= 0 else -1)


def error_transform(cmap: ConvergenceMap, quadrant: Optional[tuple[int, int]] = None,
                    k_hf: int = K_HF, k_lf: int = K_LF) -> list[TransformedCell]:
    """Map cells onto the (distance error, angular error) plane.

    With ``quadrant=(sign_hf, sign_lf)`` only cells in that closed quadrant are
    emitted; otherwise every cell is emitted once, tagged with its quadrant
    (zero coordinates count as positive).
    """
    out = []
    for c in cmap.cells:
        if quadrant is not None and (c.s_hf * quadrant[0] < 0 or c.s_lf * quadrant[1] < 0):
            continue
        dist, ang = error_components(c.s_hf, c.s_lf, k_hf, k_lf)
        tag = quadrant if quadrant is not None else _quadrant(c.s_hf, c.s_lf)
        out.append(TransformedCell(c.s_hf, c.s_lf, dist, ang, c.converged, tag))
    return out


def with_smoothing(spec: SweepSpec, on: bool = True) -> SweepSpec:
    return replace(spec, use_smoothing=on)
