"""Command-line entry point: ``freeflight <subcommand> ...``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..kkt import ReferenceOptimum, find_reference_optimum, solve_against, classify, NoConvergenceError
from ..schwarz import SegmentTooShortError, smooth_then_solve
from ..timefunctional import travel_time
from ..trajectory import Trajectory, resample
from .config import ConfigError, RunConfig, load_config
from .render import render_map, write_transform_csv
from .sweep import ConvergenceMap, SweepSpec, empirical_radius, error_transform, run_sweep, start_for_cell

log = logging.getLogger("freeflight")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2


def _write_json(path: Path, record) -> None:
    path.write_text(json.dumps(record, indent=2, allow_nan=True) + "\n")


def _reference(cfg: RunConfig, args, problem) -> ReferenceOptimum:
    if getattr(args, "reference", None):
        t = Trajectory.from_csv(args.reference)
        if t.N != problem.N:
            t = resample(t, problem.N)
        return ReferenceOptimum(t, t.length(), travel_time(problem, t))
    return find_reference_optimum(problem, cfg.origin, cfg.destination, cfg.seeds, cfg.solve_options())


def _start(cfg, args, problem, ref):
    if args.trajectory:
        t = Trajectory.from_csv(args.trajectory)
        return resample(t, problem.N) if t.N != problem.N else t
    spec = SweepSpec(problem, ref)
    return start_for_cell(spec, args.hf, args.lf)


def cmd_find_optimum(cfg, args, out):
    problem = cfg.problem()
    ref = find_reference_optimum(problem, cfg.origin, cfg.destination, cfg.seeds, cfg.solve_options())
    ref.trajectory.to_csv(out / "reference.csv")
    _write_json(out / "reference.json", {"T": ref.T, "L": ref.L, "N": ref.trajectory.N})
    print(f"T* = {ref.T!r}  L* = {ref.L!r}")
    return EXIT_OK


def cmd_solve(cfg, args, out):
    problem = cfg.problem()
    ref = _reference(cfg, args, problem)
    start = _start(cfg, args, problem, ref)
    report = solve_against(problem, start, ref, cfg.solve_options())
    record = report.to_record()
    record["classified"] = classify(report, ref, cfg.eps)
    _write_json(out / "report.json", record)
    report.final.trajectory.to_csv(out / "solution.csv")
    print(f"{report.status.value} after {report.iterations} iterations, T = {report.travel_time!r}")
    return EXIT_OK if report.converged else EXIT_SOLVER


def cmd_smooth(cfg, args, out):
    problem = cfg.problem()
    ref = _reference(cfg, args, problem)
    start = _start(cfg, args, problem, ref)
    M = args.segments or cfg.M
    passes = cfg.passes if args.passes is None else args.passes
    result = smooth_then_solve(problem, start, M, ref, passes, cfg.solve_options(), cfg.eps)
    start.to_csv(out / "pass_0.csv")
    for i, p in enumerate(result.passes, start=1):
        p.trajectory.to_csv(out / f"pass_{i}.csv")
    result.solve.final.trajectory.to_csv(out / "final.csv")
    _write_json(out / "smooth_report.json", result.to_record())
    print(f"smoothed in {len(result.passes)} passes; final solve {result.solve.status.value}, "
          f"classified={result.classified}")
    return EXIT_OK if result.solve.converged else EXIT_SOLVER


def cmd_sweep(cfg, args, out):
    problem = cfg.problem()
    ref = _reference(cfg, args, problem)
    spec = SweepSpec(problem, ref, (cfg.hf_min, cfg.hf_max, cfg.hf_steps),
                     (cfg.lf_min, cfg.lf_max, cfg.lf_steps),
                     use_smoothing=cfg.use_smoothing or args.smoothing, M=cfg.M, passes=cfg.passes,
                     opts=cfg.solve_options(), eps=cfg.eps)
    cmap = run_sweep(spec, workers=args.threads)
    stem = "sweep_smoothed" if spec.use_smoothing else "sweep"
    render_map(cmap, out, stem, cfg.levels)
    radius = empirical_radius(cmap)
    _write_json(out / f"{stem}_summary.json",
                {"cells": len(cmap.cells), "converged": cmap.converged_count(),
                 "empirical_radius": radius, "smoothing": spec.use_smoothing})
    print(f"{cmap.converged_count()}/{len(cmap.cells)} converged, empirical radius {radius!r}")
    return EXIT_OK


def cmd_transform(cfg, args, out):
    cmap = ConvergenceMap.from_csv(args.map)
    quadrant = tuple(args.quadrant) if args.quadrant else None
    rows = error_transform(cmap, quadrant)
    write_transform_csv(rows, out / "transform.csv")
    print(f"{len(rows)} cells transformed")
    return EXIT_OK


def cmd_dump_wind(cfg, args, out):
    problem = cfg.problem()
    xs = np.linspace(args.xmin, args.xmax, args.nx)
    ys = np.linspace(args.ymin, args.ymax, args.ny)
    pts = np.array([(x, y) for y in ys for x in xs])
    w = problem.field.velocity(pts)
    with open(out / "wind.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y", "wx", "wy"])
        for (x, y), (wx, wy) in zip(pts, w):
            writer.writerow([repr(float(x)), repr(float(y)), repr(float(wx)), repr(float(wy))])
    print(f"wrote {len(pts)} samples")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    def global_flags(parser, suppress):
        default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        parser.add_argument("--config", type=Path, default=default(None),
                            help="key = value configuration file")
        parser.add_argument("--out", type=Path, default=default(Path(".")), help="output directory")
        parser.add_argument("--threads", type=int, default=default(1), help="worker processes for sweeps")
        parser.add_argument("-v", "--verbose", action="store_true", default=default(False))

    # flags are accepted before or after the subcommand; sub-level copies must not reset them
    common = argparse.ArgumentParser(add_help=False)
    global_flags(common, suppress=True)
    p = argparse.ArgumentParser(prog="freeflight",
                                description="Free-flight trajectory optimization in vortex wind fields.")
    global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)

    def start_args(sp):
        sp.add_argument("--trajectory", type=Path, help="start trajectory CSV (tau, x, y)")
        sp.add_argument("--reference", type=Path, help="reference optimum CSV; computed if omitted")
        sp.add_argument("--hf", type=float, default=0.0, help="signed high-frequency deviation norm")
        sp.add_argument("--lf", type=float, default=0.0, help="signed low-frequency deviation norm")

    sp = sub.add_parser("solve", parents=[common], help="single Newton-KKT solve")
    start_args(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("smooth", parents=[common], help="Schwarz smoothing, then solve")
    start_args(sp)
    sp.add_argument("--segments", type=int, default=None)
    sp.add_argument("--passes", type=int, default=None)
    sp.set_defaults(func=cmd_smooth)

    sp = sub.add_parser("sweep", parents=[common], help="basin of convergence sweep")
    sp.add_argument("--reference", type=Path)
    sp.add_argument("--smoothing", action="store_true")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("transform", parents=[common], help="distance/angular error transform")
    sp.add_argument("--map", type=Path, required=True, help="sweep CSV")
    sp.add_argument("--quadrant", type=int, nargs=2, choices=(-1, 1), metavar=("SIGN_HF", "SIGN_LF"))
    sp.set_defaults(func=cmd_transform)

    sp = sub.add_parser("dump-wind", parents=[common], help="sample the wind field")
    sp.add_argument("--nx", type=int, default=101)
    sp.add_argument("--ny", type=int, default=61)
    sp.add_argument("--xmin", type=float, default=0.0)
    sp.add_argument("--xmax", type=float, default=1.0)
    sp.add_argument("--ymin", type=float, default=-0.3)
    sp.add_argument("--ymax", type=float, default=0.3)
    sp.set_defaults(func=cmd_dump_wind)

    sp = sub.add_parser("find-optimum", parents=[common], help="multistart reference optimum")
    sp.set_defaults(func=cmd_find_optimum)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg.problem()
    except (ConfigError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    try:
        return args.func(cfg, args, out)
    except (NoConvergenceError, SegmentTooShortError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
