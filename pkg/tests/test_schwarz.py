import math

import numpy as np
import pytest

from freeflight.kkt import classify, find_reference_optimum, solve_against
from freeflight.schwarz import (
    SegmentTooShortError,
    make_plan,
    optimize_segment,
    schwarz_pass,
    schwarz_smooth,
    smooth_then_solve,
)
from freeflight.timefunctional import ProblemSpec, travel_time
from freeflight.trajectory import (
    Trajectory,
    apply_deviations,
    build_deviation,
    discrete_w1inf_distance,
    straight_line,
)
from freeflight.windfield import zero_field


def zigzag(anchor, s_hf):
    return apply_deviations(anchor, [build_deviation(anchor, 30, s_hf / (1 + 30 * math.pi))])


def angular_error(t, anchor):
    return float(np.linalg.norm(t.derivative() - anchor.derivative(), axis=1).max())


def test_plan_examples(ref256):
    line = straight_line((0, 0), (1, 0), 8)
    assert make_plan(line, 2).boundaries == (0, 4, 8)
    assert make_plan(line, 2, shifted=True).boundaries == (0, 2, 6, 8)
    plan = make_plan(zigzag(ref256.trajectory, 1.0), 11)
    assert len(plan.boundaries) == 12
    assert plan.boundaries[0] == 0 and plan.boundaries[-1] == 256
    assert all(b > a for a, b in zip(plan.boundaries, plan.boundaries[1:]))
    shifted = make_plan(ref256.trajectory, 11, shifted=True)
    assert len(shifted.boundaries) == 13


def test_plan_uses_arc_length():
    # first half of the nodes crowd into the first tenth of the route
    x = np.concatenate([np.linspace(0, 0.1, 9), np.linspace(0.1, 1, 9)[1:]])
    t = Trajectory(np.column_stack([x, np.zeros_like(x)]))
    plan = make_plan(t, 2)
    assert plan.boundaries == (0, 12, 16)


def test_plan_too_short():
    with pytest.raises(SegmentTooShortError):
        make_plan(straight_line((0, 0), (1, 0), 10), 3)
    with pytest.raises(SegmentTooShortError):
        make_plan(straight_line((0, 0), (1, 0), 10), 1)


def test_straight_segment_unchanged(still64):
    line = straight_line((0, 0), (1, 0), 64)
    out, outcome = optimize_segment(still64, line, 10, 30)
    assert outcome.accepted
    assert np.allclose(out.nodes, line.nodes, atol=1e-12)


def test_zigzag_segment_becomes_chord(still64):
    line = straight_line((0, 0), (1, 0), 64)
    bent = zigzag(line, 0.3)
    out, outcome = optimize_segment(still64, bent, 9, 31)
    assert outcome.accepted
    a, b = bent.nodes[9], bent.nodes[31]
    seg = out.nodes[9:32]
    chord = a + np.linspace(0, 1, 23)[:, None] * (b - a)
    assert np.abs(seg - chord).max() < 1e-10
    # nodes outside the segment untouched
    assert np.array_equal(out.nodes[:10], bent.nodes[:10])
    assert np.array_equal(out.nodes[31:], bent.nodes[31:])


def test_segment_time_decreases_in_benchmark(bench256, ref256):
    start = zigzag(ref256.trajectory, 0.8)
    out, outcome = optimize_segment(bench256, start, 93, 117)
    assert outcome.accepted
    assert outcome.time_after < outcome.time_before
    piece = lambda t: travel_time(ProblemSpec(bench256.field, 1.0, 24), Trajectory(t.nodes[93:118]))
    assert piece(out) < piece(start)


def test_smoothing_the_optimum_is_identity(field):
    # segments carry their own speed parameter, so the discrete optimum shifts at quadrature-error level
    shifts = []
    for n in (256, 512):
        spec = ProblemSpec(field, 1.0, n)
        ref = find_reference_optimum(spec)
        smoothed, _ = schwarz_smooth(spec, ref.trajectory, 11, 2)
        assert discrete_w1inf_distance(smoothed, ref.trajectory) < 1e-3
        shifts.append(np.abs(smoothed.nodes - ref.trajectory.nodes).max())
    assert shifts[1] < 1e-6
    assert shifts[1] < shifts[0] / 3


def test_still_air_angular_error_decreases_per_pass():
    spec = ProblemSpec(zero_field(), 1.0, 256)
    line = straight_line((0, 0), (1, 0), 256)
    for s in (0.3, 0.8, 1.2):
        current = zigzag(line, s)
        errors = [angular_error(current, line)]
        for p in range(2):
            rep = schwarz_pass(spec, current, make_plan(current, 11, shifted=bool(p)))
            current = rep.trajectory
            errors.append(angular_error(current, line))
        assert errors[0] > errors[1] > errors[2], errors


@pytest.mark.parametrize("s_hf", [0.4, 1.3, 2.5])
def test_pass_invariants(bench256, ref256, s_hf):
    start = zigzag(ref256.trajectory, s_hf)
    smoothed, reports = schwarz_smooth(bench256, start, 11, 2)
    assert np.array_equal(smoothed.nodes[[0, -1]], start.nodes[[0, -1]])
    for rep in reports:
        assert rep.time_after <= rep.time_before + 1e-9
        for seg in rep.segments:
            assert seg.time_after <= seg.time_before + 1e-12


def test_segment_order_independence(bench256, ref256):
    start = zigzag(ref256.trajectory, 1.0)
    plan = make_plan(start, 11)
    forward = schwarz_pass(bench256, start, plan)
    order = list(np.random.default_rng(5).permutation(len(plan.segments)))
    shuffled = schwarz_pass(bench256, start, plan, order=order)
    backward = schwarz_pass(bench256, start, plan, order=range(len(plan.segments) - 1, -1, -1))
    assert np.array_equal(forward.trajectory.nodes, shuffled.trajectory.nodes)
    assert np.array_equal(forward.trajectory.nodes, backward.trajectory.nodes)


def test_smooth_then_solve_inside_basin(bench256, ref256):
    start = zigzag(ref256.trajectory, 0.3)
    plain = solve_against(bench256, start, ref256)
    smoothed = smooth_then_solve(bench256, start, 11, ref256)
    assert classify(plain, ref256) and smoothed.classified
    assert len(smoothed.passes) == 2
    rec = smoothed.to_record()
    assert rec["classified"] is True and len(rec["passes"]) == 2


def test_large_single_arc_start_may_switch_homotopy_class(bench256, ref256):
    # +0.6 in low-frequency norm pushes the route across the vortex row; not expected to return
    anchor = ref256.trajectory
    start = apply_deviations(anchor, [build_deviation(anchor, 1, 0.6 / (1 + math.pi))])
    result = smooth_then_solve(bench256, start, 11, ref256)
    assert isinstance(result.classified, bool)
    if result.solve.converged and not result.classified:
        assert result.solve.distance_to_reference > 1e-3
