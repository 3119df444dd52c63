import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freeflight.trajectory import (
    DegenerateGeometryError,
    Trajectory,
    apply_deviations,
    build_deviation,
    discrete_w1inf_distance,
    resample,
    sobolev_norm,
    straight_line,
)


def test_straight_line_nodes():
    t = straight_line((0, 0), (1, 0), 4)
    assert np.array_equal(t.nodes, [[0, 0], [0.25, 0], [0.5, 0], [0.75, 0], [1, 0]])
    assert np.array_equal(straight_line((0, 0), (0, 2), 2).nodes[1], [0, 1])
    same = straight_line((0.3, 0.3), (0.3, 0.3), 5)
    assert np.all(same.nodes == 0.3)
    with pytest.raises(ValueError):
        straight_line((0, 0), (1, 0), 1)


def test_endpoints_exact():
    t = straight_line((0.1, 0.7), (0.93, -0.11), 37)
    assert tuple(t.nodes[0]) == (0.1, 0.7)
    assert tuple(t.nodes[-1]) == (0.93, -0.11)


def test_zero_amplitude_deviation():
    t = straight_line((0, 0), (1, 0), 16)
    dev = build_deviation(t, 3, 0.0)
    assert np.array_equal(dev.samples(), np.zeros((17, 2)))


def test_unit_normal_at_midpoint():
    t = straight_line((0, 0), (1, 0), 8)
    s = build_deviation(t, 1, 1.0).samples()
    assert np.allclose(s[4], [0.0, 1.0], atol=1e-15)


def test_high_frequency_zeros():
    t = straight_line((0, 0), (1, 0), 240)
    s = build_deviation(t, 30, 0.7).samples()
    idx = np.arange(0, 241, 8)  # tau = i/30
    assert np.abs(s[idx]).max() < 1e-12


def test_normals_unit_and_orthogonal():
    tau = np.linspace(0, 1, 65)
    t = Trajectory(np.column_stack([tau, 0.2 * np.sin(np.pi * tau)]))
    dev = build_deviation(t, 2, 0.1)
    assert np.allclose(np.linalg.norm(dev.normals, axis=1), 1.0, atol=1e-12)
    central = t.nodes[2:] - t.nodes[:-2]
    assert np.abs(np.einsum("ij,ij->i", dev.normals[1:-1], central)).max() < 1e-9


def test_degenerate_anchor():
    nodes = np.array([[0, 0], [0.5, 0], [0.5, 0], [1, 0]], dtype=float)
    with pytest.raises(DegenerateGeometryError):
        build_deviation(Trajectory(nodes), 1, 0.1)


def test_apply_deviations_order_and_endpoints():
    t = straight_line((0, 0), (1, 0.5), 50)
    d1 = build_deviation(t, 1, 0.2)
    d2 = build_deviation(t, 30, -0.01)
    assert apply_deviations(t, []) == t
    a = apply_deviations(t, [d1, d2])
    b = apply_deviations(t, [d2, d1])
    assert np.allclose(a.nodes, b.nodes, rtol=0, atol=1e-15)
    assert np.array_equal(a.nodes[[0, -1]], t.nodes[[0, -1]])


def test_sobolev_norm_values():
    t = straight_line((0, 0), (1, 0), 8)
    total, per = sobolev_norm([build_deviation(t, 1, 1.0)])
    assert total == pytest.approx(1 + math.pi)
    assert per[0] == pytest.approx(4.1416, abs=1e-4)
    assert sobolev_norm([build_deviation(t, 30, 1.0)])[0] == pytest.approx(95.248, abs=1e-3)
    assert sobolev_norm([build_deviation(t, 30, 0.0)])[0] == 0.0
    total, per = sobolev_norm([build_deviation(t, 30, -0.5), build_deviation(t, 1, 0.25)])
    assert total == pytest.approx(0.5 * (1 + 30 * math.pi) + 0.25 * (1 + math.pi))


@given(st.floats(-3, 3), st.floats(0.01, 10), st.integers(1, 40))
def test_sobolev_norm_homogeneous(a, c, k):
    t = straight_line((0, 0), (1, 0), 8)
    base = sobolev_norm([build_deviation(t, k, a)])[0]
    scaled = sobolev_norm([build_deviation(t, k, c * a)])[0]
    assert scaled == pytest.approx(c * base, rel=1e-12, abs=1e-15)


@given(st.integers(1, 30), st.floats(-1, 1).filter(lambda a: a == 0 or abs(a) > 1e-100))
def test_discrete_sup_bounded_by_amplitude(k, a):
    t = straight_line((0, 0), (1, 0), 120)
    s = build_deviation(t, k, a).samples()
    sup = np.linalg.norm(s, axis=1).max()
    assert sup <= abs(a) * (1 + 1e-12)
    n = 120
    if any((2 * k * i) % n == 0 and (2 * k * i // n) % 2 == 1 for i in range(n + 1)):
        # some node sits on an odd multiple of 1/(2k): a sine extremum is sampled
        assert sup == pytest.approx(abs(a), rel=1e-12)


def test_distance_basics():
    t = straight_line((0, 0), (1, 0), 10)
    assert discrete_w1inf_distance(t, t) == 0.0
    nodes = t.nodes.copy()
    nodes[1:-1, 1] += 0.3
    assert discrete_w1inf_distance(t, Trajectory(nodes)) >= 0.3
    with pytest.raises(ValueError):
        discrete_w1inf_distance(t, straight_line((0, 0), (1, 0), 11))


@pytest.mark.parametrize("k,a", [(1, 0.05), (1, -0.2), (30, 0.01), (30, 0.002), (7, 0.03)])
def test_distance_converges_to_analytic_norm(k, a):
    # oracle: analytic |a|(1 + k pi); discrete value approaches it as N grows
    errs = []
    for n in (256, 1024, 4096):
        t = straight_line((0, 0), (1, 0), n)
        d = build_deviation(t, k, a)
        errs.append(abs(discrete_w1inf_distance(t, apply_deviations(t, [d])) / d.norm() - 1))
    assert errs[-1] <= 0.02
    assert errs[-1] <= errs[0] + 1e-12


# coordinates far below sqrt(tiny) would square to zero inside the norm
coord = st.floats(-1, 1).map(lambda v: v if abs(v) > 1e-100 else 0.0)
trajectories = st.lists(st.tuples(coord, coord), min_size=7, max_size=7).map(
    lambda pts: Trajectory(np.vstack([[0, 0], np.array(pts), [1, 0]])))


@settings(max_examples=60)
@given(trajectories, trajectories, trajectories)
def test_distance_is_a_metric(p, q, r):
    dpq = discrete_w1inf_distance(p, q)
    assert dpq == discrete_w1inf_distance(q, p)
    assert dpq >= 0
    assert (dpq == 0) == (p == q)
    assert discrete_w1inf_distance(p, r) <= dpq + discrete_w1inf_distance(q, r) + 1e-12


def test_resample():
    line = straight_line((0, 0), (2, 1), 10)
    fine = resample(line, 37)
    assert np.allclose(fine.nodes, straight_line((0, 0), (2, 1), 37).nodes, atol=1e-15)
    assert resample(line, 10) == line
    assert np.array_equal(fine.nodes[[0, -1]], line.nodes[[0, -1]])


def test_resample_roundtrip_error_shrinks():
    # smooth test path; error of coarse -> fine -> coarse is the interpolation error
    errors = []
    for n in (32, 64, 128, 256):
        tau = np.linspace(0, 1, n + 1)
        t = Trajectory(np.column_stack([tau, 0.3 * np.sin(3 * np.pi * tau)]))
        back = resample(resample(t, int(n * 1.37)), n)
        errors.append(np.abs(t.nodes - back.nodes).max())
    assert all(b < a for a, b in zip(errors, errors[1:]))
    # at least first order: error * N does not grow
    assert errors[-1] * 256 <= errors[0] * 32


def test_csv_roundtrip(tmp_path):
    tau = np.linspace(0, 1, 21)
    t = Trajectory(np.column_stack([tau, np.sin(7 * tau) / 3]))
    t.to_csv(tmp_path / "t.csv")
    assert Trajectory.from_csv(tmp_path / "t.csv") == t
    header = (tmp_path / "t.csv").read_text().splitlines()[0]
    assert header == "tau,x,y"
