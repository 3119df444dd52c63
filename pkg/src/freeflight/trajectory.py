"""Piecewise-linear paths on a uniform pseudo-time grid and sinusoidal deviations."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


class DegenerateGeometryError(ValueError):
    """A path interval of zero length where a direction is required."""


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Nodes ``xi(i / N)`` for ``i = 0..N``; the first and last node are the fixed endpoints."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise ValueError(f"nodes must have shape (N+1, 2), got {nodes.shape}")
        if nodes.shape[0] < 3:
            raise ValueError("a trajectory needs N >= 2 intervals")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def N(self) -> int:
        return self.nodes.shape[0] - 1

    @property
    def origin(self) -> np.ndarray:
        return self.nodes[0]

    @property
    def destination(self) -> np.ndarray:
        return self.nodes[-1]

    @property
    def tau(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.N + 1)

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]

    def derivative(self) -> np.ndarray:
        """Per-interval difference quotients ``N * (x[i+1] - x[i])``, shape (N, 2)."""
        return self.N * np.diff(self.nodes, axis=0)

    def length(self) -> float:
        return float(np.linalg.norm(np.diff(self.nodes, axis=0), axis=1).sum())

    def with_interior(self, interior) -> "Trajectory":
        nodes = self.nodes.copy()
        nodes[1:-1] = np.asarray(interior, dtype=float).reshape(-1, 2)
        return Trajectory(nodes)

    def __eq__(self, other):
        return isinstance(other, Trajectory) and np.array_equal(self.nodes, other.nodes)

    __hash__ = None

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["tau", "x", "y"])
            for t, (x, y) in zip(self.tau, self.nodes):
                writer.writerow([repr(float(t)), repr(float(x)), repr(float(y))])

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls(np.array([[float(r["x"]), float(r["y"])] for r in rows]))


def straight_line(x_o, x_d, N: int) -> Trajectory:
    if N < 2:
        raise ValueError("N must be >= 2")
    x_o = np.asarray(x_o, dtype=float)
    x_d = np.asarray(x_d, dtype=float)
    tau = np.linspace(0.0, 1.0, N + 1)[:, None]
    nodes = (1.0 - tau) * x_o + tau * x_d
    nodes[-1] = x_d
    return Trajectory(nodes)


def normal_field(anchor: Trajectory) -> np.ndarray:
    """Unit left normals: central differences inside, one-sided at the endpoints."""
    nodes = anchor.nodes
    if np.any(np.all(np.diff(nodes, axis=0) == 0.0, axis=1)):
        raise DegenerateGeometryError("anchor has a zero-length interval")
    tangent = np.empty_like(nodes)
    tangent[1:-1] = nodes[2:] - nodes[:-2]
    tangent[0] = nodes[1] - nodes[0]
    tangent[-1] = nodes[-1] - nodes[-2]
    norm = np.linalg.norm(tangent, axis=1)
    if np.any(norm == 0.0):
        raise DegenerateGeometryError("anchor folds back onto itself")
    normals = np.column_stack([-tangent[:, 1], tangent[:, 0]]) / norm[:, None]
    return normals


@dataclass(frozen=True, eq=False)
class Deviation:
    """The perturbation ``a * n(tau) * sin(k pi tau)`` sampled on the anchor's grid."""

    k: int
    a: float
    normals: np.ndarray

    def samples(self) -> np.ndarray:
        n = self.normals.shape[0] - 1
        tau = np.arange(n + 1) / n
        s = np.sin(self.k * math.pi * tau)
        s[0] = 0.0
        s[-1] = 0.0
        return self.a * s[:, None] * self.normals

    def norm(self) -> float:
        """W^{1,inf} norm ``|a| (1 + k pi)`` of the continuous deviation."""
        return abs(self.a) * (1.0 + self.k * math.pi)


def build_deviation(anchor: Trajectory, k: int, a: float) -> Deviation:
    if k < 1 or int(k) != k:
        raise ValueError(f"frequency index must be a positive integer, got {k}")
    return Deviation(int(k), float(a), normal_field(anchor))


def apply_deviations(anchor: Trajectory, devs: Sequence[Deviation]) -> Trajectory:
    nodes = anchor.nodes.copy()
    for dev in devs:
        if dev.normals.shape != nodes.shape:
            raise ValueError("deviation was built for a different grid")
        nodes += dev.samples()
    nodes[0] = anchor.nodes[0]
    nodes[-1] = anchor.nodes[-1]
    return Trajectory(nodes)


def sobolev_norm(devs: Sequence[Deviation]) -> tuple[float, list[float]]:
    per_dev = [d.norm() for d in devs]
    return float(sum(per_dev)), per_dev


def discrete_w1inf_distance(p: Trajectory, q: Trajectory) -> float:
    """Max node difference plus max difference of interval difference quotients."""
    if p.N != q.N:
        raise ValueError(f"grid mismatch: N={p.N} vs N={q.N}")
    diff = p.nodes - q.nodes
    sup = np.linalg.norm(diff, axis=1).max()
    sup_tau = np.linalg.norm(p.N * np.diff(diff, axis=0), axis=1).max()
    return float(sup + sup_tau)


def resample(t: Trajectory, n_new: int) -> Trajectory:
    """Linear interpolation in pseudo-time onto ``n_new`` uniform intervals."""
    if n_new < 2:
        raise ValueError("N_new must be >= 2")
    if n_new == t.N:
        return Trajectory(t.nodes)
    tau_new = np.linspace(0.0, 1.0, n_new + 1)
    nodes = np.column_stack([np.interp(tau_new, t.tau, t.nodes[:, j]) for j in range(2)])
    nodes[0] = t.nodes[0]
    nodes[-1] = t.nodes[-1]
    return Trajectory(nodes)


def read_trajectory(path) -> Trajectory:
    return Trajectory.from_csv(Path(path))
