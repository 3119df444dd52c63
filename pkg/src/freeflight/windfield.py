"""Analytic vortex wind fields.

Each vortex induces a purely tangential velocity with speed profile
``s(r) = strength * KAPPA * u * (1 - u**2)**4`` where ``u = r / radius``.
The profile peaks at ``u = 1/3`` with value ``strength`` and is C^3 at the
center and at the support boundary.

Writing ``d = x - center`` and ``q = |d|^2`` the velocity is
``w(x) = g(q) * J d`` with ``J`` the +90 degree rotation and
``g(q) = strength * KAPPA / radius * (1 - q / radius**2)**4``, which makes all
derivatives cheap polynomials.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

KAPPA = 19683.0 / 4096.0  # 1 / max_u u(1-u^2)^4, attained at u = 1/3

_ROT = np.array([[0.0, -1.0], [1.0, 0.0]])


class WindFieldError(ValueError):
    pass


@dataclass(frozen=True)
class Vortex:
    center: tuple[float, float]
    radius: float
    strength: float

    def __post_init__(self):
        if not self.radius > 0:
            raise WindFieldError(f"vortex radius must be positive, got {self.radius}")


class WindField:
    """Superposition of vortices with pairwise disjoint supports.

    All evaluation methods accept a single point of shape ``(2,)`` or a batch
    of shape ``(..., 2)`` and broadcast accordingly.
    """

    def __init__(self, vortices: Sequence[Vortex] = ()):
        self.vortices = tuple(vortices)
        for i, vi in enumerate(self.vortices):
            for vj in self.vortices[i + 1:]:
                gap = np.hypot(vi.center[0] - vj.center[0], vi.center[1] - vj.center[1])
                if gap < vi.radius + vj.radius:
                    raise WindFieldError(f"vortex supports overlap: {vi} and {vj}")
        n = len(self.vortices)
        self._centers = np.array([v.center for v in self.vortices], dtype=float).reshape(n, 2)
        self._radii = np.array([v.radius for v in self.vortices], dtype=float)
        self._amp = np.array([v.strength * KAPPA / v.radius for v in self.vortices], dtype=float)

    def __len__(self):
        return len(self.vortices)

    def __repr__(self):
        return f"WindField({len(self.vortices)} vortices)"

    @property
    def max_strength(self) -> float:
        return max((abs(v.strength) for v in self.vortices), default=0.0)

    def mirrored(self) -> "WindField":
        """Image of the field under the reflection y -> -y."""
        return WindField([Vortex((v.center[0], -v.center[1]), v.radius, -v.strength)
                          for v in self.vortices])

    def _profile(self, x):
        """Per-vortex offsets and profile values g, g', g'' (shapes (..., n, 2) and (..., n))."""
        x = np.asarray(x, dtype=float)
        d = x[..., None, :] - self._centers
        q = np.einsum("...i,...i->...", d, d)
        r2 = self._radii ** 2
        s = 1.0 - q / r2
        inside = s > 0.0
        s = np.where(inside, s, 0.0)
        g = self._amp * s ** 4
        g1 = -4.0 * self._amp * s ** 3 / r2
        g2 = 12.0 * self._amp * s ** 2 / r2 ** 2
        return d, g, g1, g2

    def velocity(self, x) -> np.ndarray:
        d, g, _, _ = self._profile(x)
        jd = d @ _ROT.T
        return np.einsum("...n,...ni->...i", g, jd)

    def jacobian(self, x) -> np.ndarray:
        """``out[..., i, j] = dw_i / dx_j``."""
        d, g, g1, _ = self._profile(x)
        jd = d @ _ROT.T
        out = 2.0 * np.einsum("...n,...ni,...nj->...ij", g1, jd, d)
        out += np.einsum("...n,ij->...ij", g, _ROT)
        return out

    def second_derivatives(self, x) -> np.ndarray:
        """``out[..., i, j, k] = d^2 w_i / dx_j dx_k``."""
        d, g, g1, g2 = self._profile(x)
        jd = d @ _ROT.T
        eye = np.eye(2)
        out = 2.0 * np.einsum("...n,ij,...nk->...ijk", g1, _ROT, d)
        out += 2.0 * np.einsum("...n,ik,...nj->...ijk", g1, _ROT, d)
        out += 4.0 * np.einsum("...n,...ni,...nj,...nk->...ijk", g2, jd, d, d)
        out += 2.0 * np.einsum("...n,...ni,jk->...ijk", g1, jd, eye)
        return out


def eval_wind(field: WindField, x) -> np.ndarray:
    return field.velocity(x)


def wind_jacobian(field: WindField, x) -> np.ndarray:
    return field.jacobian(x)


def wind_second_derivatives(field: WindField, x) -> np.ndarray:
    return field.second_derivatives(x)


def benchmark_field(airspeed: float = 1.0) -> WindField:
    """15 vortices on a 5 x 3 grid over [0, 1] x [-0.3, 0.3], checkerboard rotation.

    Peak wind speed is half the airspeed.
    """
    peak = 0.5 * airspeed
    vortices = []
    for row, y in enumerate((-0.2, 0.0, 0.2)):
        for col in range(5):
            sign = 1.0 if (row + col) % 2 == 0 else -1.0
            vortices.append(Vortex((0.1 + 0.2 * col, y), 0.095, sign * peak))
    return WindField(vortices)


def zero_field() -> WindField:
    return WindField(())
