"""Parameterized smooth closed interfaces: circles and star shapes.

A star curve has radius rho(theta) = R + a cos(n theta); a = 0 (or n = 0)
degenerates to the circle of radius R. All derivative quantities are
closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class InterfaceCurve:
    """Closed curve rho(theta) = radius + amplitude * cos(lobes * theta)."""

    radius: float
    amplitude: float = 0.0
    lobes: int = 0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be nonnegative, got {self.amplitude}")
        if self.amplitude >= self.radius:
            raise ValueError(
                f"amplitude {self.amplitude} must stay below radius {self.radius} "
                "for a simple closed curve"
            )
        if self.lobes < 0:
            raise ValueError(f"lobes must be nonnegative, got {self.lobes}")

    @property
    def kind(self) -> str:
        return "star" if (self.amplitude > 0 and self.lobes > 0) else "circle"

    def rho(self, theta):
        """Radial profile rho(theta)."""
        theta = np.asarray(theta, dtype=float)
        if self.kind == "circle":
            return np.broadcast_to(float(self.radius), theta.shape).copy()
        return self.radius + self.amplitude * np.cos(self.lobes * theta)


def curve_point(curve: InterfaceCurve, theta):
    """Point(s) x(theta) on the curve, shape (..., 2)."""
    theta = np.asarray(theta, dtype=float)
    rho = curve.rho(theta)
    return np.stack([rho * np.cos(theta), rho * np.sin(theta)], axis=-1)


def curve_derivatives(curve: InterfaceCurve, theta):
    """Analytic first and second derivatives (x', x'') of x(theta)."""
    theta = np.asarray(theta, dtype=float)
    ct, st = np.cos(theta), np.sin(theta)
    rho = curve.rho(theta)
    if curve.kind == "circle":
        drho = np.zeros_like(rho)
        ddrho = np.zeros_like(rho)
    else:
        n = curve.lobes
        drho = -curve.amplitude * n * np.sin(n * theta)
        ddrho = -curve.amplitude * n * n * np.cos(n * theta)
    d1 = np.stack([drho * ct - rho * st, drho * st + rho * ct], axis=-1)
    d2 = np.stack(
        [ddrho * ct - 2 * drho * st - rho * ct, ddrho * st + 2 * drho * ct - rho * st],
        axis=-1,
    )
    return d1, d2


def curvature(curve: InterfaceCurve, theta):
    """Signed curvature (positive for a counterclockwise circle: 1/R)."""
    d1, d2 = curve_derivatives(curve, theta)
    speed = np.linalg.norm(d1, axis=-1)
    return (d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]) / speed**3


def curve_length(curve: InterfaceCurve, M: int = 512) -> float:
    """Arclength by the periodic trapezoid rule (spectrally accurate)."""
    theta = 2 * np.pi * np.arange(M) / M
    d1, _ = curve_derivatives(curve, theta)
    return float(2 * np.pi / M * np.linalg.norm(d1, axis=-1).sum())


@dataclass(frozen=True)
class BoundaryGrid:
    """Equispaced parameter grid on one interface with geometric data."""

    curve: InterfaceCurve
    M: int
    thetas: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)
    tangents: np.ndarray = field(repr=False)
    normals: np.ndarray = field(repr=False)
    jacobians: np.ndarray = field(repr=False)
    curvatures: np.ndarray = field(repr=False)


def make_grid(curve: InterfaceCurve, M: int) -> BoundaryGrid:
    """Build the equispaced grid theta_m = 2 pi m / M. M must be even."""
    if M % 2 != 0:
        raise ValueError(f"M must be even for the Kress rule, got {M}")
    if M < 4:
        raise ValueError(f"M must be at least 4, got {M}")
    thetas = 2 * np.pi * np.arange(M) / M
    points = curve_point(curve, thetas)
    d1, _ = curve_derivatives(curve, thetas)
    jac = np.linalg.norm(d1, axis=-1)
    tangents = d1 / jac[:, None]
    # outward normal for counterclockwise parameterization
    normals = np.stack([tangents[:, 1], -tangents[:, 0]], axis=-1)
    kappa = curvature(curve, thetas)
    return BoundaryGrid(curve, M, thetas, points, tangents, normals, jac, kappa)
