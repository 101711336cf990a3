import math

import numpy as np
import pytest
from scipy.integrate import quad

from layerbem.geometry import (InterfaceCurve, curvature, curve_derivatives,
                               curve_length, curve_point, make_grid)


CIRCLE = InterfaceCurve(radius=4.0)
STAR = InterfaceCurve(radius=4.0, amplitude=0.2, lobes=10)


def test_circle_points_trivial():
    np.testing.assert_allclose(curve_point(CIRCLE, 0.0), (4.0, 0.0), atol=1e-15)
    np.testing.assert_allclose(
        curve_point(CIRCLE, math.pi / 2), (0.0, 4.0), atol=1e-14
    )


def test_kind_property():
    assert CIRCLE.kind == "circle"
    assert STAR.kind == "star"


def test_amplitude_must_be_smaller_than_radius():
    with pytest.raises(ValueError):
        InterfaceCurve(radius=1.0, amplitude=1.5, lobes=4)


def test_zero_amplitude_star_equals_circle():
    degenerate = InterfaceCurve(radius=4.0, amplitude=0.0, lobes=7)
    thetas = np.linspace(0, 2 * math.pi, 33)
    for t in thetas:
        np.testing.assert_allclose(
            curve_point(degenerate, t), curve_point(CIRCLE, t), atol=1e-15
        )


def test_first_derivative_fd_oracle():
    h = 1e-5
    for curve in (CIRCLE, STAR):
        for t in (0.3, 1.7, 4.9):
            d1, _ = curve_derivatives(curve, t)
            fd = (np.asarray(curve_point(curve, t + h))
                  - np.asarray(curve_point(curve, t - h))) / (2 * h)
            np.testing.assert_allclose(d1, fd, atol=1e-7)


def test_second_derivative_fd_oracle():
    h = 1e-4
    for curve in (CIRCLE, STAR):
        for t in (0.2, 2.5):
            _, d2 = curve_derivatives(curve, t)
            fd = (
                np.asarray(curve_point(curve, t + h))
                - 2 * np.asarray(curve_point(curve, t))
                + np.asarray(curve_point(curve, t - h))
            ) / h**2
            np.testing.assert_allclose(d2, fd, atol=1e-6)


def test_circle_curvature():
    for t in (0.0, 1.0, 3.3):
        assert curvature(CIRCLE, t) == pytest.approx(0.25, rel=1e-13)


def test_star_curvature_fd_oracle():
    # kappa = (x' y'' - y' x'') / |x'|^3 with FD second derivative
    h = 1e-4
    t = 0.9
    p = lambda s: np.asarray(curve_point(STAR, s))
    d1 = (p(t + h) - p(t - h)) / (2 * h)
    d2 = (p(t + h) - 2 * p(t) + p(t - h)) / h**2
    oracle = (d1[0] * d2[1] - d1[1] * d2[0]) / np.linalg.norm(d1) ** 3
    assert curvature(STAR, t) == pytest.approx(oracle, abs=1e-4)


def test_circle_length_exact():
    assert curve_length(CIRCLE) == pytest.approx(8 * math.pi, rel=1e-13)


def test_star_length_against_quadrature_oracle():
    def speed(t):
        d1, _ = curve_derivatives(STAR, t)
        return math.hypot(*d1)

    oracle, _ = quad(speed, 0.0, 2 * math.pi, limit=200)
    assert curve_length(STAR) == pytest.approx(oracle, abs=1e-10)


def test_grid_shapes_and_basic_fields():
    grid = make_grid(CIRCLE, 64)
    assert grid.M == 64
    assert grid.points.shape == (64, 2)
    assert grid.thetas[0] == 0.0
    np.testing.assert_allclose(np.diff(grid.thetas), 2 * math.pi / 64)


def test_grid_rejects_odd_and_tiny_m():
    with pytest.raises(ValueError):
        make_grid(CIRCLE, 33)
    with pytest.raises(ValueError):
        make_grid(CIRCLE, 2)


def test_minimum_grid_size_works():
    grid = make_grid(CIRCLE, 4)
    assert grid.points.shape == (4, 2)


def test_unit_tangents_and_normals():
    grid = make_grid(STAR, 128)
    np.testing.assert_allclose(np.linalg.norm(grid.tangents, axis=1), 1.0,
                               atol=1e-14)
    np.testing.assert_allclose(np.linalg.norm(grid.normals, axis=1), 1.0,
                               atol=1e-14)
    # orthogonality
    dots = np.einsum("ij,ij->i", grid.tangents, grid.normals)
    np.testing.assert_allclose(dots, 0.0, atol=1e-14)


def test_normals_point_outward():
    grid = make_grid(STAR, 128)
    radial = grid.points / np.linalg.norm(grid.points, axis=1)[:, None]
    dots = np.einsum("ij,ij->i", grid.normals, radial)
    assert np.all(dots > 0)


def test_circle_jacobian_is_radius():
    grid = make_grid(CIRCLE, 48)
    np.testing.assert_allclose(grid.jacobians, 4.0, atol=1e-13)


def test_refined_grid_contains_coarse_nodes():
    coarse = make_grid(STAR, 32)
    fine = make_grid(STAR, 64)
    np.testing.assert_allclose(fine.points[::2], coarse.points, atol=1e-14)


def test_periodicity_of_curve_point():
    for curve in (CIRCLE, STAR):
        np.testing.assert_allclose(
            curve_point(curve, 0.4),
            curve_point(curve, 0.4 + 2 * math.pi),
            atol=1e-12,
        )
