import math

import numpy as np
import pytest

from layerbem.analytic import (LayerConfig, analytic_traces, eval_analytic,
                               solve_mode_coefficients,
                               sound_hard_coefficients,
                               transmission_residuals)
from layerbem.cases import CASES
from layerbem.specfun import bessel_jy, hankel1


def test_config_derived_quantities(case1_config):
    assert case1_config.n_layers == 2
    assert case1_config.n_interfaces == 1
    assert case1_config.betas == pytest.approx([9.0])
    assert case1_config.is_circular


def test_layer_of_radius(case1_config):
    assert case1_config.layer_of_radius(5.0) == 0
    assert case1_config.layer_of_radius(1.0) == 1


def test_sound_hard_coefficients_closed_form(case1_config):
    # Single boundary: A_m = -J_m'(kR) / H_m'(kR), Neumann data cancels.
    coeffs = sound_hard_coefficients(case1_config)
    k, r0 = 2.0, 4.0
    for m in (0, 1, 5):
        c = bessel_jy(m, k * r0)
        _, dh = hankel1(m, k * r0)
        expected = -c.jprime_value / dh
        assert coeffs.scattered[m] == pytest.approx(expected, rel=1e-12)


def test_sound_hard_neumann_residual(case1_config):
    coeffs = sound_hard_coefficients(case1_config)
    thetas = np.linspace(0, 2 * math.pi, 17, endpoint=False)
    _, du = analytic_traces(coeffs, case1_config, 0, thetas)
    assert np.max(np.abs(du)) < 1e-12


def test_sound_hard_interior_is_zero(case1_config):
    coeffs = sound_hard_coefficients(case1_config)
    assert eval_analytic(coeffs, case1_config, 1.0, 0.7, layer=1) == 0.0


def test_transparent_medium_reproduces_plane_wave(transparent_config,
                                                  transparent_coeffs):
    # beta = 1: the scatterer is invisible, the field is the incident wave.
    for r, theta in [(1.0, 0.3), (4.5, 2.0), (7.0, 5.1)]:
        u = eval_analytic(transparent_coeffs, transparent_config, r, theta)
        plane = np.exp(1j * 2.0 * r * math.sin(theta))
        assert abs(u - plane) < 1e-12


def test_truncation_refinement_oracle(case1_config, case1_coeffs):
    # Adding 20 more modes must not move interface traces appreciably.
    finer = solve_mode_coefficients(case1_config,
                                    m_max=case1_coeffs.m_max + 20)
    thetas = np.linspace(0, 2 * math.pi, 64, endpoint=False)
    u_a, du_a = analytic_traces(case1_coeffs, case1_config, 0, thetas)
    u_b, du_b = analytic_traces(finer, case1_config, 0, thetas)
    assert np.max(np.abs(u_a - u_b)) < 1e-12
    assert np.max(np.abs(du_a - du_b)) < 1e-12


def test_tail_ratio_small_after_truncation(case1_config, case1_coeffs):
    assert case1_coeffs.tail_ratio(case1_config) < 1e-14


@pytest.mark.parametrize("name", sorted(CASES))
def test_transmission_residuals_all_cases(name):
    config = CASES[name].config()
    if CASES[name].sound_hard:
        coeffs = sound_hard_coefficients(config)
    else:
        coeffs = solve_mode_coefficients(config)
    residuals = transmission_residuals(coeffs, config)
    assert max(residuals) < 1e-10


def test_field_satisfies_helmholtz_fd(case1_config, case1_coeffs):
    # Five-point Laplacian check in Cartesian coordinates, interior layer.
    k, h = 6.0, 1e-3
    x0 = np.array([1.2, 0.9])

    def u(x):
        r = math.hypot(*x)
        return eval_analytic(case1_coeffs, case1_config, r,
                             math.atan2(x[1], x[0]), layer=1)

    lap = (
        u(x0 + [h, 0]) + u(x0 - [h, 0]) + u(x0 + [0, h]) + u(x0 - [0, h])
        - 4 * u(x0)
    ) / h**2
    assert abs(lap + k * k * u(x0)) < 1e-4 * abs(u(x0))


def test_exterior_field_satisfies_helmholtz_fd(case1_config, case1_coeffs):
    k, h = 2.0, 1e-3
    x0 = np.array([5.0, 1.0])

    def u(x):
        r = math.hypot(*x)
        return eval_analytic(case1_coeffs, case1_config, r,
                             math.atan2(x[1], x[0]), layer=0)

    lap = (
        u(x0 + [h, 0]) + u(x0 - [h, 0]) + u(x0 + [0, h]) + u(x0 - [0, h])
        - 4 * u(x0)
    ) / h**2
    assert abs(lap + k * k * u(x0)) < 1e-4 * abs(u(x0))


def test_three_layer_trace_continuity():
    config = CASES["case5a"].config()
    coeffs = solve_mode_coefficients(config)
    thetas = np.linspace(0, 2 * math.pi, 48, endpoint=False)
    for interface, beta in zip(range(2), config.betas):
        u, du = analytic_traces(coeffs, config, interface, thetas)
        r = config.radii[interface]
        inner = config.layer_of_radius(r - 1e-9)
        u_in = np.array([
            eval_analytic(coeffs, config, r, t, layer=inner) for t in thetas
        ])
        assert np.max(np.abs(u - u_in)) < 1e-10


def test_config_validation():
    with pytest.raises(ValueError):
        LayerConfig(wavenumbers=(2.0,), radii=(4.0,))
    with pytest.raises(ValueError):
        LayerConfig(wavenumbers=(2.0, 6.0, 1.0), radii=(2.0, 4.0))
