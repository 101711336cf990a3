import numpy as np
import pytest

from layerbem.analytic import (LayerConfig, solve_mode_coefficients,
                               sound_hard_coefficients)
from layerbem.solver import solve_config


@pytest.fixture(scope="session")
def case1_config():
    return LayerConfig((2.0, 6.0), (4.0,))


@pytest.fixture(scope="session")
def case1_coeffs(case1_config):
    return solve_mode_coefficients(case1_config)


@pytest.fixture(scope="session")
def case1_sh_coeffs(case1_config):
    return sound_hard_coefficients(case1_config)


@pytest.fixture(scope="session")
def case2_config():
    return LayerConfig((6.0, 2.0), (4.0,))


@pytest.fixture(scope="session")
def case2_coeffs(case2_config):
    return solve_mode_coefficients(case2_config)


@pytest.fixture(scope="session")
def case1_traces_144(case1_config):
    return solve_config(case1_config, [144])


@pytest.fixture(scope="session")
def transparent_config():
    return LayerConfig((2.0, 2.0), (4.0,))


@pytest.fixture(scope="session")
def transparent_coeffs(transparent_config):
    return solve_mode_coefficients(transparent_config, m_max=30)
