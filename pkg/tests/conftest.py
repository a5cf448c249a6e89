import numpy as np
import pytest

from dnlslab.grids import DiscretePair, FieldGrid, ScatteringData
from dnlslab.solitons import q_sol


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260810)


@pytest.fixture(scope="session")
def smooth_data():
    """Synthetic admissible scattering data with smooth reflection."""
    grid = np.linspace(-6.0, 6.0, 1601)
    rho = 0.55 * np.exp(-((grid - 0.4) ** 2) / 1.5) * np.exp(0.3j * grid)
    return ScatteringData(1, -6.0, 6.0, rho)


@pytest.fixture(scope="session")
def unit_soliton_field():
    """Closed-form (lambda, C) = (i, 2i) soliton sampled at t = 0."""
    from dnlslab.solitons import one_soliton_closed_form

    x = np.linspace(-30.0, 30.0, 6001)
    vals = one_soliton_closed_form(1j, 2j, x, 0.0, 1)
    return FieldGrid(1, float(x[0]), float(x[1] - x[0]), vals)


@pytest.fixture(scope="session")
def gaussian_field():
    x = np.linspace(-30.0, 30.0, 6001)
    vals = 0.35 * np.exp(-x * x / 4.0) * np.exp(0.2j * x)
    return FieldGrid(1, float(x[0]), float(x[1] - x[0]), vals)


@pytest.fixture(scope="session")
def two_soliton_pairs():
    from dnlslab.verify import c_for_centre

    return (
        DiscretePair(1 + 1j, c_for_centre(1 + 1j, -4.0, 0.7)),
        DiscretePair(-1 + 1j, c_for_centre(-1 + 1j, 4.0, -1.1)),
    )
