from pathlib import Path

import numpy as np
import pytest

from scalecheck.core.constraints import Equal
from scalecheck.core.estimator import SampleMoments
from scalecheck.core.model_spec import Loading, parse_model_spec

SAMPLE_DATA = Path(__file__).parent / "sample_data"

TWO_FACTOR_MODEL = "A =~ X1 + X2\nB =~ X3 + X4\n"

LONGITUDINAL_MODEL = """
A1 =~ X11 + X21 + X31 + X41
A2 =~ X12 + X22 + X32 + X42
X11 ~~ X12
X21 ~~ X22
X31 ~~ X32
X41 ~~ X42
"""


def _symmetric(lower: list) -> np.ndarray:
    p = len(lower)
    matrix = np.zeros((p, p))
    for i, row in enumerate(lower):
        matrix[i, : i + 1] = row
    return matrix + np.tril(matrix, -1).T


@pytest.fixture
def sample_data_dir():
    return SAMPLE_DATA


@pytest.fixture
def two_factor_spec():
    return parse_model_spec(TWO_FACTOR_MODEL, sample_size=200)


@pytest.fixture
def two_factor_cov():
    return _symmetric(
        [
            [25.00],
            [7.20, 9.00],
            [3.20, 2.00, 4.00],
            [2.00, 1.25, 1.20, 4.00],
        ]
    )


@pytest.fixture
def two_factor_moments(two_factor_cov):
    return SampleMoments.from_matrix(two_factor_cov, 200)


@pytest.fixture
def two_factor_tested():
    return Equal(Loading("A", "X2"), Loading("B", "X4"))


@pytest.fixture
def longitudinal_spec():
    return parse_model_spec(LONGITUDINAL_MODEL, sample_size=150)


@pytest.fixture
def longitudinal_cov():
    return _symmetric(
        [
            [3.640],
            [3.200, 17.000],
            [2.560, 12.800, 14.240],
            [1.600, 8.000, 6.400, 6.000],
            [1.160, 4.800, 3.840, 2.400, 27.000],
            [0.960, 5.300, 3.840, 2.400, 25.000, 32.000],
            [0.768, 3.840, 3.322, 1.920, 20.000, 20.000, 17.000],
            [0.384, 1.920, 1.536, 1.460, 10.000, 10.000, 8.000, 12.000],
        ]
    )


@pytest.fixture
def longitudinal_moments(longitudinal_cov):
    return SampleMoments.from_matrix(longitudinal_cov, 150)


@pytest.fixture
def longitudinal_tested():
    return Equal(Loading("A1", "X21"), Loading("A2", "X22"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)
