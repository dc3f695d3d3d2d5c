import numpy as np
import pytest

from fraclab.littlewood_paley import build_dyadic_profile


@pytest.fixture(scope="session")
def profile():
    return build_dyadic_profile()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
