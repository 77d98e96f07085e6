import numpy as np
import pytest

from biflow.fields import Grid
from biflow.kernel import default_profile
from biflow.manifold import SphereTarget


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(20240501))


@pytest.fixture(scope="session")
def profile1():
    return default_profile(1)


@pytest.fixture(scope="session")
def profile2():
    return default_profile(2)


@pytest.fixture(scope="session")
def grid64():
    return Grid(1, 2.0 * np.pi, 64)


@pytest.fixture(scope="session")
def grid128():
    return Grid(1, 2.0 * np.pi, 128)


@pytest.fixture(scope="session")
def sphere3():
    return SphereTarget(3)
