import math

import numpy as np
import pytest

from ewvac.lattice import LatticeShape, make_grid
from ewvac.lll import build_chi
from ewvac.params import from_masses

TAU_HEX = complex(math.cos(math.pi / 3), math.sin(math.pi / 3))


@pytest.fixture(scope="session")
def params():
    return from_masses(80.379, 91.1876, 125.09, 1)


@pytest.fixture(scope="session")
def hex_shape():
    return LatticeShape(tau=TAU_HEX)


@pytest.fixture(scope="session")
def square_shape():
    return LatticeShape(tau=1j)


@pytest.fixture(scope="session")
def hex_grid32(hex_shape):
    return make_grid(hex_shape, 32)


@pytest.fixture(scope="session")
def hex_grid64(hex_shape):
    return make_grid(hex_shape, 64)


@pytest.fixture(scope="session")
def chi_hex64(hex_shape, hex_grid64):
    return build_chi(hex_shape, 1, grid=hex_grid64)


@pytest.fixture(scope="session")
def chi_square64(square_shape):
    return build_chi(square_shape, 1, N=64)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
