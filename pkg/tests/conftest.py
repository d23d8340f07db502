"""conftest.py

Shared Fixtures for the Percolation Tests

"""
import pytest

from hexperc.explore.interfaces import annulus_layers
from hexperc.lattice.geometry import Annulus, Box, box_quad
from hexperc.sampling.configuration import CLOSED, OPEN, constant_configuration


@pytest.fixture
def annulus():
    return Annulus((0.0, 0.0), 1.5, 5.0)


@pytest.fixture
def quad():
    return box_quad(Box((0.0, 0.0), 4.0), 1.0)


@pytest.fixture
def all_open(annulus):
    return constant_configuration(annulus_layers(annulus, 1.0).full, OPEN)


@pytest.fixture
def all_closed(annulus):
    return constant_configuration(annulus_layers(annulus, 1.0).full, CLOSED)
