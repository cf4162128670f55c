import numpy as np
import pytest

from confmap import (
    MapOptions,
    annulus,
    circular_polygon,
    conformal_map,
    disjoint_pair,
    polygon,
    smooth,
)
from confmap.geometry import smooth_spec

PENTAGON = np.exp(2j * np.pi * np.arange(5) / 5)
# side 2 with the unit square notch; the reentrant corner sits at 0.5 + 0.5i
LSHAPE = [z - (0.5 + 0.5j) for z in (0, 2, 2 + 1j, 1 + 1j, 1 + 2j, 2j)]
REENTRANT = 0.5 + 0.5j
SQUARE = [1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]
CIRCULAR_SIDES = [(1, -2), (1j, -2), (-1, -2), (-1j, -2)]

# acceptance criterion number -> one-line outcome, filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])


def lobe(a):
    return lambda t: np.exp(2j * np.pi * t) * (1 + a * np.cos(10 * np.pi * t))


def circle_spec(c, r, n=64):
    return smooth_spec(lambda t: c + r * np.exp(2j * np.pi * t), n)


@pytest.fixture(scope="session")
def pentagon_region():
    return polygon(PENTAGON)


@pytest.fixture(scope="session")
def pentagon_map(pentagon_region):
    return conformal_map(pentagon_region, MapOptions(tol=1e-6))


@pytest.fixture(scope="session")
def lshape_region():
    return polygon(LSHAPE)


@pytest.fixture(scope="session")
def lshape_map(lshape_region):
    return conformal_map(lshape_region, MapOptions(tol=1e-6))


@pytest.fixture(scope="session")
def lobe_region():
    return smooth(lobe(0.15))


@pytest.fixture(scope="session")
def lobe_map(lobe_region):
    return conformal_map(lobe_region, MapOptions(tol=1e-5, method="polynomial"))


@pytest.fixture(scope="session")
def circular_region():
    return circular_polygon(CIRCULAR_SIDES)


@pytest.fixture(scope="session")
def eccentric_region():
    return annulus(circle_spec(0, 1), circle_spec(0.3, 0.3))


@pytest.fixture(scope="session")
def disjoint_region():
    return disjoint_pair(circle_spec(-2, 1), circle_spec(2, 1))


@pytest.fixture(scope="session")
def disjoint_map(disjoint_region):
    return conformal_map(disjoint_region, MapOptions(tol=1e-6))
