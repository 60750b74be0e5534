import pytest
from scipy.optimize import brentq

from crfloquet import bundled_model, dressed_diagonalize
from crfloquet.atom_model import GridSpec, build_softcore_model
from crfloquet.scan import effective_point


@pytest.fixture(scope="session")
def ladder5():
    return bundled_model("ladder5")


@pytest.fixture(scope="session")
def two_level():
    return bundled_model("two_level")


@pytest.fixture(scope="session")
def softcore_small():
    """Modest soft-core model shared across tests (1024-point grid)."""
    return build_softcore_model(GridSpec(200.0, 1024, 2.0, 150.0, 0.005), n_keep=14)


def find_resonance(atom, intensity_wcm2, bracket=(0.40, 0.45)):
    """Drive frequency balancing the real diagonal of the order-1 reduction."""

    def imbalance(omega):
        m = effective_point(atom, omega, intensity_wcm2=intensity_wcm2).heff1.matrix
        return (m[0, 0] - m[1, 1]).real

    return brentq(imbalance, *bracket, xtol=1e-12)


@pytest.fixture(scope="session")
def resonant_point(ladder5):
    """The ladder5 fixture solved at its dressed resonance for 1e14 W/cm^2."""
    omega = find_resonance(ladder5, 1e14)
    pt = effective_point(ladder5, omega, intensity_wcm2=1e14)
    return pt


@pytest.fixture(scope="session")
def resonant_dressed(resonant_point):
    return dressed_diagonalize(resonant_point.heff1)
