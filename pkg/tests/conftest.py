import pytest

from paramodular.exactmat import Mat
from paramodular.quadlat import ParamodularChain, e8_lattice, pmodular_coords


@pytest.fixture(scope="session")
def e8():
    return e8_lattice()


@pytest.fixture(scope="session")
def e8_chain(e8):
    K = pmodular_coords(e8, 2)[0]
    return ParamodularChain(e8, (Mat.identity(8), K), (1, 2))
