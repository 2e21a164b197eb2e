import numpy as np
import pytest

from modules import catalog
from modules.lie_core import InnerProduct
from modules.norms import MinkowskiNorm, make_family


@pytest.fixture(scope='session')
def quartic():
    return make_family('quartic-mean', [1.0])


@pytest.fixture(scope='session')
def euclid():
    return catalog.euclidean_diag_so2()


@pytest.fixture(scope='session')
def abelian():
    return catalog.abelian_space(2, 2)


@pytest.fixture(scope='session')
def s3xs3():
    return catalog.s3_product()


@pytest.fixture(scope='session')
def s3xs3_riemannian():
    return catalog.s3_product(make_family('riemannian'))


@pytest.fixture(scope='session')
def s2xs2():
    return catalog.s2_product()


@pytest.fixture(scope='session')
def s2xs2_riemannian():
    return catalog.s2_product(make_family('riemannian'))


@pytest.fixture(scope='session')
def su2_neg():
    return catalog.su2_negative()


@pytest.fixture(scope='session')
def su2_aniso():
    return catalog.su2_anisotropic()


@pytest.fixture(scope='session')
def nr_spaces(euclid, abelian, s3xs3, s2xs2):
    return [euclid, abelian, s3xs3, s2xs2]


@pytest.fixture(scope='session')
def all_spaces(euclid, abelian, s3xs3, s2xs2, su2_neg, su2_aniso):
    return [euclid, abelian, s3xs3, s2xs2, su2_neg, su2_aniso]


@pytest.fixture
def quartic_norm(quartic):
    """Quartic-mean norm on R^2 + R^1 with the identity gram."""
    return MinkowskiNorm(quartic, (2, 1), InnerProduct(np.eye(3)))


@pytest.fixture
def small_settings():
    return {'samples': 48, 'seed': 7}
