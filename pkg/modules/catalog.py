"""
Fixture spaces with exact integer structure constants.

Factors for f-products are HomogeneousSpace objects with dim m2 = 0 and the
Riemannian family; their gram is the Riemannian metric of the factor.
"""

import logging
from typing import Callable, Dict, Optional

import numpy as np

from modules.errors import ConfigError, NotNaturallyReductiveError
from modules.homogeneous import HomogeneousSpace
from modules.lie_core import LieData, riemannian_nr_residual
from modules.norms import NormFamily, make_family

logger = logging.getLogger(__name__)

DEFAULT_FAMILY = ('quartic-mean', (1.0,))

# [e_0, e_1] = e_2 and cyclic
SU2_STRUCTURE = ((0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0))


def _family(family: Optional[NormFamily]) -> NormFamily:
    return make_family(*DEFAULT_FAMILY) if family is None else family


def _factor(name: str, data: LieData, gram) -> HomogeneousSpace:
    return HomogeneousSpace.build(name, data, gram, 'riemannian')


def abelian_factor(n: int) -> HomogeneousSpace:
    data = LieData.from_triples(0, n, 0, [])
    return _factor(f"R{n}", data, np.eye(n))


def su2_factor() -> HomogeneousSpace:
    """su(2) with its bi-invariant metric, H trivial (the round S^3)."""
    data = LieData.from_triples(0, 3, 0, SU2_STRUCTURE, labels=('e1', 'e2', 'e3'))
    return _factor('S3', data, np.eye(3))


def so3_so2_factor() -> HomogeneousSpace:
    """so(3) over the SO(2) fixing e3, the round S^2 with curvature 1. Basis (e3 | e1, e2)."""
    data = LieData.from_triples(1, 2, 0, [(1, 2, 0, 1.0), (2, 0, 1, 1.0), (0, 1, 2, 1.0)], labels=('e3', 'e1', 'e2'))
    return _factor('S2', data, np.eye(2))


def su2_skewed_factor() -> HomogeneousSpace:
    """su(2) with a left-invariant metric whose ad is not skew."""
    data = LieData.from_triples(0, 3, 0, SU2_STRUCTURE, labels=('e1', 'e2', 'e3'))
    return _factor('S3_skewed', data, np.diag([1.0, 2.0, 3.0]))


def f_product(space1: HomogeneousSpace, space2: HomogeneousSpace,
              family: Optional[NormFamily] = None, tol: float = 1e-12) -> HomogeneousSpace:
    """
    Direct sum g1 + g2, h = h1 + h2, m1 = m of the first factor, m2 = m of
    the second, block gram. Basis order of the result is (h1, h2, m1, m2).
    """
    for factor in (space1, space2):
        if factor.data.dim_m2 != 0:
            raise NotNaturallyReductiveError(
                f"{factor.name} is not a Riemannian factor (dim m2 = {factor.data.dim_m2})")
        residual, label = riemannian_nr_residual(factor.data, factor.ip)
        if residual > tol:
            raise NotNaturallyReductiveError(
                f"{factor.name} is not naturally reductive: ad({label}) skewness residual {residual:.3g}")

    d1, d2 = space1.data, space2.data
    h1, h2 = d1.dim_h, d2.dim_h
    n1, n2 = d1.dim_m, d2.dim_m

    def index1(i):
        return i if i < h1 else h1 + h2 + (i - h1)

    def index2(i):
        return h1 + i if i < h2 else h1 + h2 + n1 + (i - h2)

    triples = [(index1(i), index1(j), index1(k), v) for i, j, k, v in d1.structure]
    triples += [(index2(i), index2(j), index2(k), v) for i, j, k, v in d2.structure]

    gram = np.zeros((n1 + n2, n1 + n2))
    gram[:n1, :n1] = space1.ip.gram
    gram[n1:, n1:] = space2.ip.gram

    data = LieData.from_triples(h1 + h2, n1, n2, triples)
    name = f"{space1.name}x{space2.name}"
    logger.info(f"Built f-product {name} ({h1 + h2} + {n1} + {n2})")
    return HomogeneousSpace.build(name, data, gram, _family(family))


def euclidean_diag_so2(family: Optional[NormFamily] = None) -> HomogeneousSpace:
    """
    The Euclidean plane squared, E(2) x E(2) modulo the diagonal SO(2).

    h rotates both translation planes at once; all brackets inside m vanish.
    G is not locally a product of two subgroups, yet the metric is
    naturally reductive for every admissible family.
    """
    triples = [(0, 1, 2, 1.0), (0, 2, 1, -1.0), (0, 3, 4, 1.0), (0, 4, 3, -1.0)]
    data = LieData.from_triples(1, 2, 2, triples, labels=('r', 'x1', 'y1', 'x2', 'y2'))
    return HomogeneousSpace.build('euclidean_diag_so2', data, np.eye(4), _family(family))


def abelian_space(n1: int = 2, n2: int = 2, family: Optional[NormFamily] = None) -> HomogeneousSpace:
    space = f_product(abelian_factor(n1), abelian_factor(n2), family)
    return HomogeneousSpace(f"abelian_{n1}_{n2}", space.data, space.ip, space.norm)


def s3_product(family: Optional[NormFamily] = None) -> HomogeneousSpace:
    return f_product(su2_factor(), su2_factor(), family)


def s2_product(family: Optional[NormFamily] = None) -> HomogeneousSpace:
    """S^2 x S^2 with isotropy SO(2) x SO(2); basis (h1, h2, m1, m2)."""
    return f_product(so3_so2_factor(), so3_so2_factor(), family)


def su2_negative(family: Optional[NormFamily] = None) -> HomogeneousSpace:
    """su(2), H trivial, m1 = span(e1, e2), m2 = span(e3), bi-invariant gram. Not naturally reductive."""
    data = LieData.from_triples(0, 2, 1, SU2_STRUCTURE, labels=('e1', 'e2', 'e3'))
    return HomogeneousSpace.build('su2_negative', data, np.eye(3), _family(family))


def su2_anisotropic(family: Optional[NormFamily] = None) -> HomogeneousSpace:
    """
    Same split as su2_negative with gram diag(1, 2, 1). Here
    <[y1, e3], y1> = ab (g11 - g22) for y1 = a e1 + b e2, so S does not vanish.
    """
    data = LieData.from_triples(0, 2, 1, SU2_STRUCTURE, labels=('e1', 'e2', 'e3'))
    return HomogeneousSpace.build('su2_anisotropic', data, np.diag([1.0, 2.0, 1.0]), _family(family))


FIXTURES: Dict[str, Callable[..., HomogeneousSpace]] = {
    'euclidean_diag_so2': euclidean_diag_so2,
    'abelian': abelian_space,
    's3_product': s3_product,
    's2_product': s2_product,
    'su2_negative': su2_negative,
    'su2_anisotropic': su2_anisotropic,
}


def build_fixture(name: str, family: Optional[NormFamily] = None) -> HomogeneousSpace:
    if name not in FIXTURES:
        raise ConfigError(f"Unknown fixture '{name}'; known: {', '.join(sorted(FIXTURES))}")
    return FIXTURES[name](family=family)
