"""
Homogeneous (alpha1, alpha2) metrics on G/H at the origin.

Everything is evaluated on m = m1 + m2 in m-coordinates. The spray vector
field eta is defined by g_y(eta(y), u) = g_y(y, [u, y]_m); natural
reductiveness is decided structurally (bracket conditions on the
decomposition), by the Killing-type identity on g_y and C_y, and by eta = 0.
The S-curvature at the origin is I_y(eta(y)).
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional

import numpy as np
import scipy.linalg as spla

from modules import oracle
from modules.errors import AdmissibilityError, DomainError
from modules.lie_core import (InnerProduct, LieData, ad_matrix, block_residual, check_record,
                              riemannian_nr_residual, skew_residual)
from modules.norms import (MinkowskiNorm, cartan_tensor_matrix, f_value, fundamental_tensor,
                           make_family, mean_cartan_vector, nonlinearity_check)
from modules.sampling import ordered_map, sphere_directions
from settings import merged

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class HomogeneousSpace:
    name: str
    data: LieData
    ip: InnerProduct
    norm: MinkowskiNorm

    def __post_init__(self):
        if self.ip.dim != self.data.dim_m:
            raise DomainError(f"{self.name}: gram is {self.ip.dim}x{self.ip.dim} but m has dimension {self.data.dim_m}")
        if self.norm.split != (self.data.dim_m1, self.data.dim_m2):
            raise DomainError(f"{self.name}: norm split {self.norm.split} does not match "
                              f"(dim m1, dim m2) = ({self.data.dim_m1}, {self.data.dim_m2})")

    @classmethod
    def build(cls, name: str, data: LieData, gram, family, params=None, grid: int = 32) -> 'HomogeneousSpace':
        """Assemble a space from a gram matrix and a family (instance or registry name)."""
        ip = InnerProduct(np.asarray(gram, dtype=float))
        if isinstance(family, str):
            family = make_family(family, params)
        norm = MinkowskiNorm(family, (data.dim_m1, data.dim_m2), ip, grid)
        return cls(name, data, ip, norm)

    @property
    def dim(self) -> int:
        return self.data.dim_m

    @property
    def riemannian(self) -> bool:
        return not nonlinearity_check(self.norm.family)

    @cached_property
    def structurally_nr(self) -> bool:
        return nr_structural_check(self)['passed']


def _basis(n: int, i: int) -> np.ndarray:
    e = np.zeros(n)
    e[i] = 1.0
    return e


def _m_basis_ad(data: LieData) -> List[np.ndarray]:
    """ad_m(e_i)|_m for every basis vector of m."""
    return [ad_matrix(data, data.embed_m(_basis(data.dim_m, i)), 'm') for i in range(data.dim_m)]


def indicatrix_samples(space: HomogeneousSpace, count: int, seed: int,
                       part: Optional[str] = None) -> np.ndarray:
    """Sampled directions rescaled onto F = 1; `part` restricts them to m1 or m2."""
    mask = None if part is None else space.data.m_mask(part)
    directions = sphere_directions(space.ip.gram, count, seed, mask)
    scale = np.array([f_value(space.norm, y) for y in directions])
    return directions / scale[:, None]


def _worst(values: np.ndarray, samples: np.ndarray):
    if len(values) == 0:
        return 0.0, None
    at = int(np.argmax(values))
    return float(values[at]), samples[at].tolist()


def spray_vector(space: HomogeneousSpace, y) -> np.ndarray:
    """eta(y) from the n x n system g_y eta = b, b_i = g_y(y, [e_i, y]_m)."""
    sample = fundamental_tensor(space.norm, y)
    g = sample.g_matrix
    # [e_i, y]_m = -ad(y) e_i
    a = ad_matrix(space.data, space.data.embed_m(sample.y), 'm')
    b = -a.T @ (g @ sample.y)
    try:
        factor = spla.cho_factor(g)
    except spla.LinAlgError as e:
        raise AdmissibilityError(f"Fundamental tensor is singular at y = {sample.y.tolist()}", y=sample.y) from e
    return spla.cho_solve(factor, b)


def nr_structural_check(space: HomogeneousSpace, tol: float = 1e-9) -> Dict:
    """
    Exact certificate for natural reductiveness.

    Non-Riemannian families need
      (1) [m_i, m_i] in h + m_i,
      (2) [m1, m2] in h,
      (3) <y_i, [y_i, m_i]_{m_i}> = 0, checked as skewness of ad(x)|_{m_i} for basis x in m_i,
    and the alpha-part (skew ad_m(x)|_m for x in m). For a linear family only the
    alpha-part is used, with the effective inner product L1 G1 + L2 G2.
    """
    data, ip = space.data, space.ip
    c = data.tensor
    m1, m2, m = (data.index_block(p) for p in ('m1', 'm2', 'm'))
    checks = []

    if space.riemannian:
        d = space.norm.family.partials(1.0, 1.0)
        g1, g2 = space.norm.blocks
        effective = float(d['L1']) * g1 + float(d['L2']) * g2
        residual, label = riemannian_nr_residual(data, ip, effective)
        checks.append(check_record('alpha_part', residual, tol, witness=label))
        passed = checks[0]['passed']
        return {'checks': checks, 'passed': passed, 'riemannian': True}

    checks.append(block_residual('subalgebra_m1', c, m1, m1, m2, tol, data.labels))
    checks.append(block_residual('subalgebra_m2', c, m2, m2, m1, tol, data.labels))
    checks.append(block_residual('m1_m2_in_h', c, m1, m2, m, tol, data.labels))

    worst, label = 0.0, None
    ads = _m_basis_ad(data)
    for part in ('m1', 'm2'):
        mask = data.m_mask(part)
        block_gram = ip.gram[np.ix_(mask, mask)]
        for i in np.flatnonzero(mask):
            res = skew_residual(block_gram, ads[i][np.ix_(mask, mask)])
            if res > worst:
                worst, label = res, data.labels[data.dim_h + i]
    checks.append(check_record('block_skewness', worst, tol, witness=label))

    residual, label = riemannian_nr_residual(data, ip)
    checks.append(check_record('alpha_part', residual, tol, witness=label))

    passed = all(item['passed'] for item in checks)
    logger.debug(f"{space.name}: structural NR residuals {[item['residual'] for item in checks]}")
    return {'checks': checks, 'passed': passed, 'riemannian': False}


def latifi_residual(space: HomogeneousSpace, y, ads: Optional[List[np.ndarray]] = None) -> float:
    """
    max over basis w, u, v of
    |g_y([w,u]_m, v) + g_y([w,v]_m, u) + 2 C_y([w,y]_m, u, v)|.
    """
    y = np.asarray(y, dtype=float)
    g = fundamental_tensor(space.norm, y).g_matrix
    cartan = cartan_tensor_matrix(space.norm, y)
    ads = _m_basis_ad(space.data) if ads is None else ads
    worst = 0.0
    for a in ads:
        term = a.T @ g + g @ a + 2.0 * np.einsum('ijk,i->jk', cartan, a @ y)
        worst = max(worst, float(np.max(np.abs(term))))
    return worst


def nr_latifi_check(space: HomogeneousSpace, samples: int = 256, seed: int = 7,
                    tol: float = 1e-8, workers: int = 1) -> Dict:
    ys = indicatrix_samples(space, samples, seed)
    ads = _m_basis_ad(space.data)
    values = np.array(ordered_map(lambda y: latifi_residual(space, y, ads), ys, workers))
    residual, witness = _worst(values, ys)
    return check_record('latifi_identity', residual, tol, samples=len(ys), witness=witness)


def nr_spray_check(space: HomogeneousSpace, samples: int = 256, seed: int = 7,
                   tol: float = 1e-8, workers: int = 1) -> Dict:
    ys = indicatrix_samples(space, samples, seed)
    values = np.array(ordered_map(lambda y: space.ip.norm(spray_vector(space, y)), ys, workers))
    residual, witness = _worst(values, ys)
    return check_record('spray_vanishes', residual, tol, samples=len(ys), witness=witness)


def nr_verdict(space: HomogeneousSpace, settings: Optional[Dict] = None) -> Dict:
    """The three NR checks side by side, with their agreement."""
    cfg = merged(settings)
    structural = nr_structural_check(space, cfg['tol_struct'])
    latifi = nr_latifi_check(space, cfg['samples'], cfg['seed'], cfg['tol_nr'], cfg['workers'])
    spray = nr_spray_check(space, cfg['samples'], cfg['seed'], cfg['tol_nr'], cfg['workers'])

    verdicts = {
        'structural': structural['passed'],
        'latifi': latifi['passed'],
        'spray': spray['passed'],
    }
    agree = len(set(verdicts.values())) == 1
    if not agree:
        logger.warning(f"{space.name}: NR checks disagree {verdicts}")
    logger.info(f"{space.name}: naturally reductive = {verdicts['structural']} (agree = {agree})")
    return {
        'checks': structural['checks'] + [latifi, spray],
        'verdicts': verdicts,
        'naturally_reductive': bool(all(verdicts.values())),
        'agree': agree,
    }


def s_curvature(space: HomogeneousSpace, y) -> float:
    """S(o, y) = I_y(eta(y))."""
    y = np.asarray(y, dtype=float)
    if not np.any(y):
        raise DomainError("S-curvature is undefined at y = 0")
    return float(mean_cartan_vector(space.norm, y) @ spray_vector(space, y))


def s_vanishing_structural(space: HomogeneousSpace, tol: float = 1e-9) -> Dict:
    """
    <[y1, m2]_m, y1> = 0 and <y2, [y2, m1]_m> = 0, polarized: ad(z)|_{m1}
    skew for z in m2 and ad(z)|_{m2} skew for z in m1.
    """
    data, ip = space.data, space.ip
    ads = _m_basis_ad(data)
    checks = []
    for name, target, source in (('s_condition_m1', 'm1', 'm2'), ('s_condition_m2', 'm2', 'm1')):
        mask = data.m_mask(target)
        block_gram = ip.gram[np.ix_(mask, mask)]
        worst, label = 0.0, None
        for i in np.flatnonzero(data.m_mask(source)):
            res = skew_residual(block_gram, ads[i][np.ix_(mask, mask)])
            if res > worst:
                worst, label = res, data.labels[data.dim_h + i]
        checks.append(check_record(name, worst, tol, witness=label))
    return {'checks': checks, 'passed': all(item['passed'] for item in checks)}


def e_curvature(space: HomogeneousSpace, y, h: Optional[float] = None) -> np.ndarray:
    """E_ij = (1/2) d^2 S / dy_i dy_j by central differences of the algebraic S."""
    y = np.asarray(y, dtype=float)
    if not np.any(y):
        raise DomainError("E-curvature is undefined at y = 0")
    return 0.5 * oracle.fd_hessian(lambda z: s_curvature(space, z), y, h)


def _max_abs_s(space, ys, workers):
    return np.array(ordered_map(lambda y: abs(s_curvature(space, y)), ys, workers))


def s_block_check(space: HomogeneousSpace, samples: int = 50, seed: int = 7,
                  tol: float = 1e-9, workers: int = 1) -> List[Dict]:
    """Sampled |S| on m1 \\ {0} and on m2 \\ {0}; S vanishes there for every (alpha1, alpha2) metric."""
    checks = []
    for part in ('m1', 'm2'):
        if not np.any(space.data.m_mask(part)):
            checks.append(check_record(f's_on_{part}', 0.0, tol))
            continue
        ys = indicatrix_samples(space, samples, seed, part)
        residual, witness = _worst(_max_abs_s(space, ys, workers), ys)
        checks.append(check_record(f's_on_{part}', residual, tol, samples=len(ys), witness=witness))
    return checks


def s_parity_check(space: HomogeneousSpace, samples: int = 100, seed: int = 7,
                   tol: float = 1e-9, workers: int = 1) -> Dict:
    ys = indicatrix_samples(space, samples, seed)
    values = np.array(ordered_map(lambda y: abs(s_curvature(space, y) + s_curvature(space, -y)), ys, workers))
    residual, witness = _worst(values, ys)
    return check_record('s_odd', residual, tol, samples=len(ys), witness=witness)


def s_sampled_check(space: HomogeneousSpace, samples: int = 256, seed: int = 7,
                    tol: float = 1e-9, workers: int = 1) -> Dict:
    ys = indicatrix_samples(space, samples, seed)
    residual, witness = _worst(_max_abs_s(space, ys, workers), ys)
    return check_record('s_vanishes', residual, tol, samples=len(ys), witness=witness)


def e_sampled_check(space: HomogeneousSpace, samples: int = 64, seed: int = 7,
                    tol: float = 1e-6, workers: int = 1) -> Dict:
    ys = indicatrix_samples(space, samples, seed)
    values = np.array(ordered_map(lambda y: float(np.max(np.abs(e_curvature(space, y)))), ys, workers))
    residual, witness = _worst(values, ys)
    return check_record('e_vanishes', residual, tol, samples=len(ys), witness=witness)


def e_sample_count(samples: int) -> int:
    # each E sample costs 2 n^2 + 1 evaluations of S
    return max(16, samples // 4)


def equivalence_audit(space: HomogeneousSpace, settings: Optional[Dict] = None) -> Dict:
    """
    Sampled S = 0, sampled E = 0 and the structural S certificate.

    Weak isotropy of S and isotropy of E are not estimated on their own: for
    homogeneous (alpha1, alpha2) metrics they coincide with vanishing, so the
    flags are folded into the vanishing ones.
    """
    cfg = merged(settings)
    s_check = s_sampled_check(space, cfg['samples'], cfg['seed'], cfg['tol_s'], cfg['workers'])
    e_check = e_sampled_check(space, e_sample_count(cfg['samples']), cfg['seed'], cfg['tol_e'], cfg['workers'])
    structural = s_vanishing_structural(space, cfg['tol_struct'])

    verdict = {
        'weakly_isotropic_s': s_check['passed'],
        'vanishing_s': s_check['passed'],
        'isotropic_e': e_check['passed'],
        'vanishing_e': e_check['passed'],
    }
    agree = len(set(verdict.values()) | {structural['passed']}) == 1
    if not agree:
        logger.warning(f"{space.name}: equivalence verdicts disagree: sampled S {s_check['passed']}, "
                       f"sampled E {e_check['passed']}, structural {structural['passed']}")
    return {
        'checks': [s_check, e_check] + structural['checks'],
        'verdict': verdict,
        'structural': structural['passed'],
        'agree': agree,
    }
