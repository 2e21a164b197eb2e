"""
(alpha1, alpha2) Minkowski norms F(y) = sqrt(L(|y1|^2, |y2|^2)) on m = m1 + m2.

The L-form is the internal representation. Every family provides L and its
partial derivatives through order 3; the phi-form F(y) = |y| phi(|y2|/|y|)
is derived from it (phi(s)^2 = L(1 - s^2, s^2)) unless a family defines phi
directly.
"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as spla
from scipy.interpolate import CubicSpline

from modules.errors import AdmissibilityError, ConfigError, DomainError
from modules.lie_core import InnerProduct, check_record

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps

PARTIAL_KEYS = ('L', 'L1', 'L2', 'L11', 'L12', 'L22', 'L111', 'L112', 'L122', 'L222')

# derivative orders (d/du, d/dv) for each key
_ORDERS = {
    'L': (0, 0), 'L1': (1, 0), 'L2': (0, 1),
    'L11': (2, 0), 'L12': (1, 1), 'L22': (0, 2),
    'L111': (3, 0), 'L112': (2, 1), 'L122': (1, 2), 'L222': (0, 3),
}


class NormFamily:
    """
    A positively 1-homogeneous function L(u, v) on the closed quadrant.

    Subclasses override `partials`; the base implementation differentiates
    `value` numerically (nested central differences), which is what the
    `user-table` family relies on.
    """

    kind = 'abstract'

    def __init__(self, params: Sequence[float] = ()):
        self.params = tuple(float(p) for p in params)

    def __repr__(self):
        return f"{type(self).__name__}(kind={self.kind!r}, params={list(self.params)})"

    def value(self, u, v):
        raise NotImplementedError

    def partials(self, u, v) -> Dict[str, np.ndarray]:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        w = u + v
        # derivatives of a 1-homogeneous function have degree 1 - order; work on u + v = 1
        a, b = u / w, v / w
        out = {}
        for key, (du, dv) in _ORDERS.items():
            order = du + dv
            raw = self._fd(a, b, du, dv)
            out[key] = raw * w ** (1 - order)
        return out

    def _fd(self, a, b, du, dv):
        order = du + dv
        if order == 0:
            return self.value(a, b)
        h = EPS ** (1.0 / (order + 2))
        return _central(self.value, a, b, du, dv, h)

    def phi(self, s) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """phi, phi', phi'' at s = |y2|/|y|, from the L-form."""
        s = np.asarray(s, dtype=float)
        d = self.partials(1.0 - s * s, s * s)
        big = d['L']
        big_1 = 2.0 * s * (d['L2'] - d['L1'])
        big_2 = 2.0 * (d['L2'] - d['L1']) + 4.0 * s * s * (d['L11'] - 2.0 * d['L12'] + d['L22'])
        phi = np.sqrt(big)
        phi_1 = big_1 / (2.0 * phi)
        phi_2 = (big_2 - 2.0 * phi_1 * phi_1) / (2.0 * phi)
        return phi, phi_1, phi_2

    def describe(self) -> Dict:
        return {'kind': self.kind, 'params': list(self.params)}


def _central(f: Callable, a, b, du: int, dv: int, h: float):
    """Nested central differences of f(a, b), du times in a and dv times in b."""
    if du > 0:
        return (_central(f, a + h, b, du - 1, dv, h) - _central(f, a - h, b, du - 1, dv, h)) / (2 * h)
    if dv > 0:
        return (_central(f, a, b + h, du, dv - 1, h) - _central(f, a, b - h, du, dv - 1, h)) / (2 * h)
    return f(a, b)


class LinearFamily(NormFamily):
    """L = a u + b v; Riemannian for every a, b > 0."""

    kind = 'linear'

    def __init__(self, params: Sequence[float] = (1.0, 1.0)):
        super().__init__(params)
        if len(self.params) != 2 or min(self.params) <= 0:
            raise ConfigError(f"linear family needs two positive coefficients, got {list(self.params)}")
        self.coeffs = self.params

    def value(self, u, v):
        a, b = self.coeffs
        return a * np.asarray(u, dtype=float) + b * np.asarray(v, dtype=float)

    def partials(self, u, v):
        a, b = self.coeffs
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        zero = np.zeros(np.broadcast(u, v).shape)
        out = {key: zero for key in PARTIAL_KEYS}
        out['L'] = a * u + b * v
        out['L1'] = zero + a
        out['L2'] = zero + b
        return out


class RiemannianFamily(LinearFamily):
    kind = 'riemannian'

    def __init__(self, params: Sequence[float] = ()):
        if params:
            raise ConfigError("riemannian family takes no parameters")
        super().__init__((1.0, 1.0))
        # coefficients stay (1, 1); params only feed describe() and the fingerprint
        self.params = ()


class QuarticMeanFamily(NormFamily):
    """L = sqrt(u^2 + c u v + v^2)."""

    kind = 'quartic-mean'

    def __init__(self, params: Sequence[float] = (1.0,)):
        super().__init__(params)
        if len(self.params) != 1 or self.params[0] <= -2.0:
            raise ConfigError(f"quartic-mean needs one parameter c > -2, got {list(self.params)}")

    def value(self, u, v):
        c = self.params[0]
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return np.sqrt(u * u + c * u * v + v * v)

    def partials(self, u, v):
        c = self.params[0]
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        big_p = u * u + c * u * v + v * v
        grad = {'u': 2 * u + c * v, 'v': c * u + 2 * v}
        hess = {('u', 'u'): 2.0, ('u', 'v'): c, ('v', 'v'): 2.0}
        r1 = big_p ** -0.5
        r3 = big_p ** -1.5
        r5 = big_p ** -2.5

        def second(x, y):
            return 0.5 * r1 * hess[_pair(x, y)] - 0.25 * r3 * grad[x] * grad[y]

        def third(x, y, z):
            mixed = (hess[_pair(x, y)] * grad[z] + hess[_pair(x, z)] * grad[y] + hess[_pair(y, z)] * grad[x])
            return -0.25 * r3 * mixed + 0.375 * r5 * grad[x] * grad[y] * grad[z]

        return {
            'L': np.sqrt(big_p),
            'L1': 0.5 * r1 * grad['u'],
            'L2': 0.5 * r1 * grad['v'],
            'L11': second('u', 'u'),
            'L12': second('u', 'v'),
            'L22': second('v', 'v'),
            'L111': third('u', 'u', 'u'),
            'L112': third('u', 'u', 'v'),
            'L122': third('u', 'v', 'v'),
            'L222': third('v', 'v', 'v'),
        }


def _pair(x, y):
    return (x, y) if (x, y) in (('u', 'u'), ('u', 'v'), ('v', 'v')) else (y, x)


def _falling(x: float, n: int) -> float:
    out = 1.0
    for i in range(n):
        out *= (x - i)
    return out


class PhiPowerFamily(NormFamily):
    """
    phi(s) = sqrt(1 + k s^(2p)), integer p >= 2, k > -1.

    In L-form: L(u, v) = (u + v) + k v^p (u + v)^(1 - p).
    """

    kind = 'phi-power'

    def __init__(self, params: Sequence[float] = (0.5, 2.0)):
        super().__init__(params)
        if len(self.params) != 2:
            raise ConfigError(f"phi-power needs parameters [k, p], got {list(self.params)}")
        k, p = self.params
        if k <= -1.0 or p < 2 or p != int(p):
            raise ConfigError(f"phi-power needs k > -1 and integer p >= 2, got k={k}, p={p}")

    def value(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return u + v + self.params[0] * self._monomial(u, v, 0, 0)

    def _monomial(self, u, v, du: int, dv: int):
        """d^du/du d^dv/dv of v^p w^q with w = u + v and q = 1 - p."""
        p = int(self.params[1])
        q = 1.0 - p
        w = u + v
        r = q - du
        coeff_u = _falling(q, du)
        total = np.zeros(np.broadcast(u, v).shape)
        for j in range(dv + 1):
            fv = _falling(p, j)
            if fv == 0.0:
                continue
            fw = _falling(r, dv - j)
            total = total + math.comb(dv, j) * fv * fw * v ** (p - j) * w ** (r - (dv - j))
        return coeff_u * total

    def partials(self, u, v):
        k = self.params[0]
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        out = {}
        for key, (du, dv) in _ORDERS.items():
            out[key] = k * self._monomial(u, v, du, dv)
        out['L'] = out['L'] + u + v
        out['L1'] = out['L1'] + 1.0
        out['L2'] = out['L2'] + 1.0
        return out

    def phi(self, s):
        k, p = self.params[0], int(self.params[1])
        s = np.asarray(s, dtype=float)
        phi = np.sqrt(1.0 + k * s ** (2 * p))
        phi_1 = k * p * s ** (2 * p - 1) / phi
        phi_2 = (k * p * (2 * p - 1) * s ** (2 * p - 2) - phi_1 * phi_1) / phi
        return phi, phi_1, phi_2


class UserTableFamily(NormFamily):
    """
    L sampled along u + v = 1: params are l(t) = L(1 - t, t) on a uniform grid
    of t in [0, 1]. L(u, v) = (u + v) l(v / (u + v)) with a cubic spline l.

    Derivatives are numerical (nested central differences), so third-order
    partials carry roughly 1e-6 relative error.
    """

    kind = 'user-table'

    def __init__(self, params: Sequence[float]):
        super().__init__(params)
        if len(self.params) < 4:
            raise ConfigError("user-table needs at least 4 samples of L(1 - t, t)")
        if min(self.params) <= 0:
            raise ConfigError("user-table samples must be positive")
        grid = np.linspace(0.0, 1.0, len(self.params))
        self._spline = CubicSpline(grid, np.array(self.params))

    def value(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        w = u + v
        return w * self._spline(v / w)


FAMILIES = {
    'riemannian': RiemannianFamily,
    'linear': LinearFamily,
    'quartic-mean': QuarticMeanFamily,
    'phi-power': PhiPowerFamily,
    'user-table': UserTableFamily,
}


def make_family(kind: str, params: Optional[Sequence[float]] = None) -> NormFamily:
    if kind not in FAMILIES:
        raise ConfigError(f"Unknown norm family '{kind}'; known: {', '.join(sorted(FAMILIES))}")
    cls = FAMILIES[kind]
    if params is None:
        return cls()
    return cls(list(params))


def fingerprint(family: NormFamily) -> str:
    canonical = json.dumps(family.describe(), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


@dataclass(frozen=True, eq=False)
class TensorSample:
    y: np.ndarray
    g_matrix: np.ndarray
    F_value: float
    partials: Dict = field(default_factory=dict, repr=False)


@dataclass(frozen=True, eq=False)
class MinkowskiNorm:
    family: NormFamily
    split: Tuple[int, int]
    ip: InnerProduct
    grid: int = 32

    def __post_init__(self):
        n1, n2 = (int(n) for n in self.split)
        object.__setattr__(self, 'split', (n1, n2))
        if n1 + n2 != self.ip.dim:
            raise DomainError(f"Split {self.split} does not match the {self.ip.dim}-dimensional inner product")
        if not self.admissibility['passed']:
            logger.warning(f"Norm family {self.family!r} failed the strong convexity audit: "
                           f"{self.admissibility['witness']}")

    @property
    def dim(self) -> int:
        return self.ip.dim

    @cached_property
    def masks(self) -> Tuple[np.ndarray, np.ndarray]:
        n1, n2 = self.split
        m1 = np.zeros(n1 + n2, dtype=bool)
        m1[:n1] = True
        return m1, ~m1

    @cached_property
    def blocks(self) -> Tuple[np.ndarray, np.ndarray]:
        m1, m2 = self.masks
        return self.ip.block(m1), self.ip.block(m2)

    @cached_property
    def admissibility(self) -> Dict:
        return admissibility_audit(self.family, self.split, self.grid)

    @property
    def admissible(self) -> bool:
        return self.admissibility['passed']


def _split_parts(norm: MinkowskiNorm, y):
    y = np.asarray(y, dtype=float)
    if y.shape != (norm.dim,):
        raise DomainError(f"Expected an m-vector of length {norm.dim}, got shape {y.shape}")
    g1, g2 = norm.blocks
    p = g1 @ y
    q = g2 @ y
    return y, float(y @ p), float(y @ q), p, q


def _require_nonzero(u: float, v: float, y):
    if u + v <= 0.0:
        raise DomainError(f"The tensor is undefined at y = {np.asarray(y).tolist()} (zero vector)")


def f_value(norm: MinkowskiNorm, y) -> float:
    """F(y) = sqrt(L(|y1|^2, |y2|^2))."""
    y, u, v, _, _ = _split_parts(norm, y)
    if u + v == 0.0:
        return 0.0
    return float(np.sqrt(norm.family.value(u, v)))


def fundamental_tensor(norm: MinkowskiNorm, y) -> TensorSample:
    """
    g_y from the L-form:
    L1 <u1,v1> + L2 <u2,v2> + 2 L11 <y1,u1><y1,v1> + 2 L22 <y2,u2><y2,v2>
    + 2 L12 (<y1,u1><y2,v2> + <y2,u2><y1,v1>).
    """
    y, u, v, p, q = _split_parts(norm, y)
    _require_nonzero(u, v, y)
    d = norm.family.partials(u, v)
    g1, g2 = norm.blocks
    g = (float(d['L1']) * g1 + float(d['L2']) * g2
         + 2.0 * float(d['L11']) * np.outer(p, p)
         + 2.0 * float(d['L22']) * np.outer(q, q)
         + 2.0 * float(d['L12']) * (np.outer(p, q) + np.outer(q, p)))
    g = 0.5 * (g + g.T)
    return TensorSample(y=y, g_matrix=g, F_value=float(np.sqrt(d['L'])),
                        partials={k: float(val) for k, val in d.items()})


def fundamental_tensor_phi(norm: MinkowskiNorm, y, u, v) -> float:
    """
    g_y(u, v) from the phi-form expansion of (1/2) d^2/ds dt F^2(y + s u + t v).

    Independent of `fundamental_tensor`; requires |y2| > 0 because of the
    1/|y2| terms.
    """
    ip = norm.ip
    m1, m2 = norm.masks
    y = np.asarray(y, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    y2, u2, v2 = (np.where(m2, vec, 0.0) for vec in (y, u, v))

    ny = ip.norm(y)
    ny2 = ip.norm(y2)
    if ny == 0.0:
        raise DomainError("The phi-form is undefined at y = 0")
    if ny2 <= 1e-14 * ny:
        raise DomainError("The phi-form divides by |y2|; use fundamental_tensor (L-form) on the m1 stratum")

    s = ny2 / ny
    phi, phi_1, phi_2 = (float(x) for x in norm.family.phi(s))

    yu, yv, uv = ip.dot(y, u), ip.dot(y, v), ip.dot(u, v)
    y2u2, y2v2, u2v2 = ip.dot(y2, u2), ip.dot(y2, v2), ip.dot(u2, v2)

    first = (y2u2 * yv / (ny * ny2) + y2v2 * yu / (ny * ny2)
             - ny2 * yu * yv / ny ** 3
             + u2v2 * ny / ny2 - uv * ny2 / ny
             - ny * y2u2 * y2v2 / ny2 ** 3)
    su = y2u2 / ny2 - yu * ny2 / ny ** 2
    sv = y2v2 / ny2 - yv * ny2 / ny ** 2
    return uv * phi * phi + phi * phi_1 * first + (phi_1 * phi_1 + phi * phi_2) * su * sv


def cartan_tensor_matrix(norm: MinkowskiNorm, y) -> np.ndarray:
    """
    C_y as a symmetric n x n x n array, C_y(u, v, w) = (1/2) d/dt g_{y+tw}(u, v),
    assembled from the L-partials through order 3.
    """
    y, u, v, p, q = _split_parts(norm, y)
    _require_nonzero(u, v, y)
    d = {k: float(val) for k, val in norm.family.partials(u, v).items()}
    g1, g2 = norm.blocks

    def sym_metric(g, a):
        # G[i,j] a[k] + G[j,k] a[i] + G[i,k] a[j]
        return (np.einsum('ij,k->ijk', g, a) + np.einsum('jk,i->ijk', g, a) + np.einsum('ik,j->ijk', g, a))

    def sym_outer(a, b, c):
        return (np.einsum('i,j,k->ijk', a, b, c) + np.einsum('i,j,k->ijk', b, c, a)
                + np.einsum('i,j,k->ijk', c, a, b))

    ppp = np.einsum('i,j,k->ijk', p, p, p)
    qqq = np.einsum('i,j,k->ijk', q, q, q)
    c = (d['L11'] * sym_metric(g1, p) + d['L22'] * sym_metric(g2, q)
         + d['L12'] * (sym_metric(g1, q) + sym_metric(g2, p))
         + 2.0 * d['L111'] * ppp + 2.0 * d['L222'] * qqq
         + 2.0 * d['L112'] * sym_outer(p, p, q) + 2.0 * d['L122'] * sym_outer(p, q, q))
    return c


def cartan_tensor(norm: MinkowskiNorm, y, u, v, w) -> float:
    return float(np.einsum('ijk,i,j,k->', cartan_tensor_matrix(norm, y), u, v, w))


def mean_cartan_vector(norm: MinkowskiNorm, y) -> np.ndarray:
    """Components I_k with I_y(u) = I . u, traced against the inverse fundamental tensor."""
    sample = fundamental_tensor(norm, y)
    g_inv = inverse_fundamental(sample)
    return np.einsum('ijk,jk->i', cartan_tensor_matrix(norm, y), g_inv)


def mean_cartan(norm: MinkowskiNorm, y, u) -> float:
    return float(mean_cartan_vector(norm, y) @ np.asarray(u, dtype=float))


def inverse_fundamental(sample: TensorSample) -> np.ndarray:
    g = sample.g_matrix
    try:
        factor = spla.cho_factor(g)
    except spla.LinAlgError as e:
        raise AdmissibilityError(f"Fundamental tensor is not positive definite at y = {sample.y.tolist()}",
                                 y=sample.y) from e
    return spla.cho_solve(factor, np.eye(g.shape[0]))


def nonlinearity_check(family: NormFamily, rays: int = 5) -> bool:
    """
    True iff L1 and L2 are not proportional on the sampled rays.

    A False answer means L is linear and the metric is Riemannian.
    """
    t = np.linspace(0.1, 0.9, max(rays, 3))
    d = family.partials(1.0 - t, t)
    l1 = np.asarray(d['L1'], dtype=float)
    l2 = np.asarray(d['L2'], dtype=float)
    scale = float(np.max(np.abs(l1)) * np.max(np.abs(l2))) or 1.0
    cross = np.abs(np.outer(l1, l2) - np.outer(l2, l1))
    return bool(np.max(cross) > 1e-8 * scale)


def family_audit(family: NormFamily, rays: int = 16, tol: float = 1e-9) -> Dict:
    """Sampled homogeneity, Euler identity and the positivity conditions on L."""
    theta = np.linspace(0.0, np.pi / 2, rays)
    u, v = np.cos(theta) ** 2, np.sin(theta) ** 2
    d = family.partials(u, v)
    base = np.asarray(d['L'], dtype=float)

    homogeneity = 0.0
    for lam in (0.5, 2.0, 7.0):
        scaled = np.asarray(family.value(lam * u, lam * v), dtype=float)
        homogeneity = max(homogeneity, float(np.max(np.abs(scaled - lam * base) / (lam * np.abs(base)))))

    euler = float(np.max(np.abs(u * d['L1'] + v * d['L2'] - base) / np.abs(base)))

    positives = {
        'L1': d['L1'],
        'L2': d['L2'],
        'L1+2uL11': d['L1'] + 2 * u * d['L11'],
        'L2+2vL22': d['L2'] + 2 * v * d['L22'],
    }
    worst_name, worst_value = None, float('inf')
    for name, values in positives.items():
        low = float(np.min(values))
        if low < worst_value:
            worst_name, worst_value = name, low

    # numeric families only reach ~1e-7 on the Euler identity
    euler_tol = tol if family.kind != 'user-table' else 1e-6
    checks = [
        check_record('homogeneity', homogeneity, tol, samples=3 * rays),
        check_record('euler_identity', euler, euler_tol, samples=rays),
        check_record('positivity', max(0.0, -worst_value), 0.0, samples=rays,
                     witness=f"min {worst_name} = {worst_value:.6g}", passed=worst_value > 0),
    ]
    return {'checks': checks, 'passed': all(c['passed'] for c in checks)}


def admissibility_audit(family: NormFamily, split: Tuple[int, int], grid: int = 32) -> Dict:
    """
    Strong convexity on the indicatrix, sampled at grid^2 directions of the
    adapted 2-plane y = cos(t) e_1 + sin(t) e_n.
    """
    n1, n2 = split
    theta = np.linspace(0.0, np.pi / 2, max(grid, 2) ** 2)
    a, b = np.cos(theta), np.sin(theta)
    d = family.partials(a * a, b * b)

    if n1 and n2:
        g11 = d['L1'] + 2 * a * a * d['L11']
        g22 = d['L2'] + 2 * b * b * d['L22']
        g12 = 2 * a * b * d['L12']
        mean = 0.5 * (g11 + g22)
        spread = np.sqrt(0.25 * (g11 - g22) ** 2 + g12 * g12)
        low = mean - spread
    elif n1:
        theta = theta[:1]
        low = np.asarray(d['L1'] + 2 * d['L11'])[:1]
    else:
        theta = theta[-1:]
        low = np.asarray(d['L2'] + 2 * d['L22'])[-1:]
    if n1 > 1:
        low = np.minimum(low, d['L1'] if n2 else d['L1'][:1])
    if n2 > 1:
        low = np.minimum(low, d['L2'] if n1 else d['L2'][-1:])

    low = np.asarray(low, dtype=float)
    at = int(np.argmin(low))
    min_eig = float(low[at])
    return check_record('strong_convexity', max(0.0, -min_eig), 0.0, samples=len(low),
                        witness=f"min eigenvalue {min_eig:.6g} at angle {float(theta[at]):.6g}",
                        passed=bool(min_eig > 0))
