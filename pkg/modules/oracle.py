"""
Brute-force reference computations.

Nothing in here shares code paths with the closed forms in `norms`,
`homogeneous` or `curvature` beyond the bracket and the fundamental tensor
sample itself, so they can be used to test those modules.
"""

import logging
from typing import Callable, Optional

import numpy as np

from modules.errors import AdmissibilityError, DomainError
from modules.lie_core import InnerProduct, LieData, bracket_m, riemannian_nr_residual
from modules.norms import EPS, MinkowskiNorm, f_value, fundamental_tensor
from modules.sampling import random_vectors

logger = logging.getLogger(__name__)

# below this the stencil loses more to roundoff than it gains in truncation
MIN_STEP = 1e-7


def _step(y: np.ndarray, power: float, h: Optional[float]) -> float:
    if h is None:
        h = EPS ** power * max(1.0, float(np.max(np.abs(y))) if y.size else 1.0)
    if h < MIN_STEP:
        logger.warning(f"Finite-difference step {h:.3g} is below {MIN_STEP:.0e}; expect roundoff noise")
    return h


def fd_gradient(f: Callable, y, h: Optional[float] = None) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    y = np.asarray(y, dtype=float)
    h = _step(y, 1.0 / 3.0, h)
    grad = np.zeros(y.shape[0])
    for i in range(y.shape[0]):
        e = np.zeros_like(y)
        e[i] = h
        grad[i] = (f(y + e) - f(y - e)) / (2.0 * h)
    return grad


def fd_hessian(f: Callable, y, h: Optional[float] = None) -> np.ndarray:
    """
    Central-difference Hessian of a scalar function.

    Off-diagonal entries use the four-point stencil, diagonal entries the
    three-point one with doubled step; the result is symmetric by
    construction. The default step is eps^(1/4) scaled by max(1, |y|_inf).
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    h = _step(y, 0.25, h)
    f0 = f(y)
    hess = np.zeros((n, n))
    eye = h * np.eye(n)
    for i in range(n):
        hess[i, i] = (f(y + 2 * eye[i]) - 2 * f0 + f(y - 2 * eye[i])) / (4 * h * h)
        for j in range(i + 1, n):
            val = (f(y + eye[i] + eye[j]) - f(y + eye[i] - eye[j])
                   - f(y - eye[i] + eye[j]) + f(y - eye[i] - eye[j])) / (4 * h * h)
            hess[i, j] = hess[j, i] = val
    return hess


def fundamental_tensor_fd(norm: MinkowskiNorm, y, h: Optional[float] = None) -> np.ndarray:
    """g_y as half the numerical Hessian of F^2."""
    return 0.5 * fd_hessian(lambda z: f_value(norm, z) ** 2, y, h)


def cartan_tensor_fd(norm: MinkowskiNorm, y, h: Optional[float] = None) -> np.ndarray:
    """C_y[i, j, k] = (1/2) d/dt g_{y + t e_k}[i, j], differencing the L-form matrix."""
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    h = _step(y, 1.0 / 3.0, h)
    out = np.zeros((n, n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        plus = fundamental_tensor(norm, y + e).g_matrix
        minus = fundamental_tensor(norm, y - e).g_matrix
        out[:, :, k] = (plus - minus) / (4.0 * h)
    # average over the index permutations; C is totally symmetric
    perms = ('ijk', 'jki', 'kij', 'ikj', 'kji', 'jik')
    return sum(np.einsum(f'ijk->{p}', out) for p in perms) / 6.0


def bi_invariant_sectional(data: LieData, ip: InnerProduct, x, y, tol: float = 1e-9) -> float:
    """
    Sectional curvature (1/4)|[x,y]|^2 / (|x|^2|y|^2 - <x,y>^2) of a
    bi-invariant metric on a Lie group (h = 0).
    """
    if data.dim_h != 0:
        raise DomainError(f"Bi-invariant sectional curvature needs h = 0, got dim h = {data.dim_h}")
    residual, label = riemannian_nr_residual(data, ip)
    if residual > tol:
        raise DomainError(f"Inner product is not bi-invariant (ad({label}) skewness residual {residual:.3g})")

    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    area = ip.dot(x, x) * ip.dot(y, y) - ip.dot(x, y) ** 2
    if area <= 1e-14 * max(ip.dot(x, x) * ip.dot(y, y), 1e-300):
        raise DomainError("Degenerate plane: x and y are linearly dependent")
    xy = bracket_m(data, x, y)
    return 0.25 * ip.dot(xy, xy) / area


def spray_bruteforce(space, y, seed: int = 0) -> np.ndarray:
    """
    Solve g_y(eta, u) = g_y(y, [u, y]_m) with u running over a random frame
    instead of the basis.

    `space` is anything with `data` and `norm` attributes.
    """
    y = np.asarray(y, dtype=float)
    data, norm = space.data, space.norm
    g = fundamental_tensor(norm, y).g_matrix
    n = y.shape[0]

    frame = random_vectors(n, n, seed)
    if abs(np.linalg.det(frame)) < 1e-8:
        frame = frame + np.eye(n)

    rows = frame @ g
    rhs = np.array([y @ g @ bracket_m(data, u, y) for u in frame])
    try:
        return np.linalg.solve(rows, rhs)
    except np.linalg.LinAlgError as e:
        raise AdmissibilityError(f"Spray system is singular at y = {y.tolist()}", y=y) from e
