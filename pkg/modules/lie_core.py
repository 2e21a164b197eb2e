"""
Lie-algebraic input of a coset space G/H with a reductive decomposition
g = h + m1 + m2 and an inner product on m = m1 + m2.

Basis ordering is always (h | m1 | m2). Structure constants c_ij^k of
[e_i, e_j] = c_ij^k e_k are stored sparsely with i < j; the dense tensor is
built on demand.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from modules.errors import DomainError

logger = logging.getLogger(__name__)

PARTS = ('h', 'm', 'm1', 'm2', 'g')

Triple = Tuple[int, int, int, float]


def check_record(name: str, residual: float, tolerance: float,
                 samples: int = 0, witness=None, passed: Optional[bool] = None) -> Dict:
    """Uniform record used by every audit and check in the package."""
    residual = float(residual)
    if passed is None:
        passed = bool(residual <= tolerance)
    return {
        'name': name,
        'residual': residual,
        'tolerance': float(tolerance),
        'passed': bool(passed),
        'samples': int(samples),
        'witness': witness,
    }


@dataclass(frozen=True)
class LieData:
    dim_h: int
    dim_m1: int
    dim_m2: int
    structure: Tuple[Triple, ...]
    labels: Tuple[str, ...] = ()
    # (i, j, k, |c_ij^k + c_ji^k|) for inconsistent input pairs and nonzero c_ii^k
    antisymmetry_defects: Tuple[Triple, ...] = field(default=(), compare=False)

    @classmethod
    def from_triples(cls, dim_h: int, dim_m1: int, dim_m2: int,
                     triples: Iterable[Sequence], labels: Optional[Sequence[str]] = None) -> 'LieData':
        dims = (int(dim_h), int(dim_m1), int(dim_m2))
        if min(dims) < 0:
            raise DomainError(f"Negative block dimension in {dims}")
        total = sum(dims)

        canonical: Dict[Tuple[int, int, int], float] = {}
        given: Dict[Tuple[int, int, int], float] = {}
        defects: List[Triple] = []
        for entry in triples:
            if len(entry) != 4:
                raise DomainError(f"Structure entry {list(entry)} is not [i, j, k, value]")
            i, j, k = (int(entry[0]), int(entry[1]), int(entry[2]))
            value = float(entry[3])
            if not all(0 <= idx < total for idx in (i, j, k)):
                raise DomainError(f"Structure entry {list(entry)} has an index outside 0..{total - 1}")
            if value == 0.0:
                continue
            if i == j:
                defects.append((i, j, k, abs(value)))
                continue
            if (i, j, k) in given:
                # repeated triple: keep the first value, a conflicting repeat is a defect
                logger.warning(f"Structure triple ({i}, {j}, {k}) given more than once")
                defects.append((i, j, k, abs(value - given[(i, j, k)])))
                continue
            given[(i, j, k)] = value

        for (i, j, k), value in given.items():
            if i < j:
                canonical[(i, j, k)] = value
                mirror = given.get((j, i, k))
                if mirror is not None and mirror != -value:
                    defects.append((i, j, k, abs(value + mirror)))
            elif (j, i, k) not in given:
                canonical[(j, i, k)] = -value

        structure = tuple(sorted((i, j, k, v) for (i, j, k), v in canonical.items() if v != 0.0))
        if labels is None:
            labels = default_labels(*dims)
        labels = tuple(str(label) for label in labels)
        if len(labels) != total:
            raise DomainError(f"Expected {total} basis labels, got {len(labels)}")
        return cls(dims[0], dims[1], dims[2], structure, labels, tuple(defects))

    @property
    def dim(self) -> int:
        return self.dim_h + self.dim_m1 + self.dim_m2

    @property
    def dim_m(self) -> int:
        return self.dim_m1 + self.dim_m2

    @cached_property
    def tensor(self) -> np.ndarray:
        """Dense c[i, j, k], antisymmetric in (i, j)."""
        c = np.zeros((self.dim, self.dim, self.dim))
        for i, j, k, value in self.structure:
            c[i, j, k] = value
            c[j, i, k] = -value
        c.setflags(write=False)
        return c

    def index_block(self, part: str) -> np.ndarray:
        h, n1, n2 = self.dim_h, self.dim_m1, self.dim_m2
        blocks = {
            'h': np.arange(0, h),
            'm1': np.arange(h, h + n1),
            'm2': np.arange(h + n1, h + n1 + n2),
            'm': np.arange(h, h + n1 + n2),
            'g': np.arange(0, h + n1 + n2),
        }
        if part not in blocks:
            raise DomainError(f"Unknown block '{part}', expected one of {PARTS}")
        return blocks[part]

    def m_mask(self, part: str) -> np.ndarray:
        """Boolean mask over m-coordinates selecting m1 or m2."""
        mask = np.zeros(self.dim_m, dtype=bool)
        if part == 'm1':
            mask[:self.dim_m1] = True
        elif part == 'm2':
            mask[self.dim_m1:] = True
        elif part == 'm':
            mask[:] = True
        else:
            raise DomainError(f"Unknown m-block '{part}'")
        return mask

    def embed_m(self, v) -> np.ndarray:
        """Lift an m-vector to a g-vector (zero h-part)."""
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.dim_m:
            raise DomainError(f"Expected an m-vector of length {self.dim_m}, got {v.shape[-1]}")
        out = np.zeros(v.shape[:-1] + (self.dim,))
        out[..., self.dim_h:] = v
        return out

    def as_g(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape[-1] == self.dim:
            return v
        if v.shape[-1] == self.dim_m:
            return self.embed_m(v)
        raise DomainError(f"Vector of length {v.shape[-1]} fits neither g ({self.dim}) nor m ({self.dim_m})")


def default_labels(dim_h: int, dim_m1: int, dim_m2: int) -> Tuple[str, ...]:
    return (tuple(f"h{i + 1}" for i in range(dim_h))
            + tuple(f"a{i + 1}" for i in range(dim_m1))
            + tuple(f"b{i + 1}" for i in range(dim_m2)))


@dataclass(frozen=True, eq=False)
class InnerProduct:
    gram: np.ndarray

    def __post_init__(self):
        gram = np.array(self.gram, dtype=float)
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
            raise DomainError(f"Gram matrix must be square, got shape {gram.shape}")
        gram.setflags(write=False)
        object.__setattr__(self, 'gram', gram)

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    def dot(self, u, v) -> float:
        return float(np.asarray(u) @ self.gram @ np.asarray(v))

    def norm(self, v) -> float:
        return float(np.sqrt(max(self.dot(v, v), 0.0)))

    def block(self, mask: np.ndarray) -> np.ndarray:
        """Gram of one block as a full n x n matrix, zero outside the block."""
        keep = np.outer(mask, mask)
        return np.where(keep, self.gram, 0.0)


def bracket(data: LieData, u, v) -> np.ndarray:
    """[u, v] over the full basis; u and v may be m-vectors or g-vectors."""
    u = data.as_g(u)
    v = data.as_g(v)
    if u.shape != v.shape:
        raise DomainError(f"Dimension mismatch in bracket: {u.shape} vs {v.shape}")
    return np.einsum('i,j,ijk->k', u, v, data.tensor)


def project(data: LieData, v, part: str) -> np.ndarray:
    """
    Coordinate projection onto a block, in the coordinates of the input.

    A g-vector stays a g-vector and an m-vector stays an m-vector; the
    coordinates outside `part` are zeroed, so project(v, 'h') + project(v, 'm') == v.
    """
    v = np.asarray(v, dtype=float)
    if v.shape[-1] == data.dim:
        keep = np.zeros(data.dim, dtype=bool)
        keep[data.index_block(part)] = True
    elif v.shape[-1] == data.dim_m:
        keep = np.zeros(data.dim_m, dtype=bool) if part == 'h' else (
            np.ones(data.dim_m, dtype=bool) if part == 'g' else data.m_mask(part))
    else:
        raise DomainError(f"Vector of length {v.shape[-1]} fits neither g ({data.dim}) nor m ({data.dim_m})")
    return np.where(keep, v, 0.0)


def m_coords(data: LieData, v) -> np.ndarray:
    """The m-coordinates of a g-vector."""
    return data.as_g(v)[..., data.dim_h:].copy()


def bracket_m(data: LieData, u, v) -> np.ndarray:
    """[u, v]_m as an m-vector."""
    return m_coords(data, bracket(data, u, v))


def ad_matrix(data: LieData, x, part: str = 'm') -> np.ndarray:
    """
    Matrix of u -> [x, u]_part for u in m, columns indexed by the m-basis.

    `part` selects the projection of the result ('m', 'm1', 'm2').
    """
    x = data.as_g(x)
    full = np.einsum('i,ijk->kj', x, data.tensor)  # full[k, j] = coefficient of e_k in [x, e_j]
    cols = full[:, data.dim_h:]
    rows = cols[data.dim_h:, :]
    if part == 'm':
        return rows
    return np.where(data.m_mask(part)[:, None], rows, 0.0)


def skew_residual(gram: np.ndarray, a: np.ndarray) -> float:
    """max |<A u, v> + <u, A v>| over basis vectors."""
    return float(np.max(np.abs(gram @ a + a.T @ gram))) if a.size else 0.0


def riemannian_nr_residual(data: LieData, ip: InnerProduct,
                           gram: Optional[np.ndarray] = None) -> Tuple[float, Optional[str]]:
    """
    Skewness of ad_m(x)|_m for every basis x in m.

    This is the Riemannian natural-reductiveness condition
    <x, [z, y]_m> + <[z, x]_m, y> = 0. Returns (residual, worst label).
    """
    gram = ip.gram if gram is None else gram
    worst, label = 0.0, None
    for pos, idx in enumerate(data.index_block('m')):
        basis = np.zeros(data.dim)
        basis[idx] = 1.0
        res = skew_residual(gram, ad_matrix(data, basis, 'm'))
        if res > worst:
            worst, label = res, data.labels[idx]
    return worst, label


def jacobi_residual(data: LieData) -> Tuple[float, Optional[Tuple[int, int, int]]]:
    """Largest |sum_cyc c_ij^l c_lk^m| over basis triples, with the worst triple."""
    c = data.tensor
    if data.dim == 0:
        return 0.0, None
    # J[i, j, k, m] = [[e_i, e_j], e_k] + cyclic
    term = np.einsum('ijl,lkm->ijkm', c, c)
    jac = term + term.transpose(1, 2, 0, 3) + term.transpose(2, 0, 1, 3)
    mags = np.max(np.abs(jac), axis=3)
    flat = int(np.argmax(mags))
    worst = float(mags.flat[flat])
    if worst == 0.0:
        return 0.0, None
    return worst, tuple(int(t) for t in np.unravel_index(flat, mags.shape))


def audit(data: LieData, ip: InnerProduct, tol: float = 1e-9) -> Dict:
    """
    Check every algebraic precondition of the construction.

    Never raises for a failed invariant: the report lists one record per
    invariant and `passed` is the conjunction.
    """
    checks = []
    c = data.tensor
    h, m1, m2, m = (data.index_block(p) for p in ('h', 'm1', 'm2', 'm'))

    if ip.dim != data.dim_m:
        checks.append(check_record('gram_shape', float('inf'), tol,
                                   witness=f"gram is {ip.dim}x{ip.dim}, m has dimension {data.dim_m}"))
        return {'checks': checks, 'passed': False}

    anti = max((d[3] for d in data.antisymmetry_defects), default=0.0)
    anti_witness = None
    if data.antisymmetry_defects:
        worst = max(data.antisymmetry_defects, key=lambda d: d[3])
        anti_witness = [int(worst[0]), int(worst[1]), int(worst[2])]
    checks.append(check_record('antisymmetry', anti, tol, witness=anti_witness))

    jac, triple = jacobi_residual(data)
    checks.append(check_record('jacobi', jac, tol, witness=list(triple) if triple else None))

    checks.append(block_residual('h_subalgebra', c, h, h, m, tol, data.labels))
    checks.append(block_residual('reductive', c, h, m, h, tol, data.labels))
    checks.append(block_residual('split_invariance_m1', c, h, m1, m2, tol, data.labels))
    checks.append(block_residual('split_invariance_m2', c, h, m2, m1, tol, data.labels))

    gram = ip.gram
    sym = float(np.max(np.abs(gram - gram.T))) if gram.size else 0.0
    checks.append(check_record('gram_symmetric', sym, tol))

    min_eig = float(np.min(np.linalg.eigvalsh((gram + gram.T) / 2))) if gram.size else 1.0
    checks.append(check_record('positive_definite', max(0.0, -min_eig), 0.0,
                               witness=f"min eigenvalue {min_eig:.6g}", passed=min_eig > 0))

    n1 = data.dim_m1
    cross = float(np.max(np.abs(gram[:n1, n1:]))) if n1 and data.dim_m2 else 0.0
    checks.append(check_record('block_orthogonal', cross, tol))

    worst, label = 0.0, None
    for idx in h:
        basis = np.zeros(data.dim)
        basis[idx] = 1.0
        res = skew_residual(gram, ad_matrix(data, basis, 'm'))
        if res > worst:
            worst, label = res, data.labels[idx]
    checks.append(check_record('ad_h_invariance', worst, tol, witness=label))

    passed = all(item['passed'] for item in checks)
    if not passed:
        failed = [item['name'] for item in checks if not item['passed']]
        logger.info(f"Audit failed: {', '.join(failed)}")
    return {'checks': checks, 'passed': passed}


def block_residual(name, c, first, second, forbidden, tol, labels):
    """max |c_ij^k| for i in first, j in second, k in forbidden."""
    if len(first) == 0 or len(second) == 0 or len(forbidden) == 0:
        return check_record(name, 0.0, tol)
    sub = c[np.ix_(first, second, forbidden)]
    flat = int(np.argmax(np.abs(sub)))
    worst = float(np.abs(sub).flat[flat])
    witness = None
    if worst > 0:
        a, b, k = np.unravel_index(flat, sub.shape)
        witness = [labels[first[a]], labels[second[b]], labels[forbidden[k]]]
    return check_record(name, worst, tol, witness=witness)
