"""
Seeded direction sampling for the "sampled for all y" checks.

Directions come from a scrambled Halton sequence pushed through the inverse
normal CDF, which gives a low-discrepancy, rotation-friendly cloud on the
sphere. Everything here is deterministic given the seed.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional

import numpy as np
from scipy.stats import norm, qmc

logger = logging.getLogger(__name__)

_CLIP = 1e-12


def gaussian_cloud(dim: int, count: int, seed: int) -> np.ndarray:
    """Quasi-random standard normal samples, shape (count, dim)."""
    if dim <= 0 or count <= 0:
        return np.zeros((max(count, 0), max(dim, 0)))
    engine = qmc.Halton(d=dim, scramble=True, seed=seed)
    points = np.clip(engine.random(count), _CLIP, 1.0 - _CLIP)
    return norm.ppf(points)


def sphere_directions(gram: np.ndarray, count: int, seed: int,
                      mask: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Unit vectors for the inner product `gram`, one per row.

    When `mask` is given only the masked coordinates are sampled (the rest are
    zero), which is how directions inside m1 or m2 are produced.
    """
    gram = np.asarray(gram, dtype=float)
    n = gram.shape[0]
    idx = np.arange(n) if mask is None else np.flatnonzero(mask)
    raw = np.zeros((count, n))
    cloud = gaussian_cloud(len(idx), count, seed)
    raw[:, idx] = cloud

    norms = np.sqrt(np.einsum('ri,ij,rj->r', raw, gram, raw))
    bad = norms < 1e-14
    if np.any(bad):
        # a degenerate quasi-random point is replaced by the first basis direction of the block
        raw[bad] = 0.0
        raw[bad, idx[0]] = 1.0
        norms[bad] = np.sqrt(gram[idx[0], idx[0]])
    return raw / norms[:, None]


def random_vectors(dim: int, count: int, seed: int) -> np.ndarray:
    """Plain pseudo-random Gaussian vectors for frames and flags."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal((count, dim))


def ordered_map(fn: Callable, items: Iterable, workers: int = 1) -> List:
    """
    Map `fn` over `items`, optionally on a thread pool.

    Results keep the input order, so reductions over them do not depend on
    worker scheduling.
    """
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    logger.debug(f"Mapping {len(items)} items over {workers} workers")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
