"""Small shared helpers: input coercion, seeded RNG streams, nearest-anchor search."""

from __future__ import annotations

import numpy as np

# Elements per chunk when scanning anchors for nearest neighbors; bounds the
# size of the temporary distance block.
_CHUNK_ELEMENTS = 4_000_000


def as_sample(points) -> np.ndarray:
    """Coerce input to an (N, D) float64 matrix; 1-D input becomes a column."""
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] == 0 or x.shape[1] == 0:
        raise ValueError("sample must be a non-empty N x D matrix")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample contains non-finite values")
    return x


def as_points(x, d: int) -> tuple[np.ndarray, bool]:
    """Coerce query input to an (M, d) array.

    Returns the array and a flag telling whether the input was a single point
    (so callers can unwrap scalar results).  For d == 1 a 1-D array is read as
    M separate points; for d > 1 a 1-D array of length d is a single point.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        if d != 1:
            raise ValueError(f"scalar query point but sample dimension is {d}")
        return arr.reshape(1, 1), True
    if arr.ndim == 1:
        if d == 1:
            return arr.reshape(-1, 1), False
        if arr.shape[0] != d:
            raise ValueError(f"query point has {arr.shape[0]} coordinates, expected {d}")
        return arr.reshape(1, d), True
    if arr.ndim != 2 or arr.shape[1] != d:
        raise ValueError(f"query points must have shape (M, {d})")
    return arr, False


def rng_from_seed(seed: int) -> np.random.Generator:
    """Counter-based generator: (seed, draw index) fully determines each draw."""
    return np.random.Generator(np.random.Philox(key=int(seed) % (1 << 128)))


def derive_seed(seed: int, *path: int) -> int:
    """Derive an independent child seed from a base seed and an integer path."""
    ss = np.random.SeedSequence(
        entropy=int(seed) % (1 << 128), spawn_key=tuple(int(p) for p in path)
    )
    out = 0
    for word in ss.generate_state(4, np.uint32):
        out = (out << 32) | int(word)
    return out


def nearest_anchor_indices(points: np.ndarray, anchors: np.ndarray) -> np.ndarray:
    """Index of the closest anchor for each point, ties broken by lowest index."""
    from scipy.spatial.distance import cdist

    m = points.shape[0]
    if m == 0:
        return np.empty(0, dtype=np.intp)
    rows = max(1, _CHUNK_ELEMENTS // max(1, anchors.shape[0]))
    idx = np.empty(m, dtype=np.intp)
    for start in range(0, m, rows):
        block = cdist(points[start : start + rows], anchors)
        idx[start : start + rows] = np.argmin(block, axis=1)
    return idx
