"""K-D tree nearest-neighbour index over a fixed point cloud.

Wraps ``scipy.spatial.cKDTree`` and adds the tie-break contract the rest of
the pipeline relies on: equidistant neighbours are returned in insertion
order, so queries are exactly reproducible against a brute-force sort.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .cloud import PointCloud


class KdIndex:
    """Immutable k-NN index in 3D, or 2D over (x, y) when ``dims=2``."""

    def __init__(self, cloud: PointCloud, dims: int = 3):
        if len(cloud) == 0:
            raise ValueError("cannot index an empty cloud")
        if dims not in (2, 3):
            raise ValueError(f"dims must be 2 or 3, got {dims}")
        self.dims = dims
        self._coords = np.ascontiguousarray(cloud.xyz[:, :dims])
        self._tree = cKDTree(self._coords)

    def __len__(self) -> int:
        return len(self._coords)

    def knn(self, query, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Distances and indices of the k nearest points, ascending.

        Ties are broken by insertion order. Accepts one query point or an
        (M, dims) batch; returns (k,)/(M, k) arrays accordingly.
        """
        q = np.atleast_2d(np.asarray(query, dtype=np.float64))[:, : self.dims]
        single = np.asarray(query).ndim == 1
        if k < 1:
            raise ValueError("k must be >= 1")
        if k > len(self):
            raise ValueError(f"k={k} exceeds index size {len(self)}")
        dist, idx = self._tree.query(q, k=k)
        dist = dist.reshape(len(q), k)
        idx = idx.reshape(len(q), k)
        for row in range(len(q)):
            dist[row], idx[row] = self._tie_break(q[row], dist[row], idx[row], k)
        if single:
            return dist[0], idx[0]
        return dist, idx

    def _tie_break(self, q, dist, idx, k):
        # Re-query the boundary radius only when a tie could straddle the
        # cutoff, then order candidates by (distance, insertion index).
        r = dist[-1]
        candidates = np.asarray(self._tree.query_ball_point(q, r * (1 + 1e-12) + 1e-300), dtype=np.intp)
        if len(candidates) <= k and len(np.unique(dist)) == k:
            order = np.lexsort((idx, dist))
            return dist[order], idx[order]
        diffs = self._coords[candidates] - q
        d2 = np.einsum("ij,ij->i", diffs, diffs)
        order = np.lexsort((candidates, d2))[:k]
        return np.sqrt(d2[order]), candidates[order]

    def nearest(self, queries) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized 1-NN for query batches (no tie-break pass).

        Used on the hot path (label upsampling, DEM cell lookup) where any
        member of a tie carries identical information.
        """
        q = np.atleast_2d(np.asarray(queries, dtype=np.float64))[:, : self.dims]
        dist, idx = self._tree.query(q, k=1)
        return dist, idx

    def ball(self, query, radius: float) -> list:
        """Indices within ``radius`` of the query point(s)."""
        q = np.asarray(query, dtype=np.float64)
        return self._tree.query_ball_point(q[..., : self.dims], radius)


def build_kdindex(cloud: PointCloud, dims: int = 3) -> KdIndex:
    return KdIndex(cloud, dims=dims)


def knn(index: KdIndex, query, k: int) -> tuple[np.ndarray, np.ndarray]:
    return index.knn(query, k)
