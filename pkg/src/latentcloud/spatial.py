"""Exact nearest-neighbor queries over a fixed point cloud.

The kd-tree here is not approximate: a query returns exactly what a
brute-force scan would, including the tie rule (equal distances resolve
to the smallest point index). That makes the tree interchangeable with
the vectorized brute-force path used for small clouds.
"""

import numpy as np

from .errors import DimensionError
from .validation import as_point_cloud


class _Node:
    __slots__ = ("axis", "threshold", "left", "right", "indices")

    def __init__(self, axis=-1, threshold=0.0, left=None, right=None, indices=None):
        self.axis = axis
        self.threshold = threshold
        self.left = left
        self.right = right
        self.indices = indices  # leaf only


class KdTree:
    """Static 3-d tree over a point cloud; safe for concurrent queries."""

    def __init__(self, points, leaf_size=16):
        self.points = as_point_cloud(points, name="points")
        self.leaf_size = max(1, int(leaf_size))
        self._root = self._build(np.arange(self.points.shape[0]))

    def _build(self, indices):
        pts = self.points[indices]
        if indices.shape[0] <= self.leaf_size:
            # keep leaf indices sorted so ties naturally hit the smaller one first
            return _Node(indices=np.sort(indices))
        spans = pts.max(axis=0) - pts.min(axis=0)
        axis = int(np.argmax(spans))
        if spans[axis] == 0.0:
            # all points coincide; no split can make progress
            return _Node(indices=np.sort(indices))
        order = np.argsort(pts[:, axis], kind="stable")
        mid = indices.shape[0] // 2
        threshold = float(pts[order[mid], axis])
        left_mask = pts[:, axis] < threshold
        if not left_mask.any() or left_mask.all():
            # degenerate split (median equals min or max); fall back to <=
            left_mask = pts[:, axis] <= threshold
            if left_mask.all():
                return _Node(indices=np.sort(indices))
        return _Node(
            axis=axis,
            threshold=threshold,
            left=self._build(indices[left_mask]),
            right=self._build(indices[~left_mask]),
        )

    def query(self, point):
        """Nearest stored point to ``point``: returns (index, squared distance).

        Equal distances resolve to the smallest index, exactly matching a
        brute-force argmin.
        """
        q = np.asarray(point, dtype=np.float64)
        if q.shape != (3,):
            raise DimensionError(f"query point must have shape (3,), got {q.shape}")
        best = [np.inf, -1]
        self._search(self._root, q, best)
        return best[1], best[0]

    def _search(self, node, q, best):
        if node.indices is not None:
            diffs = self.points[node.indices] - q
            d2 = np.einsum("ij,ij->i", diffs, diffs)
            for idx, dist in zip(node.indices, d2):
                if dist < best[0] or (dist == best[0] and idx < best[1]):
                    best[0] = dist
                    best[1] = int(idx)
            return
        delta = q[node.axis] - node.threshold
        near, far = (node.right, node.left) if delta >= 0 else (node.left, node.right)
        self._search(near, q, best)
        # an equal-distance point with a smaller index may sit on the far
        # side, so prune only on a strict distance excess
        if delta * delta <= best[0]:
            self._search(far, q, best)


def brute_force_nearest(points, query):
    """Reference scan: (index, squared distance) with smallest-index ties."""
    points = np.asarray(points, dtype=np.float64)
    q = np.asarray(query, dtype=np.float64)
    diffs = points - q
    d2 = np.einsum("ij,ij->i", diffs, diffs)
    idx = int(np.argmin(d2))
    return idx, float(d2[idx])


def build_index(cloud, leaf_size=16):
    """Build a KdTree over a validated point cloud."""
    return KdTree(cloud, leaf_size=leaf_size)


def nearest(index, query_point):
    """Nearest neighbor via a built index: (point index, squared distance)."""
    return index.query(query_point)
