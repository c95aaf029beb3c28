"""
Density-based clustering of landmarks.

Core points have at least min_pts points (themselves included) within eps;
clusters are the connected components of the core-point eps-graph. A border
point joins the cluster of its nearest core neighbour, which makes labels
independent of input order. Clusters are numbered by their smallest member index.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from src.domain.entities.counting import Cluster, ClusterReport, Landmark


def cluster_points(points: np.ndarray, eps: float, min_pts: int = 1) -> np.ndarray:
    """DBSCAN labels for points (N, 3); -1 marks noise."""
    if not eps > 0:
        raise ValueError(f"eps must be > 0, got {eps!r}")
    if min_pts < 1:
        raise ValueError(f"min_pts must be >= 1, got {min_pts!r}")
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = pts.shape[0]
    labels = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return labels

    tree = cKDTree(pts)
    neighbors = tree.query_ball_point(pts, eps)
    core = np.array([len(nb) >= min_pts for nb in neighbors])

    rows, cols = [], []
    for i in np.flatnonzero(core):
        for j in neighbors[i]:
            if core[j]:
                rows.append(i)
                cols.append(j)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    _, component = connected_components(graph, directed=False)
    labels[core] = component[core]

    for i in np.flatnonzero(~core):
        core_nb = [j for j in neighbors[i] if core[j]]
        if core_nb:
            nearest = min(core_nb, key=lambda j: (float(np.linalg.norm(pts[j] - pts[i])), j))
            labels[i] = component[nearest]

    remap: dict[int, int] = {}
    for i in range(n):
        if labels[i] >= 0 and labels[i] not in remap:
            remap[int(labels[i])] = len(remap)
    return np.array([remap[int(l)] if l >= 0 else -1 for l in labels], dtype=np.int64)


def cluster_landmarks(landmarks: Sequence[Landmark], eps: float, min_pts: int = 1) -> ClusterReport:
    points = np.array([lm.position for lm in landmarks]).reshape(-1, 3)
    labels = cluster_points(points, eps, min_pts)
    n_clusters = int(labels.max()) + 1 if labels.size else 0
    clusters = tuple(
        Cluster(tuple(int(i) for i in np.flatnonzero(labels == k)), points[labels == k].mean(axis=0))
        for k in range(n_clusters)
    )
    noise = tuple(int(i) for i in np.flatnonzero(labels < 0))
    return ClusterReport(clusters, noise, labels)
