"""Support-surface extraction: upward-vertex filtering and density clustering.

Placement only considers surfaces parallel to the ground, so vertices whose
normals do not point roofward are discarded, leaving cavities wherever the
surface is unusable. The survivors are grouped by DBSCAN so each horizontal
surface (table top, shelf, seat) becomes its own cluster.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from sceneedit.config import FilterConfig
from sceneedit.errors import NoSupportSurface
from sceneedit.mesh.core import TriangleMesh
from sceneedit.mesh.sdf import SignedDistanceField

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SupportCluster:
    """One horizontal surface patch: member vertices share nearly one height."""

    vertex_ids: np.ndarray   # indices into the grounding submesh
    points: np.ndarray       # (k, 3) positions of those vertices
    z_level: float           # mean height, meters

    def __len__(self) -> int:
        return len(self.vertex_ids)


def filter_up_vertices(grounding: TriangleMesh, cfg: FilterConfig) -> np.ndarray:
    """Vertex ids whose normals lie within the up-angle tolerance of +Z."""
    if grounding.vertex_normals is None:
        raise ValueError("grounding mesh needs vertex normals; run compute_vertex_normals")
    nz = grounding.vertex_normals[:, 2]
    norms_ok = ~np.isnan(nz)
    keep = np.zeros(len(nz), dtype=bool)
    keep[norms_ok] = nz[norms_ok] >= cfg.up_cos_tolerance
    ids = np.flatnonzero(keep)
    if ids.size == 0:
        raise NoSupportSurface("no vertex normal points upward within tolerance")
    return ids


def auto_eps(points: np.ndarray, min_pts: int = 10) -> float:
    """Neighborhood radius for DBSCAN: twice the median nearest-neighbour
    spacing, floored by the median distance to the (min_pts-1)th neighbour.

    The floor keeps the radius usable on uniformly sampled surfaces, where
    a plain 2x-spacing ball holds only ~9 points and min_pts = 10 would
    otherwise declare every vertex noise.
    """
    if len(points) < 2:
        return 0.05
    tree = cKDTree(points)
    k = min(min_pts, len(points))
    dists, _ = tree.query(points, k=k)
    spacing = float(np.median(dists[:, 1]))
    kth = float(np.median(dists[:, -1]))
    eps = max(2.0 * spacing, 1.05 * kth)
    return eps if eps > 0 else 0.05


def cluster_support(points: np.ndarray, cfg: FilterConfig) -> list[SupportCluster]:
    """DBSCAN over the filtered vertices; noise discarded, clusters sorted
    by descending size (ties by smallest member id)."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(points) == 0:
        raise NoSupportSurface("no points to cluster")
    eps = cfg.dbscan_eps if cfg.dbscan_eps is not None else auto_eps(points, cfg.dbscan_min_pts)
    labels = _dbscan(points, eps, cfg.dbscan_min_pts)
    clusters = []
    for label in range(labels.max() + 1 if labels.size else 0):
        ids = np.flatnonzero(labels == label)
        if ids.size < cfg.dbscan_min_pts:
            continue  # border points claimed elsewhere can shrink a cluster
        pts = points[ids]
        clusters.append(SupportCluster(ids, pts, float(pts[:, 2].mean())))
    if not clusters:
        raise NoSupportSurface(
            f"DBSCAN(eps={eps:.4g}, min_pts={cfg.dbscan_min_pts}) left only noise"
        )
    clusters.sort(key=lambda c: (-len(c), int(c.vertex_ids[0])))
    return clusters


def _dbscan(points: np.ndarray, eps: float, min_pts: int) -> np.ndarray:
    """Classic DBSCAN; the point itself counts toward min_pts. Returns labels,
    -1 for noise."""
    n = len(points)
    tree = cKDTree(points)
    neighborhoods = tree.query_ball_point(points, r=eps)
    labels = np.full(n, -2, dtype=np.int64)  # -2 unvisited, -1 noise
    cluster = -1
    for seed in range(n):
        if labels[seed] != -2:
            continue
        if len(neighborhoods[seed]) < min_pts:
            labels[seed] = -1
            continue
        cluster += 1
        labels[seed] = cluster
        frontier = list(neighborhoods[seed])
        while frontier:
            q = frontier.pop()
            if labels[q] == -1:
                labels[q] = cluster  # noise becomes a border point
            if labels[q] != -2:
                continue
            labels[q] = cluster
            if len(neighborhoods[q]) >= min_pts:
                frontier.extend(neighborhoods[q])
    labels[labels == -2] = -1
    return labels


def mask_covered_vertices(
    submesh: TriangleMesh,
    vertex_ids: np.ndarray,
    scene_sdf: SignedDistanceField,
    probe_height: float,
) -> np.ndarray:
    """Drop filtered vertices with other geometry in the space above them.

    A probe point one ``probe_height`` above the vertex should see nothing
    closer than the supporting surface itself; if it does, the spot is
    covered (clutter, an overhang, a previously inserted object) and is
    removed exactly like the occlusion cavities in scanned scenes.
    """
    if vertex_ids.size == 0:
        return vertex_ids
    probes = submesh.vertices[vertex_ids] + np.array([0.0, 0.0, probe_height])
    dist = scene_sdf.query(probes)
    open_above = dist >= 0.98 * probe_height
    kept = vertex_ids[open_above]
    if kept.size < vertex_ids.size:
        logger.debug(
            "coverage probe removed %d of %d support vertices",
            vertex_ids.size - kept.size, vertex_ids.size,
        )
    return kept
