"""Location finder: pick the placement point on the grounding surface.

For every support cluster (largest first) the occupancy hierarchy is run to
exhaustion; among the occupied cells of the deepest surviving grid, the one
farthest (Chebyshev) from any empty level-0 cell wins, which prefers spots
away from clutter and surface borders. The winning cell index maps to world
coordinates through ``level_cell_center``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from sceneedit.config import FilterConfig
from sceneedit.errors import ClusterTooSmall, NoFeasibleLocation, NoSupportSurface
from sceneedit.mesh.core import TriangleMesh
from sceneedit.placement.support import SupportCluster, cluster_support, filter_up_vertices
from sceneedit.placement.voxelgrid import VoxelGrid, build_voxel_grid, hierarchy

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PlacementResult:
    """Placement decision plus enough trace to audit it."""

    location: np.ndarray                     # (3,) meters
    levels: int = 0                          # hierarchy depth reached
    chosen_cluster: SupportCluster | None = None
    rotation_z: float | None = None          # radians; None until refined
    penetration_before: float | None = None
    penetration_after: float | None = None
    candidate_trace: tuple[VoxelGrid, ...] = ()
    cell_index: tuple[int, int] = (0, 0)     # (x_id, y_id) in the final grid

    def __post_init__(self):
        loc = np.array(self.location, dtype=np.float64).reshape(3)
        loc.flags.writeable = False
        object.__setattr__(self, "location", loc)

    def trace_json(self) -> list[dict]:
        return [g.to_json() for g in self.candidate_trace]

    def summary(self) -> dict:
        return {
            "location": [float(x) for x in self.location],
            "levels": int(self.levels),
            "cell_index": [int(self.cell_index[0]), int(self.cell_index[1])],
            "rotation_z": None if self.rotation_z is None else float(self.rotation_z),
            "penetration_before": self.penetration_before,
            "penetration_after": self.penetration_after,
        }


def level_cell_center(
    origin: tuple[float, float], cell_size: float, levels: int, x_id: int, y_id: int
) -> tuple[float, float]:
    """World XY of final-grid cell (x_id, y_id) after ``levels`` filter passes."""
    x = origin[0] + (x_id + levels - 0.5) * cell_size
    y = origin[1] + (y_id + levels - 0.5) * cell_size
    return x, y


def _point_clearance(ux: float, uy: float, zeros: np.ndarray, shape: tuple[int, int]) -> float:
    """Chebyshev distance (in cell units) from a continuous level-0 point to
    the nearest empty cell, counting everything outside the grid as empty."""
    m0, n0 = shape
    clearance = min(ux, m0 - ux, uy, n0 - uy)
    if len(zeros):
        dx = np.maximum(np.maximum(zeros[:, 0] - ux, ux - zeros[:, 0] - 1.0), 0.0)
        dy = np.maximum(np.maximum(zeros[:, 1] - uy, uy - zeros[:, 1] - 1.0), 0.0)
        clearance = min(clearance, float(np.min(np.maximum(dx, dy))))
    return clearance


def _pick_cell(
    final: VoxelGrid, level0: VoxelGrid, levels: int, n: int, cluster: SupportCluster
) -> tuple[int, int]:
    """Among occupied final-grid cells: the one whose mapped point is farthest
    (Chebyshev) from empty level-0 cells, preferring points inside the
    cluster footprint, then row-major order."""
    zeros = np.argwhere(level0.occupancy == 0)
    cells = np.argwhere(final.occupancy == 1)
    lo = cluster.points[:, :2].min(axis=0)
    hi = cluster.points[:, :2].max(axis=0)
    best = None
    best_key = None
    for x_id, y_id in cells:
        ux = x_id + levels - 0.5   # continuous level-0 position, cell units
        uy = y_id + levels - 0.5
        score = _point_clearance(ux, uy, zeros, level0.shape)
        x, y = level_cell_center(final.origin, final.cell_size, levels, int(x_id), int(y_id))
        inside = lo[0] <= x <= hi[0] and lo[1] <= y <= hi[1]
        key = (-int(inside), -score, int(x_id), int(y_id))
        if best_key is None or key < best_key:
            best_key = key
            best = (int(x_id), int(y_id))
    assert best is not None
    return best


def support_height(cluster: SupportCluster, x: float, y: float, k: int) -> float:
    """Mean Z of the k cluster vertices nearest to (x, y) in the plane."""
    k = min(k, len(cluster.points))
    tree = cKDTree(cluster.points[:, :2])
    _, idx = tree.query([x, y], k=k)
    idx = np.atleast_1d(idx)
    return float(cluster.points[idx, 2].mean())


def find_location(
    grounding: TriangleMesh,
    primary_width: float,
    cfg: FilterConfig,
    support_ids: np.ndarray | None = None,
) -> PlacementResult:
    """Run the full search over the grounding submesh.

    ``support_ids`` optionally overrides up-vertex filtering with a
    pre-masked id set (used to carve out regions covered by other objects).
    Rotation and penetration fields of the result stay unset.
    """
    if len(grounding.vertices) == 0:
        raise NoFeasibleLocation("grounding mesh is empty")
    try:
        ids = support_ids if support_ids is not None else filter_up_vertices(grounding, cfg)
        if ids.size == 0:
            raise NoSupportSurface("support id set is empty")
        clusters = cluster_support(grounding.vertices[ids], cfg)
    except NoSupportSurface as exc:
        raise NoFeasibleLocation(str(exc)) from exc

    for cluster in clusters:
        try:
            level0 = build_voxel_grid(cluster, primary_width, cfg)
        except ClusterTooSmall as exc:
            logger.debug("skipping cluster of %d points: %s", len(cluster), exc)
            continue
        grids = hierarchy(level0, cfg)
        final = grids[-1]
        if not final.any_occupied():  # cannot happen for level 0, kept for safety
            continue
        levels = len(grids) - 1
        x_id, y_id = _pick_cell(final, level0, levels, cfg.n, cluster)
        x, y = level_cell_center(final.origin, final.cell_size, levels, x_id, y_id)
        z = support_height(cluster, x, y, cfg.z_neighbors)
        return PlacementResult(
            location=np.array([x, y, z]),
            levels=levels,
            chosen_cluster=cluster,
            candidate_trace=tuple(grids),
            cell_index=(x_id, y_id),
        )
    raise NoFeasibleLocation(
        f"no support cluster can host an object of width {primary_width:.3g} m"
    )
