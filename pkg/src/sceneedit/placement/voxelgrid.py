"""Occupancy grids over a support cluster and the multi-level mean filter.

The cell size equals the scaled primary-object width divided by the filter
side, so a filter window always spans one object footprint. Sliding an
n x n mean filter (stride 1) over the grid and thresholding produces the
next level; repeating examines the surface at growing scales.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sceneedit.config import FilterConfig
from sceneedit.errors import ClusterTooSmall
from sceneedit.placement.support import SupportCluster


@dataclass(frozen=True)
class VoxelGrid:
    """Binary occupancy over a cluster's XY extent; row i runs along +X."""

    origin: tuple[float, float]   # minimum cluster X/Y, meters
    cell_size: float              # meters
    occupancy: np.ndarray         # (M, N) uint8, 1 = contains >= 1 vertex
    level: int = 0

    def __post_init__(self):
        occ = np.ascontiguousarray(np.asarray(self.occupancy, dtype=np.uint8))
        occ.flags.writeable = False
        object.__setattr__(self, "occupancy", occ)
        if occ.ndim != 2 or occ.shape[0] < 1 or occ.shape[1] < 1:
            raise ValueError("occupancy must be a non-empty 2D matrix")

    @property
    def shape(self) -> tuple[int, int]:
        return self.occupancy.shape

    def any_occupied(self) -> bool:
        return bool(self.occupancy.any())

    def to_json(self) -> dict:
        return {
            "origin": [float(self.origin[0]), float(self.origin[1])],
            "cell_size": float(self.cell_size),
            "level": int(self.level),
            "occupancy": self.occupancy.astype(int).tolist(),
        }


def build_voxel_grid(cluster: SupportCluster, primary_width: float, cfg: FilterConfig) -> VoxelGrid:
    """Level-0 grid: cluster XY extent split into cells of size
    primary_width / n; a cell is 1 iff at least one cluster vertex falls in it."""
    if primary_width <= 0:
        raise ValueError(f"primary width must be positive, got {primary_width}")
    s = primary_width / cfg.n
    xy = cluster.points[:, :2]
    lo = xy.min(axis=0)
    hi = xy.max(axis=0)
    m = max(1, int(math.ceil((hi[0] - lo[0]) / s)))
    n_cols = max(1, int(math.ceil((hi[1] - lo[1]) / s)))
    if m < cfg.n or n_cols < cfg.n:
        raise ClusterTooSmall(
            f"cluster spans {m}x{n_cols} cells of {s:.4g} m; filter needs {cfg.n}"
        )
    ix = np.minimum(((xy[:, 0] - lo[0]) / s).astype(np.int64), m - 1)
    iy = np.minimum(((xy[:, 1] - lo[1]) / s).astype(np.int64), n_cols - 1)
    occ = np.zeros((m, n_cols), dtype=np.uint8)
    occ[ix, iy] = 1
    return VoxelGrid((float(lo[0]), float(lo[1])), s, occ, level=0)


def convolve_level(grid: VoxelGrid, cfg: FilterConfig) -> VoxelGrid:
    """One filter pass: output cell is 1 iff the n x n window mean reaches
    the threshold. Output shape is (M-n+1) x (N-n+1); origin and cell size
    are unchanged, level increments."""
    n = cfg.n
    m_rows, n_cols = grid.shape
    if m_rows < n or n_cols < n:
        raise ValueError(f"grid {m_rows}x{n_cols} is smaller than the {n}x{n} filter")
    # integral image keeps window sums exact (small integers)
    padded = np.zeros((m_rows + 1, n_cols + 1), dtype=np.int64)
    padded[1:, 1:] = grid.occupancy
    np.cumsum(padded, axis=0, out=padded)
    np.cumsum(padded, axis=1, out=padded)
    sums = (
        padded[n:, n:] - padded[:-n, n:] - padded[n:, :-n] + padded[:-n, :-n]
    )
    means = sums / float(n * n)
    out = (means >= cfg.threshold).astype(np.uint8)
    return VoxelGrid(grid.origin, grid.cell_size, out, level=grid.level + 1)


def hierarchy(grid: VoxelGrid, cfg: FilterConfig) -> list[VoxelGrid]:
    """All levels, starting at the given grid, following the stopping rule:
    stop when the next output would contain no 1 or the current grid is
    already smaller than the filter. The last entry always contains a 1
    (provided the input does)."""
    levels = [grid]
    current = grid
    while current.shape[0] >= cfg.n and current.shape[1] >= cfg.n:
        nxt = convolve_level(current, cfg)
        if not nxt.any_occupied():
            break
        levels.append(nxt)
        current = nxt
    return levels
