from sceneedit.placement.support import (
    SupportCluster,
    cluster_support,
    filter_up_vertices,
    mask_covered_vertices,
)
from sceneedit.placement.voxelgrid import VoxelGrid, build_voxel_grid, convolve_level
from sceneedit.placement.locate import PlacementResult, find_location, level_cell_center
from sceneedit.placement.penetration import PenetrationReport, penetration_percent
from sceneedit.placement.refine import base_centroid, placement_transform, refine_rotation

__all__ = [
    "PenetrationReport",
    "PlacementResult",
    "SupportCluster",
    "VoxelGrid",
    "base_centroid",
    "build_voxel_grid",
    "cluster_support",
    "convolve_level",
    "filter_up_vertices",
    "find_location",
    "level_cell_center",
    "mask_covered_vertices",
    "penetration_percent",
    "placement_transform",
    "refine_rotation",
]
