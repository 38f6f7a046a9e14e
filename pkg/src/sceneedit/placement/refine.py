"""Orientation refinement: sweep yaw angles, keep the least-penetrating one.

The object is stood at the chosen location through its base centroid, then
evaluated at equally spaced rotations about the vertical axis through that
point. The minimum always includes the unrotated pose, so refinement can
never make penetration worse.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from sceneedit.config import FilterConfig
from sceneedit.mesh.core import RigidTransform, TriangleMesh
from sceneedit.mesh.sdf import SignedDistanceField
from sceneedit.placement.locate import PlacementResult
from sceneedit.placement.penetration import penetration_percent

_BASE_BAND = 0.05  # fraction of object height that counts as the base


def base_centroid(mesh: TriangleMesh) -> np.ndarray:
    """Centroid of the vertices in the lowest height band, projected to min Z."""
    z = mesh.vertices[:, 2]
    z_min = float(z.min())
    band = z <= z_min + _BASE_BAND * max(float(z.max()) - z_min, 0.0)
    base = mesh.vertices[band]
    return np.array([float(base[:, 0].mean()), float(base[:, 1].mean()), z_min])


def placement_transform(obj: TriangleMesh, location: np.ndarray, rotation_z: float) -> RigidTransform:
    """Transform that rotates ``obj`` about the vertical axis through its base
    centroid and lands that centroid on ``location``."""
    b = base_centroid(obj)
    c, s = math.cos(rotation_z), math.sin(rotation_z)
    rotated_b = np.array([c * b[0] - s * b[1], s * b[0] + c * b[1], b[2]])
    return RigidTransform(
        rotation_z=rotation_z,
        translation=np.asarray(location, dtype=np.float64) - rotated_b,
    )


def _posed_vertices(obj: TriangleMesh, location: np.ndarray, angle: float) -> np.ndarray:
    return placement_transform(obj, location, angle).apply_points(obj.vertices)


def refine_rotation(
    obj: TriangleMesh,
    location: np.ndarray,
    scene_sdf: SignedDistanceField,
    cfg: FilterConfig,
    base_result: PlacementResult | None = None,
    support_z: float | None = None,
) -> PlacementResult:
    """Fill the rotation and penetration fields of a placement.

    Evaluates ``cfg.rotation_steps`` angles uniformly over a full turn; ties
    resolve to the smallest angle. ``support_z`` defaults to the location
    height for the resting-contact exemption.
    """
    location = np.asarray(location, dtype=np.float64).reshape(3)
    if support_z is None:
        support_z = float(location[2])
    steps = cfg.rotation_steps
    best_angle = 0.0
    best_value = None
    before = None
    for k in range(steps):
        angle = 2.0 * math.pi * k / steps
        report = penetration_percent(
            _posed_vertices(obj, location, angle),
            scene_sdf,
            support_z=support_z,
            contact_epsilon=cfg.contact_epsilon,
        )
        if k == 0:
            before = report.fraction
        if best_value is None or report.fraction < best_value:
            best_value = report.fraction
            best_angle = angle
    result = base_result if base_result is not None else PlacementResult(location=location)
    return replace(
        result,
        location=location,
        rotation_z=best_angle,
        penetration_before=before,
        penetration_after=best_value,
    )
