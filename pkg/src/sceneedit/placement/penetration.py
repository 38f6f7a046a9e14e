"""Penetration metric: the fraction of object vertices inside scene geometry.

A vertex penetrates when it sits on the interior side of the nearest scene
surface. Vertices within the resting-contact band around the support height
are exempt, so an object standing on a scanned surface is not penalized for
touching it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sceneedit.mesh.core import TriangleMesh
from sceneedit.mesh.sdf import SignedDistanceField


@dataclass(frozen=True)
class PenetrationReport:
    fraction: float
    count: int                      # total vertices considered (N)
    offending_vertex_ids: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.offending_vertex_ids, dtype=np.int64)
        ids.flags.writeable = False
        object.__setattr__(self, "offending_vertex_ids", ids)


def penetration_percent(
    obj: TriangleMesh | np.ndarray,
    scene_sdf: SignedDistanceField,
    support_z: float | None = None,
    contact_epsilon: float = 0.005,
) -> PenetrationReport:
    """Fraction of vertices with negative signed distance to the scene.

    ``obj`` may be a mesh or a raw (N, 3) vertex array. When ``support_z``
    is given, vertices within ``contact_epsilon`` of that height are never
    counted as offending (resting contact).
    """
    vertices = obj.vertices if isinstance(obj, TriangleMesh) else np.asarray(obj, dtype=np.float64)
    n = len(vertices)
    if n == 0:
        raise ValueError("penetration metric needs at least one vertex")
    dist = scene_sdf.query(vertices)
    inside = dist < 0.0
    if support_z is not None:
        inside &= np.abs(vertices[:, 2] - support_z) > contact_epsilon
    offending = np.flatnonzero(inside)
    return PenetrationReport(float(offending.size) / float(n), n, offending)
