from sceneedit.mesh.core import (
    Aabb,
    RigidTransform,
    TriangleMesh,
    apply_transform,
    compute_vertex_normals,
    merge,
    remove_faces,
    remove_tagged,
)
from sceneedit.mesh.io import load_mesh, save_mesh
from sceneedit.mesh.sdf import SignedDistanceField

__all__ = [
    "Aabb",
    "RigidTransform",
    "TriangleMesh",
    "SignedDistanceField",
    "apply_transform",
    "compute_vertex_normals",
    "load_mesh",
    "merge",
    "remove_faces",
    "remove_tagged",
    "save_mesh",
]
