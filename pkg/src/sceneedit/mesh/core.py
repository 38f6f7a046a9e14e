"""Triangle-mesh value types and the pure operations shared by every module.

Meshes are immutable after construction (arrays are frozen); every operation
returns a new mesh. Coordinates are meters, the up axis is +Z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from sceneedit.errors import DegenerateGeometry, InvalidScale

_UNIT_TOL = 1e-6


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned bounding box, min <= max componentwise."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "min", _frozen(np.asarray(self.min, dtype=np.float64)))
        object.__setattr__(self, "max", _frozen(np.asarray(self.max, dtype=np.float64)))
        if self.min.shape != (3,) or self.max.shape != (3,):
            raise ValueError("Aabb corners must be 3-vectors")
        if np.any(self.min > self.max):
            raise ValueError(f"Aabb min {self.min} exceeds max {self.max}")

    @property
    def extents(self) -> np.ndarray:
        return self.max - self.min

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.min + self.max)

    def contains(self, other: "Aabb", tol: float = 0.0) -> bool:
        return bool(np.all(other.min >= self.min - tol) and np.all(other.max <= self.max + tol))

    def contains_point_xy(self, x: float, y: float, tol: float = 0.0) -> bool:
        return (self.min[0] - tol <= x <= self.max[0] + tol
                and self.min[1] - tol <= y <= self.max[1] + tol)

    def intersects_xy(self, other: "Aabb", tol: float = 0.0) -> bool:
        return bool(np.all(self.min[:2] <= other.max[:2] + tol)
                    and np.all(other.min[:2] <= self.max[:2] + tol))


@dataclass(frozen=True)
class RigidTransform:
    """Uniform scale, then rotation about +Z, then translation."""

    rotation_z: float = 0.0
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    uniform_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(
            self, "translation", _frozen(np.asarray(self.translation, dtype=np.float64))
        )
        if self.translation.shape != (3,):
            raise ValueError("translation must be a 3-vector")
        if not (self.uniform_scale > 0.0):
            raise InvalidScale(f"uniform_scale must be > 0, got {self.uniform_scale}")

    def apply_points(self, points: np.ndarray) -> np.ndarray:
        c, s = math.cos(self.rotation_z), math.sin(self.rotation_z)
        p = np.asarray(points, dtype=np.float64) * self.uniform_scale
        out = np.empty_like(p)
        out[:, 0] = c * p[:, 0] - s * p[:, 1]
        out[:, 1] = s * p[:, 0] + c * p[:, 1]
        out[:, 2] = p[:, 2]
        return out + self.translation


class TriangleMesh:
    """Indexed triangle soup with optional per-vertex unit normals.

    ``face_tags`` maps a provenance tag to the face indices contributed by a
    past merge, so merged objects stay addressable and deletable. Vertex
    normals of isolated vertices are NaN (undefined, excluded downstream).
    """

    __slots__ = ("vertices", "faces", "vertex_normals", "name", "face_tags")

    def __init__(self, vertices, faces, vertex_normals=None, name=None, face_tags=None):
        vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
        faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
        if faces.size and (faces.min() < 0 or faces.max() >= len(vertices)):
            raise ValueError("face index out of range")
        if faces.size:
            degenerate = (
                (faces[:, 0] == faces[:, 1])
                | (faces[:, 1] == faces[:, 2])
                | (faces[:, 0] == faces[:, 2])
            )
            if degenerate.any():
                raise ValueError(
                    f"{int(degenerate.sum())} faces reference the same vertex twice"
                )
        self.vertices = _frozen(vertices)
        self.faces = _frozen(faces)
        if vertex_normals is not None:
            vertex_normals = np.asarray(vertex_normals, dtype=np.float64).reshape(-1, 3)
            if len(vertex_normals) != len(vertices):
                raise ValueError("vertex_normals length must match vertex count")
            norms = np.linalg.norm(vertex_normals, axis=1)
            defined = ~np.isnan(norms)
            if np.any(np.abs(norms[defined] - 1.0) > _UNIT_TOL):
                raise ValueError("vertex normals must be unit length within 1e-6")
            vertex_normals = _frozen(vertex_normals)
        self.vertex_normals = vertex_normals
        self.name = name
        tags = {}
        for tag, idx in (face_tags or {}).items():
            idx = _frozen(np.asarray(idx, dtype=np.int64))
            if idx.size and (idx.min() < 0 or idx.max() >= len(faces)):
                raise ValueError(f"face tag {tag!r} indexes outside the face array")
            tags[tag] = idx
        self.face_tags = tags

    # meshes are value-like: equality compares geometry, not identity
    def geometry_equal(self, other: "TriangleMesh") -> bool:
        return (
            self.vertices.shape == other.vertices.shape
            and self.faces.shape == other.faces.shape
            and np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.faces, other.faces)
        )

    def __repr__(self) -> str:
        return (f"TriangleMesh(name={self.name!r}, vertices={len(self.vertices)}, "
                f"faces={len(self.faces)}, tags={sorted(self.face_tags)})")

    @property
    def aabb(self) -> Aabb:
        if len(self.vertices) == 0:
            raise DegenerateGeometry("empty mesh has no bounding box")
        return Aabb(self.vertices.min(axis=0), self.vertices.max(axis=0))

    def with_name(self, name: str) -> "TriangleMesh":
        return TriangleMesh(self.vertices, self.faces, self.vertex_normals, name, self.face_tags)

    def tagged_faces(self, tag: str) -> np.ndarray:
        return self.face_tags[tag]


def face_normals_and_areas(mesh: TriangleMesh) -> tuple[np.ndarray, np.ndarray]:
    """Unit face normals and face areas; zero-area faces get a zero normal."""
    tri = mesh.vertices[mesh.faces]
    cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    norm = np.linalg.norm(cross, axis=1)
    areas = 0.5 * norm
    normals = np.zeros_like(cross)
    ok = norm > 0.0
    normals[ok] = cross[ok] / norm[ok, None]
    return normals, areas


def compute_vertex_normals(mesh: TriangleMesh) -> TriangleMesh:
    """Angle-weighted average of incident face normals, unit-normalized.

    Isolated vertices get NaN normals (undefined but flagged). A vertex whose
    incident faces are all zero-area raises DegenerateGeometry.
    """
    normals, areas = face_normals_and_areas(mesh)
    tri = mesh.vertices[mesh.faces]
    acc = np.zeros((len(mesh.vertices), 3))
    incident = np.zeros(len(mesh.vertices), dtype=bool)
    live = np.zeros(len(mesh.vertices), dtype=bool)
    nonzero = areas > 0.0
    for corner in range(3):
        e1 = tri[:, (corner + 1) % 3] - tri[:, corner]
        e2 = tri[:, (corner + 2) % 3] - tri[:, corner]
        n1 = np.linalg.norm(e1, axis=1)
        n2 = np.linalg.norm(e2, axis=1)
        denom = np.where((n1 > 0) & (n2 > 0), n1 * n2, 1.0)
        cosang = np.clip(np.einsum("ij,ij->i", e1, e2) / denom, -1.0, 1.0)
        angle = np.where(nonzero, np.arccos(cosang), 0.0)
        np.add.at(acc, mesh.faces[:, corner], normals * angle[:, None])
        np.add.at(incident, mesh.faces[:, corner], True)
        np.add.at(live, mesh.faces[:, corner], nonzero)
    if np.any(incident & ~live):
        bad = int(np.flatnonzero(incident & ~live)[0])
        raise DegenerateGeometry(
            f"vertex {bad} has only zero-area incident faces; no normal exists"
        )
    # isolated vertices (and exact cancellations) stay NaN: flagged undefined
    out = np.full((len(mesh.vertices), 3), np.nan)
    lengths = np.linalg.norm(acc, axis=1)
    ok = incident & (lengths > 0.0)
    out[ok] = acc[ok] / lengths[ok, None]
    return TriangleMesh(mesh.vertices, mesh.faces, out, mesh.name, mesh.face_tags)


def apply_transform(mesh: TriangleMesh, t: RigidTransform) -> TriangleMesh:
    """Scale, rotate about Z, then translate; normals are re-derived."""
    moved = TriangleMesh(
        t.apply_points(mesh.vertices), mesh.faces, None, mesh.name, mesh.face_tags
    )
    if mesh.vertex_normals is not None and len(mesh.faces):
        moved = compute_vertex_normals(moved)
    return moved


def merge(scene_mesh: TriangleMesh, object_mesh: TriangleMesh, tag: str | None = None) -> TriangleMesh:
    """Append ``object_mesh`` after the scene; its faces are recorded under
    ``tag`` (defaults to the object's name) so the object stays deletable."""
    offset = len(scene_mesh.vertices)
    vertices = np.vstack([scene_mesh.vertices, object_mesh.vertices])
    faces = np.vstack([scene_mesh.faces, object_mesh.faces + offset])
    if scene_mesh.vertex_normals is not None and object_mesh.vertex_normals is not None:
        normals = np.vstack([scene_mesh.vertex_normals, object_mesh.vertex_normals])
    else:
        normals = None
    tags = dict(scene_mesh.face_tags)
    tag = tag if tag is not None else (object_mesh.name or "object")
    if tag in tags:
        raise ValueError(f"tag {tag!r} already present in scene mesh")
    new_faces = np.arange(len(scene_mesh.faces), len(faces), dtype=np.int64)
    for other, idx in object_mesh.face_tags.items():
        tags[f"{tag}/{other}"] = idx + len(scene_mesh.faces)
    tags[tag] = new_faces
    return TriangleMesh(vertices, faces, normals, scene_mesh.name, tags)


def remove_faces_mapped(
    mesh: TriangleMesh, face_ids: np.ndarray
) -> tuple[TriangleMesh, np.ndarray, np.ndarray]:
    """Drop the given faces plus any vertex used only by them.

    Vertices that were already unreferenced stay, so removing a merged
    object restores the pre-merge mesh exactly. Returns the new mesh plus
    old-to-new vertex and face index maps (-1 marks removed entries).
    """
    face_ids = np.unique(np.asarray(face_ids, dtype=np.int64))
    keep_face = np.ones(len(mesh.faces), dtype=bool)
    keep_face[face_ids] = False
    used_by_removed = np.zeros(len(mesh.vertices), dtype=bool)
    used_by_removed[mesh.faces[~keep_face].ravel()] = True
    used_by_kept = np.zeros(len(mesh.vertices), dtype=bool)
    used_by_kept[mesh.faces[keep_face].ravel()] = True
    keep_vertex = ~(used_by_removed & ~used_by_kept)

    vertex_remap = np.full(len(mesh.vertices), -1, dtype=np.int64)
    vertex_remap[keep_vertex] = np.arange(int(keep_vertex.sum()))
    vertices = mesh.vertices[keep_vertex]
    faces = vertex_remap[mesh.faces[keep_face]]
    normals = mesh.vertex_normals[keep_vertex] if mesh.vertex_normals is not None else None

    face_remap = np.full(len(mesh.faces), -1, dtype=np.int64)
    face_remap[keep_face] = np.arange(int(keep_face.sum()))
    tags = {}
    for tag, idx in mesh.face_tags.items():
        mapped = face_remap[idx]
        mapped = mapped[mapped >= 0]
        if mapped.size:
            tags[tag] = mapped
    new_mesh = TriangleMesh(vertices, faces, normals, mesh.name, tags)
    return new_mesh, vertex_remap, face_remap


def remove_faces(mesh: TriangleMesh, face_ids: np.ndarray) -> TriangleMesh:
    return remove_faces_mapped(mesh, face_ids)[0]


def remove_tagged(mesh: TriangleMesh, tag: str) -> TriangleMesh:
    if tag not in mesh.face_tags:
        raise KeyError(f"unknown face tag {tag!r}")
    return remove_faces(mesh, mesh.face_tags[tag])


def drop_degenerate_faces(mesh: TriangleMesh, min_area: float = 1e-12) -> tuple[TriangleMesh, int]:
    """Remove faces with area below ``min_area``; returns (mesh, dropped)."""
    if not len(mesh.faces):
        return mesh, 0
    _, areas = face_normals_and_areas(mesh)
    bad = np.flatnonzero(areas < min_area)
    if not bad.size:
        return mesh, 0
    keep = np.ones(len(mesh.faces), dtype=bool)
    keep[bad] = False
    # unlike remove_faces, vertices are kept: geometry fidelity over tidiness
    faces = mesh.faces[keep]
    face_remap = np.full(len(mesh.faces), -1, dtype=np.int64)
    face_remap[keep] = np.arange(int(keep.sum()))
    tags = {}
    for tag, idx in mesh.face_tags.items():
        mapped = face_remap[idx]
        tags[tag] = mapped[mapped >= 0]
    return TriangleMesh(mesh.vertices, faces, None, mesh.name, tags), int(bad.size)
