"""Procedural mesh primitives.

Every builder returns a Z-up mesh centered on the Z axis with its base at
z = 0. ``spacing`` subdivides flat faces so vertex density is high enough
for the vertex-counting metrics; None keeps the coarse tessellation.
"""

from __future__ import annotations

import math

import numpy as np

from sceneedit.mesh.core import TriangleMesh, compute_vertex_normals


def _grid_patch(corner, du, dv, nu: int, nv: int, base: int):
    """Vertices and faces of a rectangle spanned by du, dv split nu x nv."""
    us = np.linspace(0.0, 1.0, nu + 1)
    vs = np.linspace(0.0, 1.0, nv + 1)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    verts = (corner[None, :]
             + uu.reshape(-1, 1) * du[None, :]
             + vv.reshape(-1, 1) * dv[None, :])
    faces = []
    for i in range(nu):
        for j in range(nv):
            a = base + i * (nv + 1) + j
            b = a + (nv + 1)
            faces.append((a, b, b + 1))
            faces.append((a, b + 1, a + 1))
    return verts, faces


def _segments(length: float, spacing: float | None) -> int:
    if spacing is None or spacing <= 0:
        return 1
    return max(1, int(math.ceil(length / spacing)))


def box(width: float, depth: float, height: float, spacing: float | None = None,
        name: str = "box") -> TriangleMesh:
    """Axis-aligned box, base centered at the origin."""
    hx, hy = width / 2.0, depth / 2.0
    nx = _segments(width, spacing)
    ny = _segments(depth, spacing)
    nz = _segments(height, spacing)
    verts: list[np.ndarray] = []
    faces: list[tuple[int, int, int]] = []

    def add(corner, du, dv, nu, nv):
        base = sum(len(v) for v in verts)
        v, f = _grid_patch(np.array(corner, float), np.array(du, float),
                           np.array(dv, float), nu, nv, base)
        verts.append(v)
        faces.extend(f)

    add((-hx, -hy, height), (width, 0, 0), (0, depth, 0), nx, ny)   # top (+Z)
    add((-hx, -hy, 0), (0, depth, 0), (width, 0, 0), ny, nx)        # bottom (-Z)
    add((-hx, -hy, 0), (width, 0, 0), (0, 0, height), nx, nz)       # -Y
    add((hx, hy, 0), (-width, 0, 0), (0, 0, height), nx, nz)        # +Y
    add((hx, -hy, 0), (0, depth, 0), (0, 0, height), ny, nz)        # +X
    add((-hx, hy, 0), (0, -depth, 0), (0, 0, height), ny, nz)       # -X
    mesh = TriangleMesh(np.vstack(verts), np.array(faces), name=name)
    return compute_vertex_normals(mesh)


def plate(width: float, depth: float, spacing: float | None = None,
          z: float = 0.0, name: str = "plate") -> TriangleMesh:
    """Single-sided horizontal rectangle facing +Z."""
    nx = _segments(width, spacing)
    ny = _segments(depth, spacing)
    v, f = _grid_patch(np.array([-width / 2, -depth / 2, z]),
                       np.array([width, 0, 0]), np.array([0, depth, 0]), nx, ny, 0)
    return compute_vertex_normals(TriangleMesh(v, np.array(f), name=name))


def cylinder(radius: float, height: float, segments: int = 32,
             spacing: float | None = None, name: str = "cylinder") -> TriangleMesh:
    """Capped cylinder standing on the XY plane."""
    nz = _segments(height, spacing)
    rings = []
    for k in range(nz + 1):
        z = height * k / nz
        ring = [(radius * math.cos(2 * math.pi * i / segments),
                 radius * math.sin(2 * math.pi * i / segments), z)
                for i in range(segments)]
        rings.append(ring)
    verts = [p for ring in rings for p in ring]
    faces = []
    for k in range(nz):
        for i in range(segments):
            a = k * segments + i
            b = k * segments + (i + 1) % segments
            c = (k + 1) * segments + i
            d = (k + 1) * segments + (i + 1) % segments
            faces.append((a, b, d))
            faces.append((a, d, c))
    bottom_center = len(verts)
    verts.append((0.0, 0.0, 0.0))
    top_center = len(verts)
    verts.append((0.0, 0.0, height))
    for i in range(segments):
        faces.append((bottom_center, (i + 1) % segments, i))
        top0 = nz * segments
        faces.append((top_center, top0 + i, top0 + (i + 1) % segments))
    mesh = TriangleMesh(np.array(verts), np.array(faces), name=name)
    return compute_vertex_normals(mesh)


def cone(radius: float, height: float, segments: int = 32, name: str = "cone") -> TriangleMesh:
    verts = [(radius * math.cos(2 * math.pi * i / segments),
              radius * math.sin(2 * math.pi * i / segments), 0.0)
             for i in range(segments)]
    apex = len(verts)
    verts.append((0.0, 0.0, height))
    center = len(verts)
    verts.append((0.0, 0.0, 0.0))
    faces = []
    for i in range(segments):
        faces.append((i, (i + 1) % segments, apex))
        faces.append((center, (i + 1) % segments, i))
    mesh = TriangleMesh(np.array(verts), np.array(faces), name=name)
    return compute_vertex_normals(mesh)


def uv_sphere(radius: float, rings: int = 16, segments: int = 24,
              name: str = "sphere") -> TriangleMesh:
    """UV sphere resting on the XY plane (center at z = radius)."""
    verts = [(0.0, 0.0, 0.0)]
    for r in range(1, rings):
        phi = math.pi * r / rings
        z = radius * (1.0 - math.cos(phi))
        rr = radius * math.sin(phi)
        for s in range(segments):
            theta = 2 * math.pi * s / segments
            verts.append((rr * math.cos(theta), rr * math.sin(theta), z))
    verts.append((0.0, 0.0, 2.0 * radius))
    top = len(verts) - 1
    faces = []
    for s in range(segments):
        faces.append((0, 1 + (s + 1) % segments, 1 + s))
    for r in range(rings - 2):
        a0 = 1 + r * segments
        b0 = 1 + (r + 1) * segments
        for s in range(segments):
            a, a1 = a0 + s, a0 + (s + 1) % segments
            b, b1 = b0 + s, b0 + (s + 1) % segments
            faces.append((a, a1, b1))
            faces.append((a, b1, b))
    last = 1 + (rings - 2) * segments
    for s in range(segments):
        faces.append((top, last + s, last + (s + 1) % segments))
    mesh = TriangleMesh(np.array(verts), np.array(faces), name=name)
    return compute_vertex_normals(mesh)


BUILDERS = {
    "box": lambda: box(1.0, 1.0, 1.0, spacing=0.125),
    "sphere": lambda: uv_sphere(0.5),
    "cylinder": lambda: cylinder(0.5, 1.0, spacing=0.125),
    "cone": lambda: cone(0.5, 1.0),
}
