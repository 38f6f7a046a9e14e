"""Synthetic cluttered-room scenes for benchmarks and tests.

Each scene is a floor, a table with a densely sampled top, and a seeded
number of clutter boxes/cylinders standing on the table. Annotations label
the floor and table instances so grounding works offline; clutter is merged
into the scene mesh like furniture in a fused scan.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sceneedit import primitives
from sceneedit.grounding import Scene, VertexAnnotations
from sceneedit.mesh.core import TriangleMesh, compute_vertex_normals


@dataclass(frozen=True)
class TableSceneSpec:
    floor_size: float = 3.0
    table_width: float = 1.2
    table_depth: float = 0.8
    table_height: float = 0.74
    top_thickness: float = 0.04
    top_spacing: float = 0.025     # vertex spacing of the table top
    clutter_min: int = 2
    clutter_max: int = 5
    clutter_size_range: tuple[float, float] = (0.08, 0.22)
    clutter_height_range: tuple[float, float] = (0.06, 0.3)


def _shift(mesh: TriangleMesh, offset) -> TriangleMesh:
    return TriangleMesh(mesh.vertices + np.asarray(offset, dtype=np.float64),
                        mesh.faces, None, mesh.name)


def make_table(spec: TableSceneSpec) -> TriangleMesh:
    """Table standing at the origin: sampled slab top plus four legs."""
    top = primitives.box(spec.table_width, spec.table_depth, spec.top_thickness,
                         spacing=spec.top_spacing, name="table_top")
    top = _shift(top, (0, 0, spec.table_height - spec.top_thickness))
    leg_w = 0.06
    leg_h = spec.table_height - spec.top_thickness
    parts = [top]
    for sx in (-1, 1):
        for sy in (-1, 1):
            leg = primitives.box(leg_w, leg_w, leg_h, spacing=leg_h / 3, name="leg")
            parts.append(_shift(leg, (sx * (spec.table_width / 2 - leg_w),
                                      sy * (spec.table_depth / 2 - leg_w), 0.0)))
    vertices = np.vstack([p.vertices for p in parts])
    faces = []
    base = 0
    for p in parts:
        faces.append(p.faces + base)
        base += len(p.vertices)
    return compute_vertex_normals(TriangleMesh(vertices, np.vstack(faces), name="table"))


def make_cluttered_table_scene(
    seed: int, spec: TableSceneSpec | None = None, clutter: int | None = None
) -> Scene:
    """Floor + table + clutter standing on the table top; labeled instances."""
    spec = spec or TableSceneSpec()
    rng = np.random.default_rng(seed)

    floor = primitives.plate(spec.floor_size, spec.floor_size, spacing=0.15, name="floor")
    table = make_table(spec)

    pieces: list[tuple[TriangleMesh, str]] = [(floor, "floor"), (table, "table")]
    count = clutter if clutter is not None else int(rng.integers(spec.clutter_min,
                                                                 spec.clutter_max + 1))
    margin = 0.06
    half_w = spec.table_width / 2 - margin
    half_d = spec.table_depth / 2 - margin
    for k in range(count):
        size = float(rng.uniform(*spec.clutter_size_range))
        height = float(rng.uniform(*spec.clutter_height_range))
        x = float(rng.uniform(-half_w + size / 2, half_w - size / 2))
        y = float(rng.uniform(-half_d + size / 2, half_d - size / 2))
        if rng.random() < 0.5:
            item = primitives.box(size, size, height, spacing=size / 3, name=f"clutter_{k}")
        else:
            item = primitives.cylinder(size / 2, height, segments=16, name=f"clutter_{k}")
        pieces.append((_shift(item, (x, y, spec.table_height)), "clutter"))

    vertices = []
    faces = []
    labels = []
    instances = []
    base = 0
    for instance_id, (piece, label) in enumerate(pieces):
        vertices.append(piece.vertices)
        faces.append(piece.faces + base)
        labels.extend([label] * len(piece.vertices))
        instances.extend([instance_id] * len(piece.vertices))
        base += len(piece.vertices)
    mesh = compute_vertex_normals(
        TriangleMesh(np.vstack(vertices), np.vstack(faces), name=f"table_scene_{seed}")
    )
    annotations = VertexAnnotations(np.asarray(instances), np.asarray(labels, dtype=object))
    return Scene(mesh=mesh, annotations=annotations)


def random_primary(seed: int) -> TriangleMesh:
    """A primary object for benchmark insertions: box or cylinder of a
    plausible tabletop size, base at the origin."""
    rng = np.random.default_rng(seed + 10_000)
    width = float(rng.uniform(0.1, 0.24))
    height = float(rng.uniform(0.08, 0.25))
    if rng.random() < 0.5:
        return primitives.box(width, width * float(rng.uniform(0.6, 1.4)), height,
                              spacing=width / 4, name="primary")
    return primitives.cylinder(width / 2, height, segments=20,
                               spacing=height / 3, name="primary")
