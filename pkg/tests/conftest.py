import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sceneedit import primitives
from sceneedit.grounding import Scene, VertexAnnotations
from sceneedit.mesh.core import TriangleMesh, compute_vertex_normals
from sceneedit.synthetic import make_cluttered_table_scene


@pytest.fixture
def unit_cube() -> TriangleMesh:
    """Unit cube centered at the origin, 8 vertices / 12 faces."""
    verts = np.array([
        [x, y, z]
        for x in (-0.5, 0.5)
        for y in (-0.5, 0.5)
        for z in (-0.5, 0.5)
    ])
    faces = np.array([
        [0, 1, 3], [0, 3, 2],      # -x
        [4, 6, 7], [4, 7, 5],      # +x
        [0, 4, 5], [0, 5, 1],      # -y
        [2, 3, 7], [2, 7, 6],      # +y
        [0, 2, 6], [0, 6, 4],      # -z
        [1, 5, 7], [1, 7, 3],      # +z
    ])
    return compute_vertex_normals(TriangleMesh(verts, faces, name="cube"))


@pytest.fixture
def watertight_fixtures() -> list[TriangleMesh]:
    """Ten closed meshes of assorted shapes, sizes and positions."""
    def shift(mesh, offset):
        return TriangleMesh(mesh.vertices + np.asarray(offset, float), mesh.faces)

    fixtures = [
        primitives.box(1, 1, 1),
        primitives.box(0.4, 2.0, 0.7, spacing=0.3),
        shift(primitives.box(1.2, 0.8, 0.5), (0.7, -0.3, 0.2)),
        primitives.uv_sphere(0.5),
        shift(primitives.uv_sphere(0.8, rings=20, segments=28), (-1.0, 0.5, 0.0)),
        primitives.cylinder(0.5, 1.2),
        shift(primitives.cylinder(0.25, 2.0, segments=40), (0.2, 0.9, -0.5)),
        primitives.cone(0.6, 1.0),
        shift(primitives.cone(0.3, 0.5, segments=20), (-0.4, -0.8, 0.3)),
        shift(primitives.box(0.2, 0.2, 3.0, spacing=0.5), (1.5, 1.5, -1.0)),
    ]
    return fixtures


@pytest.fixture
def table_scene() -> Scene:
    return make_cluttered_table_scene(11, clutter=2)


@pytest.fixture
def empty_table_scene() -> Scene:
    return make_cluttered_table_scene(5, clutter=0)


@pytest.fixture
def asset_library(tmp_path: Path) -> Path:
    """Library directory with a couple of small fixture assets."""
    from sceneedit.mesh.io import save_mesh

    lib = tmp_path / "library"
    lib.mkdir()
    save_mesh(primitives.box(0.3, 0.3, 0.45, name="stool"), lib / "stool.obj")
    save_mesh(primitives.uv_sphere(0.09, rings=8, segments=10), lib / "teapot.ply")
    return lib
