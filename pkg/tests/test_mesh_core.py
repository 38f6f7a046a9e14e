import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sceneedit import primitives
from sceneedit.errors import DegenerateGeometry, InvalidScale
from sceneedit.mesh.core import (
    Aabb,
    RigidTransform,
    TriangleMesh,
    apply_transform,
    compute_vertex_normals,
    merge,
    remove_tagged,
)


def test_face_index_out_of_range_rejected():
    with pytest.raises(ValueError, match="out of range"):
        TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 3]])


def test_repeated_vertex_in_face_rejected():
    with pytest.raises(ValueError, match="same vertex twice"):
        TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 1]])


def test_non_unit_normals_rejected():
    with pytest.raises(ValueError, match="unit length"):
        TriangleMesh(
            [[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]],
            vertex_normals=[[0, 0, 2], [0, 0, 1], [0, 0, 1]],
        )


def test_aabb_ordering_enforced():
    with pytest.raises(ValueError):
        Aabb([1, 0, 0], [0, 1, 1])


def test_rigid_transform_scale_must_be_positive():
    with pytest.raises(InvalidScale):
        RigidTransform(uniform_scale=0.0)


# --- normals ----------------------------------------------------------------


def test_horizontal_plate_normals_point_up():
    plate = primitives.plate(1.0, 1.0, spacing=0.25)
    assert np.allclose(plate.vertex_normals, [0, 0, 1], atol=1e-12)


def test_sphere_normals_match_radial_directions():
    sphere = primitives.uv_sphere(0.5)
    center = np.array([0.0, 0.0, 0.5])
    radial = sphere.vertices - center
    radial /= np.linalg.norm(radial, axis=1, keepdims=True)
    cos = np.einsum("ij,ij->i", sphere.vertex_normals, radial)
    angles = np.degrees(np.arccos(np.clip(cos, -1, 1)))
    assert angles.max() < 2.0


def test_isolated_vertex_normal_is_nan_flagged():
    mesh = TriangleMesh(
        [[0, 0, 0], [1, 0, 0], [0, 1, 0], [5, 5, 5]], [[0, 1, 2]]
    )
    mesh = compute_vertex_normals(mesh)
    assert np.isnan(mesh.vertex_normals[3]).all()
    assert np.allclose(mesh.vertex_normals[:3], [0, 0, 1])


def test_vertex_with_only_degenerate_faces_raises():
    mesh = TriangleMesh(
        [[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 1, 2]]  # collinear: zero area
    )
    with pytest.raises(DegenerateGeometry):
        compute_vertex_normals(mesh)


def test_normals_invariant_under_face_reordering(unit_cube):
    reordered = TriangleMesh(unit_cube.vertices, unit_cube.faces[::-1])
    a = compute_vertex_normals(TriangleMesh(unit_cube.vertices, unit_cube.faces))
    b = compute_vertex_normals(reordered)
    assert np.allclose(a.vertex_normals, b.vertex_normals, atol=1e-12)


# --- transforms -------------------------------------------------------------


def test_identity_transform_is_bitwise_equal(unit_cube):
    out = apply_transform(unit_cube, RigidTransform())
    assert np.array_equal(out.vertices, unit_cube.vertices)


def test_scale_doubles_aabb_widths(unit_cube):
    out = apply_transform(unit_cube, RigidTransform(uniform_scale=2.0))
    assert np.allclose(out.aabb.extents, 2.0 * unit_cube.aabb.extents)


def test_rotation_quarter_turn():
    t = RigidTransform(rotation_z=np.pi / 2)
    out = t.apply_points(np.array([[1.0, 0.0, 0.0]]))
    assert np.allclose(out[0], [0, 1, 0], atol=1e-9)


def test_transform_order_scale_rotate_translate():
    t = RigidTransform(rotation_z=np.pi / 2, translation=[1, 0, 0], uniform_scale=2.0)
    out = t.apply_points(np.array([[1.0, 0.0, 0.0]]))
    # scale -> (2,0,0), rotate -> (0,2,0), translate -> (1,2,0)
    assert np.allclose(out[0], [1, 2, 0], atol=1e-12)


@given(
    angle=st.floats(-np.pi, np.pi),
    scale=st.floats(0.1, 10.0),
    tx=st.floats(-5, 5),
)
@settings(max_examples=50, deadline=None)
def test_transform_preserves_topology(angle, scale, tx):
    mesh = primitives.box(1, 1, 1)
    out = apply_transform(mesh, RigidTransform(angle, [tx, 0, 0], scale))
    assert np.array_equal(out.faces, mesh.faces)


# --- merge / tags -----------------------------------------------------------


def test_merge_counts(unit_cube):
    merged = merge(unit_cube, unit_cube.with_name("other"))
    assert len(merged.vertices) == 16
    assert len(merged.faces) == 24


def test_merge_then_delete_by_tag_restores_scene(unit_cube):
    scene = unit_cube.with_name("scene")
    merged = merge(scene, unit_cube.with_name("obj"), tag="obj")
    restored = remove_tagged(merged, "obj")
    assert restored.geometry_equal(scene)


def test_merge_three_objects_tags_resolve_to_own_faces(unit_cube):
    scene = unit_cube.with_name("scene")
    for k in range(3):
        obj = TriangleMesh(unit_cube.vertices + [3.0 * (k + 1), 0, 0], unit_cube.faces)
        scene = merge(scene, obj, tag=f"obj{k}")
    for k in range(3):
        faces = scene.tagged_faces(f"obj{k}")
        assert len(faces) == 12
        verts = scene.vertices[np.unique(scene.faces[faces].ravel())]
        assert np.allclose(verts[:, 0].mean(), 3.0 * (k + 1))


def test_merge_is_associative_in_geometry(unit_cube):
    a = unit_cube
    b = TriangleMesh(unit_cube.vertices + [2, 0, 0], unit_cube.faces)
    c = TriangleMesh(unit_cube.vertices + [4, 0, 0], unit_cube.faces)
    left = merge(merge(a, b, tag="b"), c, tag="c")
    right = merge(a, merge(b, c, tag="c"), tag="b")
    assert np.allclose(np.sort(left.vertices, axis=0), np.sort(right.vertices, axis=0))
    assert len(left.faces) == len(right.faces)


def test_duplicate_tag_rejected(unit_cube):
    merged = merge(unit_cube, unit_cube, tag="x")
    with pytest.raises(ValueError, match="already present"):
        merge(merged, unit_cube, tag="x")
