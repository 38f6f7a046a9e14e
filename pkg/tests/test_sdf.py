import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import closest_point_all_triangles, ray_parity_inside
from sceneedit import primitives
from sceneedit.errors import DegenerateGeometry
from sceneedit.mesh.core import TriangleMesh
from sceneedit.mesh.sdf import SignedDistanceField, signed_distance


def test_center_of_unit_cube(unit_cube):
    sdf = SignedDistanceField(unit_cube)
    assert signed_distance(sdf, [0, 0, 0]) == pytest.approx(-0.5)


def test_point_outside_cube(unit_cube):
    sdf = SignedDistanceField(unit_cube)
    assert signed_distance(sdf, [1.5, 0, 0]) == pytest.approx(1.0)


def test_surface_point_is_zero(unit_cube):
    sdf = SignedDistanceField(unit_cube)
    for p in unit_cube.vertices:
        assert abs(signed_distance(sdf, p)) < 1e-5


def test_empty_mesh_rejected():
    mesh = TriangleMesh(np.zeros((3, 3)), np.zeros((0, 3), dtype=int))
    with pytest.raises(DegenerateGeometry):
        SignedDistanceField(mesh)


def test_brute_force_oracle_agreement(unit_cube):
    """1000 random points: |dist| within 1e-6 of exhaustive closest point,
    sign agreeing with ray parity on >= 99.5%."""
    rng = np.random.default_rng(42)
    points = rng.uniform(-1.2, 1.2, (1000, 3))
    sdf = SignedDistanceField(unit_cube)
    result = sdf.query(points)
    agree = 0
    for p, value in zip(points, result):
        expected, _ = closest_point_all_triangles(unit_cube.vertices, unit_cube.faces, p)
        assert abs(abs(value) - expected) < 1e-6
    inside = ray_parity_inside(unit_cube.vertices, unit_cube.faces, points)
    agree = np.mean((result < 0) == inside)
    assert agree >= 0.995


def test_sign_agreement_across_watertight_fixtures(watertight_fixtures):
    rng = np.random.default_rng(7)
    total = 0
    agree = 0
    for mesh in watertight_fixtures:
        box = mesh.aabb
        lo = box.min - 0.3 * box.extents
        hi = box.max + 0.3 * box.extents
        points = rng.uniform(lo, hi, (100, 3))
        sdf = SignedDistanceField(mesh)
        values = sdf.query(points)
        inside = ray_parity_inside(mesh.vertices, mesh.faces, points)
        agree += int(np.sum((values < 0) == inside))
        total += len(points)
    assert agree / total >= 0.995


@given(seed=st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_lipschitz_property(seed):
    """|sd(p) - sd(q)| <= |p - q| for random point pairs."""
    mesh = primitives.box(1, 0.7, 0.4)
    sdf = SignedDistanceField(mesh)
    rng = np.random.default_rng(seed)
    p, q = rng.uniform(-1.5, 1.5, (2, 3))
    dp, dq = float(sdf.query(p)), float(sdf.query(q))
    assert abs(dp - dq) <= np.linalg.norm(p - q) + 1e-9


def test_open_plate_sign_convention():
    """Behind a single-sided surface counts as inside."""
    plate = primitives.plate(1.0, 1.0, spacing=0.5)
    sdf = SignedDistanceField(plate)
    assert signed_distance(sdf, [0, 0, 0.3]) > 0
    assert signed_distance(sdf, [0, 0, -0.3]) < 0


def test_queries_accept_batches(unit_cube):
    sdf = SignedDistanceField(unit_cube)
    out = sdf.query(np.zeros((5, 3)))
    assert out.shape == (5,)
    assert np.allclose(out, -0.5)
