import numpy as np
import pytest

from sceneedit import primitives
from sceneedit.errors import EmptySelection, NotFound
from sceneedit.grounding import (
    Scene,
    SynonymTable,
    VertexAnnotations,
    extract_submesh,
    ground,
)
from sceneedit.mesh.core import TriangleMesh, compute_vertex_normals


def _two_tables_scene() -> Scene:
    """Two labeled tables, the second с more vertices (higher score)."""
    small = primitives.plate(0.5, 0.5, spacing=0.25, z=0.5)
    big = primitives.plate(1.0, 1.0, spacing=0.1, z=0.8)
    big = TriangleMesh(big.vertices + [3.0, 0, 0], big.faces)
    vertices = np.vstack([small.vertices, big.vertices])
    faces = np.vstack([small.faces, big.faces + len(small.vertices)])
    labels = ["table"] * len(small.vertices) + ["table"] * len(big.vertices)
    instances = [0] * len(small.vertices) + [1] * len(big.vertices)
    mesh = compute_vertex_normals(TriangleMesh(vertices, faces))
    return Scene(mesh=mesh, annotations=VertexAnnotations(np.array(instances),
                                                          np.array(labels, dtype=object)))


def test_label_forced_grounding(table_scene):
    grounded = ground(table_scene, "table")
    labels = np.asarray(table_scene.annotations.labels)[grounded.vertex_ids]
    assert set(labels.tolist()) == {"table"}
    assert grounded.confidence == 1.0


def test_unknown_entity_not_found(table_scene):
    with pytest.raises(NotFound):
        ground(table_scene, "unicorn")


def test_highest_score_instance_wins_and_rerun_deterministic():
    scene = _two_tables_scene()
    first = ground(scene, "table")
    second = ground(scene, "table")
    assert np.array_equal(first.vertex_ids, second.vertex_ids)
    # instance 1 has more vertices -> larger score wins
    assert np.asarray(scene.annotations.instance_ids)[first.vertex_ids[0]] == 1


def test_synonyms_match_desk_to_table(table_scene):
    grounded = ground(table_scene, "desk")
    labels = np.asarray(table_scene.annotations.labels)[grounded.vertex_ids]
    assert set(labels.tolist()) == {"table"}


def test_result_ids_index_into_scene_and_aabb_contained(table_scene):
    grounded = ground(table_scene, "table")
    assert grounded.vertex_ids.max() < len(table_scene.mesh.vertices)
    scene_box = table_scene.mesh.aabb
    assert scene_box.contains(grounded.aabb, tol=1e-12)


# --- extract_submesh ------------------------------------------------------------


def test_extract_all_vertices_is_whole_mesh(unit_cube):
    scene = Scene(mesh=unit_cube)
    sub = extract_submesh(scene, np.arange(len(unit_cube.vertices)))
    assert sub.geometry_equal(unit_cube)


def test_extract_nothing_is_empty_selection(unit_cube):
    scene = Scene(mesh=unit_cube)
    with pytest.raises(EmptySelection):
        extract_submesh(scene, np.array([], dtype=int))


def test_extract_half_cube_keeps_only_fully_selected_faces(unit_cube):
    """Brute-force face membership check as the oracle."""
    scene = Scene(mesh=unit_cube)
    selected = np.array([1, 3, 5, 7])  # the +z face corners
    sub = extract_submesh(scene, selected)
    chosen = set(selected.tolist())
    expected = [
        f for f in unit_cube.faces if all(int(v) in chosen for v in f)
    ]
    assert len(sub.faces) == len(expected)
    # geometry of kept faces matches the original coordinates
    for face in sub.faces:
        for v in face:
            original = unit_cube.vertices[selected[v]]
            assert np.allclose(sub.vertices[v], original)


def test_annotation_grounding_is_pure(table_scene):
    a = ground(table_scene, "table")
    b = ground(table_scene, "table")
    assert np.array_equal(a.vertex_ids, b.vertex_ids)
    assert a.label == b.label


def test_synonym_table_canonicalization():
    table = SynonymTable()
    assert table.canonical("Sofa") == table.canonical("couch")
    assert table.matches("coffee cup", "cup")
    assert not table.matches("lamp", "table")


def test_client_backend_returns_vertex_mask(table_scene, stub_server):
    from test_nlp import _StubHandler
    from sceneedit.grounding import GroundingClient

    expected = np.flatnonzero(
        np.asarray(table_scene.annotations.labels) == "table"
    )
    _StubHandler.responses = [(200, {"vertex_ids": [int(i) for i in expected],
                                     "confidence": 0.9, "label": "table"})]
    client_obj = GroundingClient(endpoint=stub_server)
    grounded = ground(table_scene, "table", backend="client", client=client_obj)
    assert np.array_equal(grounded.vertex_ids, expected)
    assert grounded.confidence == pytest.approx(0.9)


def test_client_backend_below_threshold_not_found(table_scene, stub_server):
    from test_nlp import _StubHandler
    from sceneedit.grounding import GroundingClient

    _StubHandler.responses = [(200, {"vertex_ids": [0, 1, 2], "confidence": 0.2,
                                     "label": "table"})]
    client_obj = GroundingClient(endpoint=stub_server)
    with pytest.raises(NotFound):
        ground(table_scene, "table", backend="client", client=client_obj)


# reuse the HTTP stub from the nlp tests
from test_nlp import stub_server  # noqa: E402,F401
