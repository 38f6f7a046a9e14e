"""Locating the grounding object inside a scene.

Two backends: an HTTP client for an open-vocabulary 3D instance segmenter,
and an offline fallback that matches dataset annotations (per-vertex labels
plus instance ids) against the query through a synonym table. Objects that
were inserted by this package are registered on the scene and are matched
by label as well, so they can be grounded for deletion or replacement.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import requests

from sceneedit.errors import BackendError, EmptySelection, NotFound
from sceneedit.mesh.core import Aabb, TriangleMesh

logger = logging.getLogger(__name__)

_SYNONYM_PATH = Path(__file__).parent / "data" / "synonyms.json"


@dataclass(frozen=True)
class VertexAnnotations:
    """Per-vertex instance ids and label strings, sidecar to a scene mesh."""

    instance_ids: np.ndarray   # (V,) int64, -1 = unlabeled
    labels: np.ndarray         # (V,) unicode

    def __post_init__(self):
        ids = np.ascontiguousarray(np.asarray(self.instance_ids, dtype=np.int64))
        labels = np.asarray(self.labels)
        ids.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "instance_ids", ids)
        object.__setattr__(self, "labels", labels)
        if len(ids) != len(labels):
            raise ValueError("instance_ids and labels must have equal length")

    @classmethod
    def load(cls, path: str | Path) -> "VertexAnnotations":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(np.asarray(doc["instance_ids"]), np.asarray(doc["vertex_labels"]))

    def save(self, path: str | Path) -> None:
        doc = {
            "instance_ids": [int(i) for i in self.instance_ids],
            "vertex_labels": [str(s) for s in self.labels],
        }
        Path(path).write_text(json.dumps(doc), encoding="utf-8")


@dataclass(frozen=True)
class ObjectRecord:
    """Registry entry for an object inserted or adopted by the editor."""

    label: str
    support_z: float | None = None  # height of the surface it rests on
    base_z: float | None = None


@dataclass(frozen=True)
class Scene:
    """Scene mesh plus optional annotations and the edited-object registry.

    Registry face sets live on the mesh's face tags; the registry itself
    holds per-object metadata. Scenes are immutable; edits build new ones.
    """

    mesh: TriangleMesh
    annotations: VertexAnnotations | None = None
    object_registry: dict[str, ObjectRecord] = field(default_factory=dict)

    def __post_init__(self):
        if self.annotations is not None and len(self.annotations.instance_ids) != len(self.mesh.vertices):
            raise ValueError("annotation arrays must match the vertex count")
        missing = [t for t in self.object_registry if t not in self.mesh.face_tags]
        if missing:
            raise ValueError(f"registry tags missing from mesh face tags: {missing}")
        if self.object_registry:
            sets = [self.mesh.face_tags[t] for t in self.object_registry]
            total = sum(len(s) for s in sets)
            if len(np.unique(np.concatenate(sets))) != total:
                raise ValueError("registry face sets must be disjoint")

    def registered_faces(self, tag: str) -> np.ndarray:
        return self.mesh.face_tags[tag]


@dataclass(frozen=True)
class GroundedObject:
    submesh: TriangleMesh
    vertex_ids: np.ndarray
    label: str
    aabb: Aabb
    confidence: float
    registry_tag: str | None = None  # set when the match is a registered object

    def __post_init__(self):
        ids = np.ascontiguousarray(np.asarray(self.vertex_ids, dtype=np.int64))
        ids.flags.writeable = False
        object.__setattr__(self, "vertex_ids", ids)
        if ids.size == 0:
            raise ValueError("grounded object needs at least one vertex")


class SynonymTable:
    def __init__(self, path: str | Path = _SYNONYM_PATH):
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        self._canon: dict[str, str] = {}
        for group in doc.get("groups", []):
            canonical = group[0]
            for word in group:
                self._canon[_normalize(word)] = canonical

    def canonical(self, phrase: str) -> str:
        norm = _normalize(phrase)
        return self._canon.get(norm, norm)

    def matches(self, query: str, label: str) -> bool:
        q, l = self.canonical(query), self.canonical(label)
        if q == l:
            return True
        # "coffee cup" should still find a plain "cup"
        q_last = q.split()[-1] if q else q
        l_last = l.split()[-1] if l else l
        return q_last == l or q == l_last or q_last == l_last


def _normalize(phrase: str) -> str:
    phrase = re.sub(r"[^a-z0-9 ]", " ", phrase.lower())
    words = [w[:-1] if len(w) > 3 and w.endswith("s") else w for w in phrase.split()]
    return " ".join(words)


@dataclass
class GroundingClient:
    """HTTP segmenter client: text query in, per-vertex mask indices out."""

    endpoint: str
    timeout: float = 60.0
    headers: dict = field(default_factory=dict)
    confidence_threshold: float = 0.5

    def query(self, scene_ref: str, entity_name: str) -> tuple[np.ndarray, float, str]:
        try:
            resp = requests.post(
                self.endpoint,
                json={"scene": scene_ref, "query": entity_name},
                headers=self.headers,
                timeout=self.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
        except requests.RequestException as exc:
            raise BackendError(f"grounding request failed: {exc}") from exc
        except ValueError as exc:
            raise BackendError(f"grounding returned non-JSON payload: {exc}") from exc
        ids = np.asarray(payload.get("vertex_ids", []), dtype=np.int64)
        return ids, float(payload.get("confidence", 0.0)), str(payload.get("label", entity_name))


def ground(
    scene: Scene,
    entity_name: str,
    backend: str = "annotations",
    client: GroundingClient | None = None,
    synonyms: SynonymTable | None = None,
) -> GroundedObject:
    """Find the best-scoring instance matching ``entity_name``.

    The annotation backend scores instances by vertex count; several matches
    are not an error (the largest wins, the rest are logged). Registered
    objects participate under their registry label.
    """
    if not entity_name:
        raise ValueError("entity name must be nonempty")
    if backend == "client":
        if client is None:
            raise BackendError("grounding backend 'client' needs a configured client")
        ids, confidence, label = client.query(scene.mesh.name or "scene", entity_name)
        if ids.size == 0 or confidence < client.confidence_threshold:
            raise NotFound(f"no instance of {entity_name!r} above confidence threshold")
        return _grounded_from_ids(scene, ids, label, confidence, None)
    if backend != "annotations":
        raise ValueError(f"unknown grounding backend {backend!r}")

    synonyms = synonyms or SynonymTable()
    candidates: list[tuple[int, int, np.ndarray, str, str | None]] = []
    if scene.annotations is not None:
        ann = scene.annotations
        matched = np.zeros(len(ann.labels), dtype=bool)
        labels = np.asarray(ann.labels)
        for label in np.unique(labels):
            if label and synonyms.matches(entity_name, str(label)):
                matched |= labels == label
        for instance in np.unique(ann.instance_ids[matched]):
            if instance < 0:
                continue
            ids = np.flatnonzero(matched & (ann.instance_ids == instance))
            label = str(labels[ids[0]])
            candidates.append((len(ids), int(instance), ids, label, None))
    for tag, record in scene.object_registry.items():
        if synonyms.matches(entity_name, record.label) or synonyms.matches(entity_name, tag):
            faces = scene.registered_faces(tag)
            ids = np.unique(scene.mesh.faces[faces].ravel())
            candidates.append((len(ids), 10**9, ids, record.label, tag))
    if not candidates:
        raise NotFound(f"no instance of {entity_name!r} in scene annotations or registry")
    candidates.sort(key=lambda c: (-c[0], c[1], c[4] or ""))
    if len(candidates) > 1:
        logger.info(
            "%d instances match %r; keeping the largest (%d vertices)",
            len(candidates), entity_name, candidates[0][0],
        )
    _, _, ids, label, tag = candidates[0]
    return _grounded_from_ids(scene, ids, label, 1.0, tag)


def _grounded_from_ids(
    scene: Scene, ids: np.ndarray, label: str, confidence: float, tag: str | None
) -> GroundedObject:
    submesh = extract_submesh(scene, ids)
    return GroundedObject(
        submesh=submesh,
        vertex_ids=ids,
        label=label,
        aabb=submesh.aabb,
        confidence=confidence,
        registry_tag=tag,
    )


def extract_submesh(scene: Scene, vertex_ids: np.ndarray) -> TriangleMesh:
    """Submesh over the given vertices: faces survive iff all three vertices
    are selected; vertices are reindexed densely in scene order."""
    vertex_ids = np.unique(np.asarray(vertex_ids, dtype=np.int64))
    if vertex_ids.size == 0:
        raise EmptySelection("no vertices selected")
    if vertex_ids.min() < 0 or vertex_ids.max() >= len(scene.mesh.vertices):
        raise ValueError("vertex ids outside the scene mesh")
    selected = np.zeros(len(scene.mesh.vertices), dtype=bool)
    selected[vertex_ids] = True
    keep_face = selected[scene.mesh.faces].all(axis=1)
    remap = np.full(len(scene.mesh.vertices), -1, dtype=np.int64)
    remap[vertex_ids] = np.arange(vertex_ids.size)
    faces = remap[scene.mesh.faces[keep_face]]
    normals = (
        scene.mesh.vertex_normals[vertex_ids]
        if scene.mesh.vertex_normals is not None
        else None
    )
    return TriangleMesh(scene.mesh.vertices[vertex_ids], faces, normals, scene.mesh.name)
