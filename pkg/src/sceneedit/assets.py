"""Primary-object mesh acquisition: generator client, local library, or
procedural primitives, tried in preference order with fallthrough.

Whatever the source, the returned mesh is normalized: XY bounding-box center
at the origin, base resting on z = 0. Records are cached per
(entity name, source, seed) with single-flight semantics so concurrent
requests for the same asset share one generation.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import requests

from sceneedit import primitives
from sceneedit.errors import AllBackendsFailed, BackendError, IoError, ParseError
from sceneedit.mesh.core import RigidTransform, TriangleMesh, compute_vertex_normals, face_normals_and_areas
from sceneedit.mesh.io import load_mesh

logger = logging.getLogger(__name__)

_ALIAS_PATH = Path(__file__).parent / "data" / "primitive_aliases.json"
_SOURCES = ("generator", "library", "procedural")


@dataclass(frozen=True)
class AssetRequest:
    entity_name: str
    source_preference: tuple[str, ...] = ("library", "procedural")
    seed: int = 0

    def __post_init__(self):
        if not self.entity_name:
            raise ValueError("entity name must be nonempty")
        prefs = tuple(self.source_preference)
        if not prefs:
            raise ValueError("source preference must be nonempty")
        if len(set(prefs)) != len(prefs):
            raise ValueError(f"duplicate sources in preference {prefs}")
        unknown = set(prefs) - set(_SOURCES)
        if unknown:
            raise ValueError(f"unknown asset sources {sorted(unknown)}")
        object.__setattr__(self, "source_preference", prefs)


@dataclass(frozen=True)
class AssetRecord:
    mesh: TriangleMesh
    source: str
    entity_name: str
    canonical_up: bool = True  # +Z after normalization

    def __post_init__(self):
        if len(self.mesh.vertices) == 0 or len(self.mesh.faces) == 0:
            raise ValueError("asset mesh must be nonempty")
        extents = self.mesh.aabb.extents
        if np.any(extents <= 0):
            raise ValueError(f"asset must have positive extent on all axes, got {extents}")


@dataclass
class GeneratorClient:
    """Text-to-mesh HTTP client: POST name + seed, receive an encoded mesh."""

    endpoint: str
    timeout: float = 60.0
    headers: dict = field(default_factory=dict)

    def generate(self, entity_name: str, seed: int, workdir: Path) -> TriangleMesh:
        try:
            resp = requests.post(
                self.endpoint,
                json={"name": entity_name, "seed": seed},
                headers=self.headers,
                timeout=self.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
        except requests.RequestException as exc:
            raise BackendError(f"generator request failed: {exc}") from exc
        except ValueError as exc:
            raise BackendError(f"generator returned non-JSON payload: {exc}") from exc
        fmt = payload.get("format", "obj")
        if "data_b64" in payload:
            data = base64.b64decode(payload["data_b64"])
        elif "url" in payload:
            try:
                follow = requests.get(payload["url"], timeout=self.timeout)
                follow.raise_for_status()
                data = follow.content
            except requests.RequestException as exc:
                raise BackendError(f"generator mesh download failed: {exc}") from exc
        else:
            raise BackendError("generator payload lacks data_b64/url")
        workdir.mkdir(parents=True, exist_ok=True)
        tmp = workdir / f"gen_{hashlib.sha1((entity_name + str(seed)).encode()).hexdigest()[:12]}.{fmt}"
        tmp.write_bytes(data)
        return load_mesh(tmp, format=fmt if fmt in ("obj", "ply", "gltf") else None)


class AssetStore:
    """Resolves AssetRequests against the configured backends."""

    def __init__(
        self,
        library_dir: str | Path | None = None,
        generator: GeneratorClient | None = None,
        alias_path: str | Path = _ALIAS_PATH,
        cache_dir: str | Path | None = None,
    ):
        self.library_dir = Path(library_dir) if library_dir else None
        self.generator = generator
        self.aliases = json.loads(Path(alias_path).read_text(encoding="utf-8"))
        self.cache_dir = Path(cache_dir) if cache_dir else Path(".sceneedit_cache")
        self._cache: dict[tuple, AssetRecord] = {}
        self._cache_lock = threading.Lock()
        self._inflight: dict[tuple, threading.Event] = {}

    # --- library ------------------------------------------------------------

    def list_library(self) -> list[str]:
        """Sorted unique entity names available as library files."""
        if self.library_dir is None:
            return []
        if not self.library_dir.is_dir():
            raise IoError(f"asset library {self.library_dir} is not a directory")
        names = {
            p.stem
            for p in self.library_dir.iterdir()
            if p.suffix.lower() in (".obj", ".ply", ".gltf", ".glb")
        }
        return sorted(names)

    def _library_lookup(self, entity_name: str) -> TriangleMesh:
        if self.library_dir is None:
            raise IoError("no asset library configured")
        stem = entity_name.strip().lower().replace(" ", "_")
        for suffix in (".obj", ".ply", ".gltf", ".glb"):
            candidate = self.library_dir / f"{stem}{suffix}"
            if candidate.exists():
                return load_mesh(candidate)
        raise IoError(f"library has no asset named {entity_name!r}")

    # --- procedural ---------------------------------------------------------

    def _procedural(self, entity_name: str) -> TriangleMesh:
        key = entity_name.strip().lower()
        if key in primitives.BUILDERS:
            return primitives.BUILDERS[key]()
        alias = self.aliases.get(key)
        if alias is None and " " in key:
            alias = self.aliases.get(key.split()[-1])
            if alias is None and key.split()[-1] in primitives.BUILDERS:
                return primitives.BUILDERS[key.split()[-1]]()
        if alias is None:
            raise ParseError(f"no procedural recipe for {entity_name!r}")
        kind = alias["kind"]
        w = float(alias.get("width", 0.2))
        d = float(alias.get("depth", w))
        h = float(alias.get("height", w))
        spacing = min(w, d, h) / 4.0
        if kind == "box":
            return primitives.box(w, d, h, spacing=spacing, name=entity_name)
        if kind == "cylinder":
            return primitives.cylinder(w / 2.0, h, spacing=spacing, name=entity_name)
        if kind == "cone":
            return primitives.cone(w / 2.0, h, name=entity_name)
        if kind == "sphere":
            return primitives.uv_sphere(w / 2.0, name=entity_name)
        raise ParseError(f"alias for {entity_name!r} names unknown primitive {kind!r}")

    # --- acquisition --------------------------------------------------------

    def acquire(self, request: AssetRequest) -> AssetRecord:
        """Resolve the request; raises AllBackendsFailed with per-source causes."""
        causes: dict[str, str] = {}
        for source in request.source_preference:
            key = (request.entity_name, source, request.seed)
            record = self._cache_get_or_wait(key)
            if record is not None:
                return record
            try:
                record = self._produce(request, source)
            except Exception as exc:
                causes[source] = str(exc)
                self._finish(key, None)
                logger.debug("asset source %s failed for %r: %s", source, request.entity_name, exc)
                continue
            self._finish(key, record)
            return record
        raise AllBackendsFailed(causes)

    def _produce(self, request: AssetRequest, source: str) -> AssetRecord:
        if source == "generator":
            if self.generator is None:
                raise BackendError("no generator client configured")
            mesh = self.generator.generate(request.entity_name, request.seed, self.cache_dir)
            mesh = reorient_flat_base(mesh)
        elif source == "library":
            mesh = self._library_lookup(request.entity_name)
        else:
            mesh = self._procedural(request.entity_name)
        return AssetRecord(
            mesh=normalize_asset(mesh).with_name(request.entity_name),
            source=source,
            entity_name=request.entity_name,
        )

    def _cache_get_or_wait(self, key: tuple) -> AssetRecord | None:
        while True:
            with self._cache_lock:
                if key in self._cache:
                    return self._cache[key]
                event = self._inflight.get(key)
                if event is None:
                    self._inflight[key] = threading.Event()
                    return None
            event.wait()

    def _finish(self, key: tuple, record: AssetRecord | None) -> None:
        with self._cache_lock:
            if record is not None:
                self._cache[key] = record
            event = self._inflight.pop(key, None)
        if event is not None:
            event.set()


def normalize_asset(mesh: TriangleMesh) -> TriangleMesh:
    """Center the XY bounding box on the origin and drop the base to z = 0."""
    box = mesh.aabb
    offset = np.array([
        -0.5 * (box.min[0] + box.max[0]),
        -0.5 * (box.min[1] + box.max[1]),
        -box.min[2],
    ])
    moved = TriangleMesh(mesh.vertices + offset, mesh.faces, None, mesh.name, mesh.face_tags)
    return compute_vertex_normals(moved) if len(moved.faces) else moved


def reorient_flat_base(mesh: TriangleMesh, min_area_fraction: float = 0.05) -> TriangleMesh:
    """Rotate a generated mesh so its dominant flat region faces -Z.

    Generator orientation is untrusted; when no axis direction carries at
    least ``min_area_fraction`` of the surface area as near-coplanar flat
    faces, the mesh is left untouched with a warning.
    """
    normals, areas = face_normals_and_areas(mesh)
    total = float(areas.sum())
    if total <= 0:
        return mesh
    directions = {
        "+x": np.array([1.0, 0, 0]), "-x": np.array([-1.0, 0, 0]),
        "+y": np.array([0, 1.0, 0]), "-y": np.array([0, -1.0, 0]),
        "+z": np.array([0, 0, 1.0]), "-z": np.array([0, 0, -1.0]),
    }
    cos_tol = math.cos(math.radians(10.0))
    flat = {
        name: float(areas[(normals @ d) >= cos_tol].sum()) for name, d in directions.items()
    }
    best = max(sorted(flat), key=lambda k: flat[k])
    if flat[best] < min_area_fraction * total:
        logger.warning("no dominant flat region found on %r; orientation kept", mesh.name)
        return mesh
    if best == "-z":
        return mesh
    # rotate the dominant flat direction onto -Z
    d = directions[best]
    target = directions["-z"]
    v = np.cross(d, target)
    c = float(d @ target)
    if np.linalg.norm(v) < 1e-12:
        rot = np.diag([1.0, -1.0, -1.0]) if c < 0 else np.eye(3)
    else:
        vx = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
        rot = np.eye(3) + vx + vx @ vx * (1.0 / (1.0 + c))
    rotated = TriangleMesh(mesh.vertices @ rot.T, mesh.faces, None, mesh.name, mesh.face_tags)
    return rotated
