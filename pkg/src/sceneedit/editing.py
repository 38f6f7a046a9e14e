"""Edit orchestration over a scene: insertion, replacement, deletion with
cavity inpainting, translation/rotation manoeuvres, and undo.

Every operation is atomic: it assembles a complete new Scene value and only
then commits it to the session, so any error leaves the session untouched.
History snapshots are references to immutable scenes, which makes undo exact
to the byte. The op log mirrors the history with JSON-serializable entries
so a session directory can be replayed offline.
"""

from __future__ import annotations

import json
import logging
import math
import re
import threading
import uuid
from dataclasses import dataclass, field, replace as dc_replace
from pathlib import Path

import numpy as np

from sceneedit.assets import AssetRequest, AssetStore, normalize_asset
from sceneedit.config import FilterConfig, RunConfig
from sceneedit.errors import (
    EmptyHistory,
    NoFeasibleLocation,
    NoSupportSurface,
    NotFound,
    UnknownCategory,
    UnknownTag,
)
from sceneedit.grounding import (
    GroundedObject,
    GroundingClient,
    ObjectRecord,
    Scene,
    VertexAnnotations,
    ground,
)
from sceneedit.holes import (
    boundary_loops,
    orient_fill,
    subdivide_patch,
    triangulate_loop,
)
from sceneedit.mesh.core import (
    TriangleMesh,
    apply_transform,
    compute_vertex_normals,
    merge,
    remove_faces_mapped,
)
from sceneedit.mesh.io import load_mesh
from sceneedit.mesh.sdf import SignedDistanceField
from sceneedit.nlp import EditTask, validate_task
from sceneedit.placement import (
    PlacementResult,
    filter_up_vertices,
    find_location,
    mask_covered_vertices,
    penetration_percent,
    placement_transform,
    refine_rotation,
)
from sceneedit.placement.support import cluster_support
from sceneedit.scaling import PriorTable, ScaleEstimate, apply_scale, estimate_scale

logger = logging.getLogger(__name__)


@dataclass
class EditContext:
    """Backends and knobs shared by all operations of one run."""

    filter: FilterConfig = field(default_factory=FilterConfig)
    assets: AssetStore = field(default_factory=AssetStore)
    asset_sources: tuple[str, ...] = ("library", "procedural")
    grounding_backend: str = "annotations"
    grounding_client: GroundingClient | None = None
    scale_backend: str = "prior_table"
    scale_cap: float = 0.8
    scale_samples: int = 5
    prior_table: PriorTable | None = None
    image_client: object | None = None
    detector_client: object | None = None
    seed: int = 0

    @classmethod
    def from_run_config(cls, cfg: RunConfig) -> "EditContext":
        return cls(
            filter=cfg.filter,
            assets=AssetStore(library_dir=cfg.asset_library),
            asset_sources=tuple(cfg.asset_sources),
            scale_backend="prior_table" if cfg.scale_source == "priors" else "detector",
            scale_cap=cfg.scale_cap,
            scale_samples=cfg.scale_samples,
            seed=cfg.seed,
        )


@dataclass(frozen=True)
class EditOutcome:
    scene: Scene
    placement: PlacementResult | None = None
    affected_tags: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "affected_tags": list(self.affected_tags),
            "warnings": list(self.warnings),
            "placement": None if self.placement is None else self.placement.summary(),
        }


class EditSession:
    """One editable scene with linear history. Writers must hold the lock;
    ``acquire_writer`` is non-blocking so contention surfaces immediately."""

    def __init__(self, scene: Scene, session_id: str | None = None, seed: int = 0):
        self.id = session_id or uuid.uuid4().hex[:12]
        self.initial_scene = scene
        self.scene = scene
        self.history: list[tuple[str, Scene]] = []
        self.op_log: list[dict] = []
        self.last_placement: PlacementResult | None = None
        self.seed = seed
        self._write_lock = threading.Lock()
        self._tag_counter = 0

    def acquire_writer(self) -> bool:
        return self._write_lock.acquire(blocking=False)

    def release_writer(self) -> None:
        self._write_lock.release()

    def fresh_tag(self, label: str) -> str:
        stem = re.sub(r"[^a-z0-9]+", "_", label.lower()).strip("_") or "object"
        while True:
            self._tag_counter += 1
            tag = f"{stem}_{self._tag_counter}"
            if tag not in self.scene.mesh.face_tags:
                return tag

    def _commit(self, op_name: str, log_entry: dict, new_scene: Scene) -> None:
        self.history.append((op_name, self.scene))
        self.op_log.append(log_entry)
        self.scene = new_scene

    def undo(self) -> Scene:
        if not self.history:
            raise EmptyHistory("nothing to undo")
        _, previous = self.history.pop()
        self.op_log.append({"op": "undo"})
        self.scene = previous
        return previous


# --- scene loading -------------------------------------------------------------


def load_scene(
    scene_path: str | Path,
    annotations_path: str | Path | None = None,
    unit_scale: float = 1.0,
) -> Scene:
    """Load a scene plus optional annotation sidecar.

    ``unit_scale`` converts mismatched-unit scans to meters at ingest (e.g.
    1000 for a millimeter export); geometry is otherwise taken as meters.
    """
    mesh = load_mesh(scene_path)
    if unit_scale != 1.0:
        if unit_scale <= 0:
            raise ValueError(f"unit_scale must be positive, got {unit_scale}")
        mesh = TriangleMesh(mesh.vertices / unit_scale, mesh.faces,
                            mesh.vertex_normals, mesh.name, mesh.face_tags)
    annotations = VertexAnnotations.load(annotations_path) if annotations_path else None
    return Scene(mesh=mesh, annotations=annotations)


# --- insertion -------------------------------------------------------------------


def _resolve_scale(ctx: EditContext, primary: str, grounding: str,
                   warnings: list[str]) -> ScaleEstimate | None:
    try:
        return estimate_scale(
            primary,
            grounding,
            backend=ctx.scale_backend,
            k_images=ctx.scale_samples,
            image_client=ctx.image_client,
            detector_client=ctx.detector_client,
            prior_table=ctx.prior_table,
            max_scale_cap=ctx.scale_cap,
            seed=ctx.seed,
        )
    except UnknownCategory as exc:
        warnings.append(f"scale priors missing ({exc}); keeping native asset size")
        return None


def _scaled_primary(ctx: EditContext, asset_mesh: TriangleMesh, estimate: ScaleEstimate | None,
                    grounded: GroundedObject) -> TriangleMesh:
    if estimate is not None:
        return apply_scale(asset_mesh, estimate, grounded.aabb)
    # native size, clamped so the object still fits the realism cap
    max_width = ctx.scale_cap * float(grounded.aabb.extents[0])
    width = float(asset_mesh.aabb.extents[0])
    if width <= max_width:
        return asset_mesh
    capped = ScaleEstimate(scale=ctx.scale_cap, samples=(), source="prior_table", clamped=True)
    return apply_scale(asset_mesh, capped, grounded.aabb)


def _support_ids_minus_covered(
    grounded: GroundedObject, scene_sdf: SignedDistanceField,
    primary_width: float, cfg: FilterConfig,
) -> np.ndarray:
    ids = filter_up_vertices(grounded.submesh, cfg)
    probe = max(primary_width / cfg.n, 4.0 * cfg.contact_epsilon)
    return mask_covered_vertices(grounded.submesh, ids, scene_sdf, probe)


def insert(session: EditSession, task: EditTask, ctx: EditContext) -> EditOutcome:
    """Full insertion pipeline for the task's first primary entity."""
    validate_task(task)
    if task.kind != "insert":
        raise ValueError(f"insert called with task kind {task.kind!r}")
    scene = session.scene
    warnings: list[str] = []

    grounded = ground(scene, task.grounding_entity, backend=ctx.grounding_backend,
                      client=ctx.grounding_client)
    primary = task.primary_entities[0]
    record = ctx.assets.acquire(AssetRequest(primary, ctx.asset_sources, ctx.seed))
    estimate = _resolve_scale(ctx, primary, task.grounding_entity, warnings)
    scaled = _scaled_primary(ctx, record.mesh, estimate, grounded)
    primary_width = float(scaled.aabb.extents[0])

    scene_sdf = SignedDistanceField(scene.mesh)
    try:
        support_ids = _support_ids_minus_covered(grounded, scene_sdf, primary_width, ctx.filter)
    except NoSupportSurface as exc:
        raise NoFeasibleLocation(str(exc)) from exc
    location = find_location(grounded.submesh, primary_width, ctx.filter,
                             support_ids=support_ids)
    refined = refine_rotation(scaled, location.location, scene_sdf, ctx.filter,
                              base_result=location)
    transform = placement_transform(scaled, refined.location, refined.rotation_z)
    placed = apply_transform(scaled, transform)

    tag = session.fresh_tag(primary)
    new_mesh = merge(scene.mesh, placed, tag=tag)
    annotations = _extend_annotations(scene.annotations, len(placed.vertices))
    registry = dict(scene.object_registry)
    registry[tag] = ObjectRecord(
        label=primary,
        support_z=float(refined.location[2]),
        base_z=float(placed.vertices[:, 2].min()),
    )
    new_scene = Scene(mesh=new_mesh, annotations=annotations, object_registry=registry)
    session._commit("insert", {"op": "insert", "task": task.to_json()}, new_scene)
    session.last_placement = refined
    return EditOutcome(
        scene=new_scene,
        placement=refined,
        affected_tags=(tag,),
        warnings=tuple(warnings),
    )


def insert_iterative(session: EditSession, task: EditTask, ctx: EditContext) -> list[EditOutcome]:
    """Insert each primary in prompt order; every insertion sees the scene
    with all previous ones. Stops with a warning when space runs out."""
    validate_task(task)
    outcomes: list[EditOutcome] = []
    for index, primary in enumerate(task.primary_entities):
        single = dc_replace(task, primary_entities=(primary,))
        try:
            outcomes.append(insert(session, single, ctx))
        except NoFeasibleLocation as exc:
            warning = (f"stopped after {index} of {len(task.primary_entities)} objects: "
                       f"insufficient space for {primary!r} ({exc})")
            logger.warning(warning)
            if outcomes:
                outcomes[-1] = dc_replace(
                    outcomes[-1], warnings=outcomes[-1].warnings + (warning,)
                )
            else:
                outcomes.append(EditOutcome(scene=session.scene, warnings=(warning,)))
            break
    return outcomes


def _extend_annotations(annotations: VertexAnnotations | None, extra: int) -> VertexAnnotations | None:
    if annotations is None:
        return None
    ids = np.concatenate([annotations.instance_ids, np.full(extra, -1, dtype=np.int64)])
    labels = np.concatenate([np.asarray(annotations.labels, dtype=object),
                             np.full(extra, "", dtype=object)])
    return VertexAnnotations(ids, labels)


# --- deletion --------------------------------------------------------------------


def _instance_faces(scene: Scene, grounded: GroundedObject) -> np.ndarray:
    if grounded.registry_tag is not None:
        return scene.registered_faces(grounded.registry_tag)
    selected = np.zeros(len(scene.mesh.vertices), dtype=bool)
    selected[grounded.vertex_ids] = True
    return np.flatnonzero(selected[scene.mesh.faces].all(axis=1))


def _cascade_tags(scene: Scene, grounded: GroundedObject, cfg: FilterConfig,
                  exclude: set[str]) -> list[str]:
    """Registered objects resting on the grounded object: base height within
    the contact band of one of its support levels, XY boxes overlapping."""
    try:
        ids = filter_up_vertices(grounded.submesh, cfg)
        clusters = cluster_support(grounded.submesh.vertices[ids], cfg)
        levels = [c.z_level for c in clusters]
    except Exception:
        return []
    cascading = []
    for tag in sorted(scene.object_registry):
        if tag in exclude:
            continue
        faces = scene.registered_faces(tag)
        verts = scene.mesh.vertices[np.unique(scene.mesh.faces[faces].ravel())]
        base_z = float(verts[:, 2].min())
        if not any(abs(base_z - z) <= cfg.contact_epsilon for z in levels):
            continue
        lo, hi = verts[:, :2].min(axis=0), verts[:, :2].max(axis=0)
        glo, ghi = grounded.aabb.min[:2], grounded.aabb.max[:2]
        if np.all(lo <= ghi) and np.all(glo <= hi):
            cascading.append(tag)
    return cascading


def _median_edge_length(mesh: TriangleMesh) -> float:
    f = mesh.faces
    segs = np.concatenate([
        mesh.vertices[f[:, 0]] - mesh.vertices[f[:, 1]],
        mesh.vertices[f[:, 1]] - mesh.vertices[f[:, 2]],
        mesh.vertices[f[:, 2]] - mesh.vertices[f[:, 0]],
    ])
    return float(np.median(np.linalg.norm(segs, axis=1)))


def _remove_and_inpaint(scene: Scene, face_ids: np.ndarray,
                        warnings: list[str]) -> tuple[TriangleMesh, VertexAnnotations | None, dict]:
    """Remove faces, close the resulting rims, subdivide the fills.

    Returns (mesh, annotations, fill_stats) where fill_stats maps loop sizes
    to fill face counts for verification.
    """
    mesh = scene.mesh
    removed = np.zeros(len(mesh.faces), dtype=bool)
    removed[np.asarray(face_ids, dtype=np.int64)] = True

    # rim edges sit between a removed face and a kept face
    def directed_edges(face_subset: np.ndarray) -> set[tuple[int, int]]:
        out: set[tuple[int, int]] = set()
        for a, b, c in mesh.faces[face_subset]:
            out.add((int(a), int(b)))
            out.add((int(b), int(c)))
            out.add((int(c), int(a)))
        return out

    kept_directed = directed_edges(~removed)
    removed_directed = directed_edges(removed)
    kept_undirected = {tuple(sorted(e)) for e in kept_directed}
    removed_undirected = {tuple(sorted(e)) for e in removed_directed}
    rim = kept_undirected & removed_undirected

    new_mesh, vmap, _ = remove_faces_mapped(mesh, face_ids)
    annotations = scene.annotations
    if annotations is not None:
        keep = vmap >= 0
        annotations = VertexAnnotations(
            annotations.instance_ids[keep], np.asarray(annotations.labels)[keep]
        )

    loops, skipped = boundary_loops(rim)
    if skipped:
        warnings.append(f"{skipped} cavity rims were non-manifold and stay open")
    fill_stats: dict = {"loops": [], "skipped": skipped}
    if not loops:
        return new_mesh, annotations, fill_stats

    max_edge = 2.0 * _median_edge_length(new_mesh) if len(new_mesh.faces) else np.inf
    rim_directed_new = {
        (int(vmap[u]), int(vmap[v]))
        for (u, v) in kept_directed
        if tuple(sorted((u, v))) in rim
    }

    all_vertices = new_mesh.vertices
    extra_faces: list[tuple[int, int, int]] = []
    ann_ids = list(annotations.instance_ids) if annotations is not None else None
    ann_labels = list(np.asarray(annotations.labels)) if annotations is not None else None

    for loop in loops:
        mapped = [int(vmap[v]) for v in loop]
        filled = triangulate_loop(all_vertices, mapped, next_index=len(all_vertices))
        if filled is None:
            warnings.append(f"cavity rim of {len(loop)} vertices self-intersects; left open")
            continue
        fill, fan_vertices = filled
        if len(fan_vertices):
            all_vertices = np.vstack([all_vertices, fan_vertices])
            if ann_ids is not None:
                for p in fan_vertices:
                    rim_pts = all_vertices[mapped]
                    nearest = mapped[int(np.argmin(np.linalg.norm(rim_pts - p, axis=1)))]
                    ann_ids.append(int(ann_ids[nearest]))
                    ann_labels.append(ann_labels[nearest])
        fill = orient_fill(fill, rim_directed_new)
        locked = {tuple(sorted((mapped[i], mapped[(i + 1) % len(mapped)])))
                  for i in range(len(mapped))}
        added, final = subdivide_patch(all_vertices, fill, locked, max_edge)
        if len(added):
            all_vertices = np.vstack([all_vertices, added])
            if ann_ids is not None:
                # new vertices inherit the nearest rim vertex's annotation
                rim_pts = all_vertices[mapped]
                for p in added:
                    nearest = mapped[int(np.argmin(np.linalg.norm(rim_pts - p, axis=1)))]
                    ann_ids.append(int(ann_ids[nearest]))
                    ann_labels.append(ann_labels[nearest])
        extra_faces.extend(final)
        fill_stats["loops"].append({"boundary": len(loop), "fill_faces": len(final)})

    faces = np.vstack([new_mesh.faces, np.asarray(extra_faces, dtype=np.int64).reshape(-1, 3)]) \
        if extra_faces else new_mesh.faces
    out = TriangleMesh(all_vertices, faces, None, new_mesh.name, new_mesh.face_tags)
    out = compute_vertex_normals(out) if len(out.faces) else out
    if annotations is not None:
        annotations = VertexAnnotations(np.asarray(ann_ids), np.asarray(ann_labels, dtype=object))
    return out, annotations, fill_stats


def delete(session: EditSession, task: EditTask, ctx: EditContext) -> EditOutcome:
    """Remove the grounded object, cascade to objects resting on it, and
    inpaint the cavities left behind."""
    validate_task(task)
    if task.kind != "delete":
        raise ValueError(f"delete called with task kind {task.kind!r}")
    scene = session.scene
    warnings: list[str] = []

    grounded = ground(scene, task.grounding_entity, backend=ctx.grounding_backend,
                      client=ctx.grounding_client)
    exclude = {grounded.registry_tag} if grounded.registry_tag else set()
    cascade = _cascade_tags(scene, grounded, ctx.filter, exclude)
    face_ids = [_instance_faces(scene, grounded)]
    face_ids += [scene.registered_faces(tag) for tag in cascade]
    all_faces = np.unique(np.concatenate(face_ids))
    if all_faces.size == 0:
        raise NotFound(f"grounded {task.grounding_entity!r} has no faces to delete")

    new_mesh, annotations, fill_stats = _remove_and_inpaint(scene, all_faces, warnings)
    registry = {
        tag: record
        for tag, record in scene.object_registry.items()
        if tag != grounded.registry_tag and tag not in cascade and tag in new_mesh.face_tags
    }
    new_scene = Scene(mesh=new_mesh, annotations=annotations, object_registry=registry)
    session._commit("delete", {"op": "delete", "task": task.to_json()}, new_scene)
    affected = tuple(t for t in [grounded.registry_tag, *cascade] if t)
    return EditOutcome(scene=new_scene, affected_tags=affected or (task.grounding_entity,),
                       warnings=tuple(warnings))


# --- replacement -----------------------------------------------------------------


def replace(session: EditSession, task: EditTask, ctx: EditContext,
            provided_mesh: TriangleMesh | None = None) -> EditOutcome:
    """Swap the grounded object for the requested one, fit inside its box."""
    validate_task(task)
    if task.kind != "replace":
        raise ValueError(f"replace called with task kind {task.kind!r}")
    scene = session.scene
    warnings: list[str] = []

    grounded = ground(scene, task.grounding_entity, backend=ctx.grounding_backend,
                      client=ctx.grounding_client)
    target = grounded.aabb
    base_location = np.array([target.center[0], target.center[1], target.min[2]])

    if provided_mesh is not None:
        replacement = provided_mesh
        label = task.primary_entities[0] if task.primary_entities else grounded.label
    else:
        entity = task.primary_entities[0] if task.primary_entities else task.grounding_entity
        record = ctx.assets.acquire(AssetRequest(entity, ctx.asset_sources, ctx.seed))
        replacement = record.mesh
        label = entity
        if not task.primary_entities:
            warnings.append(f"no substitute named; using a similar {entity!r}")

    normalized = normalize_asset(replacement)
    extents = normalized.aabb.extents
    with np.errstate(divide="ignore"):
        factor = float(np.min(np.where(extents > 0, target.extents / extents, np.inf)))
    if not np.isfinite(factor) or factor <= 0:
        raise ValueError("replacement mesh has no positive extent")
    fitted = TriangleMesh(normalized.vertices * factor, normalized.faces, None,
                          normalized.name, normalized.face_tags)
    fitted = normalize_asset(fitted)
    # fitted box is XY-centered with base at z=0: offsetting by the recorded
    # base location centers it on the old footprint at the old base height
    placed = TriangleMesh(fitted.vertices + base_location, fitted.faces, None, fitted.name,
                          fitted.face_tags)
    placed = compute_vertex_normals(placed)

    face_ids = _instance_faces(scene, grounded)
    new_mesh, annotations, _ = _remove_and_inpaint(scene, face_ids, warnings)
    tag = session.fresh_tag(label)
    merged = merge(new_mesh, placed, tag=tag)
    annotations = _extend_annotations(annotations, len(placed.vertices))
    registry = {
        t: r for t, r in scene.object_registry.items()
        if t != grounded.registry_tag and t in merged.face_tags
    }
    registry[tag] = ObjectRecord(
        label=label,
        support_z=float(base_location[2]),
        base_z=float(placed.vertices[:, 2].min()),
    )
    new_scene = Scene(mesh=merged, annotations=annotations, object_registry=registry)
    session._commit(
        "replace",
        {"op": "replace", "task": task.to_json(),
         "provided_mesh": _mesh_to_log(provided_mesh)},
        new_scene,
    )
    return EditOutcome(scene=new_scene, affected_tags=(tag,), warnings=tuple(warnings))


def _mesh_to_log(mesh: TriangleMesh | None) -> dict | None:
    if mesh is None:
        return None
    return {
        "vertices": [[float(x) for x in v] for v in mesh.vertices],
        "faces": [[int(i) for i in f] for f in mesh.faces],
    }


def _mesh_from_log(doc: dict | None) -> TriangleMesh | None:
    if doc is None:
        return None
    return compute_vertex_normals(TriangleMesh(np.asarray(doc["vertices"]),
                                               np.asarray(doc["faces"])))


# --- manoeuvres ------------------------------------------------------------------


def _tag_vertex_ids(scene: Scene, tag: str) -> np.ndarray:
    if tag not in scene.object_registry:
        raise UnknownTag(f"no registered object under tag {tag!r}")
    faces = scene.registered_faces(tag)
    return np.unique(scene.mesh.faces[faces].ravel())


def _object_base_centroid(scene: Scene, tag: str) -> np.ndarray:
    verts = scene.mesh.vertices[_tag_vertex_ids(scene, tag)]
    z_min = float(verts[:, 2].min())
    band = verts[:, 2] <= z_min + 0.05 * max(float(verts[:, 2].max()) - z_min, 0.0)
    base = verts[band]
    return np.array([float(base[:, 0].mean()), float(base[:, 1].mean()), z_min])


def translate(session: EditSession, tag: str, target_points) -> EditOutcome:
    """Move the object so its base centroid lands on the mean of the picked
    points (all three coordinates; picked points sit on the support)."""
    points = np.asarray(target_points, dtype=np.float64).reshape(-1, 3)
    if len(points) == 0:
        raise ValueError("translate needs at least one target point")
    scene = session.scene
    ids = _tag_vertex_ids(scene, tag)
    target = points.mean(axis=0)
    delta = target - _object_base_centroid(scene, tag)

    vertices = scene.mesh.vertices.copy()
    vertices[ids] += delta
    mesh = TriangleMesh(vertices, scene.mesh.faces, scene.mesh.vertex_normals,
                        scene.mesh.name, scene.mesh.face_tags)
    registry = dict(scene.object_registry)
    old = registry[tag]
    registry[tag] = ObjectRecord(label=old.label, support_z=float(target[2]),
                                 base_z=float(vertices[ids][:, 2].min()))
    new_scene = Scene(mesh=mesh, annotations=scene.annotations, object_registry=registry)
    session._commit(
        "translate",
        {"op": "translate", "tag": tag, "points": [[float(x) for x in p] for p in points]},
        new_scene,
    )
    return EditOutcome(scene=new_scene, affected_tags=(tag,))


def rotate(session: EditSession, tag: str, angle: float, direction: str = "ccw") -> EditOutcome:
    """Rotate the object about the vertical axis through its base centroid;
    counterclockwise is positive, clockwise negates the angle."""
    if direction not in ("cw", "ccw"):
        raise ValueError(f"direction must be cw or ccw, got {direction!r}")
    signed = angle if direction == "ccw" else -angle
    scene = session.scene
    ids = _tag_vertex_ids(scene, tag)
    pivot = _object_base_centroid(scene, tag)
    c, s = math.cos(signed), math.sin(signed)

    vertices = scene.mesh.vertices.copy()
    local = vertices[ids] - pivot
    rotated = np.empty_like(local)
    rotated[:, 0] = c * local[:, 0] - s * local[:, 1]
    rotated[:, 1] = s * local[:, 0] + c * local[:, 1]
    rotated[:, 2] = local[:, 2]
    vertices[ids] = rotated + pivot

    normals = scene.mesh.vertex_normals
    if normals is not None:
        normals = normals.copy()
        sub = normals[ids]
        turned = np.empty_like(sub)
        turned[:, 0] = c * sub[:, 0] - s * sub[:, 1]
        turned[:, 1] = s * sub[:, 0] + c * sub[:, 1]
        turned[:, 2] = sub[:, 2]
        normals[ids] = turned
    mesh = TriangleMesh(vertices, scene.mesh.faces, normals, scene.mesh.name,
                        scene.mesh.face_tags)
    new_scene = Scene(mesh=mesh, annotations=scene.annotations,
                      object_registry=dict(scene.object_registry))
    session._commit(
        "rotate",
        {"op": "rotate", "tag": tag, "angle": float(angle), "direction": direction},
        new_scene,
    )
    return EditOutcome(scene=new_scene, affected_tags=(tag,))


# --- verification helper -----------------------------------------------------------


def object_penetration(scene: Scene, tag: str, cfg: FilterConfig) -> float:
    """Recompute the inserted object's penetration against the rest of the
    scene; matches the value reported at insert time."""
    if tag not in scene.object_registry:
        raise UnknownTag(f"no registered object under tag {tag!r}")
    record = scene.object_registry[tag]
    faces = scene.registered_faces(tag)
    ids = np.unique(scene.mesh.faces[faces].ravel())
    rest, _, _ = remove_faces_mapped(scene.mesh, faces)
    sdf = SignedDistanceField(rest)
    report = penetration_percent(
        scene.mesh.vertices[ids], sdf,
        support_z=record.support_z, contact_epsilon=cfg.contact_epsilon,
    )
    return report.fraction


# --- session persistence -------------------------------------------------------------


def dispatch(session: EditSession, task: EditTask, ctx: EditContext,
             provided_mesh: TriangleMesh | None = None) -> list[EditOutcome]:
    """Route a validated task to the right operation."""
    if task.kind == "insert":
        if len(task.primary_entities) > 1:
            return insert_iterative(session, task, ctx)
        return [insert(session, task, ctx)]
    if task.kind == "replace":
        return [replace(session, task, ctx, provided_mesh=provided_mesh)]
    return [delete(session, task, ctx)]


def save_session(session: EditSession, directory: str | Path) -> None:
    """Persist the initial scene and the replayable op log."""
    from sceneedit.mesh.io import save_mesh

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_mesh(session.initial_scene.mesh, directory / "initial.ply")
    if session.initial_scene.annotations is not None:
        session.initial_scene.annotations.save(directory / "initial_annotations.json")
    (directory / "oplog.json").write_text(
        json.dumps({"id": session.id, "seed": session.seed, "ops": session.op_log}, indent=1),
        encoding="utf-8",
    )


def replay_session(directory: str | Path, ctx: EditContext) -> EditSession:
    """Rebuild a session by re-running its op log from the initial scene."""
    directory = Path(directory)
    doc = json.loads((directory / "oplog.json").read_text(encoding="utf-8"))
    annotations = directory / "initial_annotations.json"
    scene = load_scene(directory / "initial.ply",
                       annotations if annotations.exists() else None)
    session = EditSession(scene, session_id=doc.get("id"), seed=doc.get("seed", 0))
    for entry in doc.get("ops", []):
        op = entry["op"]
        if op == "undo":
            session.undo()
        elif op in ("insert", "replace", "delete"):
            task = EditTask.from_json(entry["task"])
            dispatch(session, task, ctx, provided_mesh=_mesh_from_log(entry.get("provided_mesh")))
        elif op == "translate":
            translate(session, entry["tag"], entry["points"])
        elif op == "rotate":
            rotate(session, entry["tag"], entry["angle"], entry["direction"])
        else:
            raise ValueError(f"unknown op {op!r} in session log")
    return session
