"""Relative scale of the primary object with respect to the grounding object.

The detector path samples generated images of both objects together, reads
2D box widths for each, and keeps the minimum width ratio across images,
which the downstream placement treats as the object-to-surface scale. The
prior-table path divides typical physical widths and needs no services.
Either way the result is clamped to a realism cap.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import requests

from sceneedit.errors import (
    BackendError,
    ImageBackendError,
    NoValidImages,
    UnknownCategory,
)
from sceneedit.grounding import SynonymTable
from sceneedit.mesh.core import Aabb, TriangleMesh, compute_vertex_normals

logger = logging.getLogger(__name__)

_PRIORS_PATH = Path(__file__).parent / "data" / "scale_priors.json"
DEFAULT_SCALE_CAP = 0.8


@dataclass(frozen=True)
class BoundingBox2D:
    x_min: float
    y_min: float
    x_max: float
    y_max: float
    label: str
    score: float

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("2D box must have positive width and height")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min


@dataclass(frozen=True)
class ScaleEstimate:
    """Dimensionless primary/grounding width ratio, min over samples."""

    scale: float
    samples: tuple[tuple[float, float, float], ...]  # (W_p, W_g, ratio) per image
    source: str                                       # detector | prior_table
    clamped: bool = False

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")


@dataclass
class ImageClient:
    """Text-to-image HTTP client used to sample object pairs."""

    endpoint: str
    timeout: float = 60.0
    headers: dict = field(default_factory=dict)

    def generate(self, prompt: str, seed: int) -> str:
        try:
            resp = requests.post(
                self.endpoint,
                json={"prompt": prompt, "seed": seed},
                headers=self.headers,
                timeout=self.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
        except requests.RequestException as exc:
            raise ImageBackendError(f"image request failed: {exc}") from exc
        except ValueError as exc:
            raise ImageBackendError(f"image backend returned non-JSON: {exc}") from exc
        if "image_b64" not in payload:
            raise ImageBackendError("image payload lacks image_b64")
        return str(payload["image_b64"])


@dataclass
class DetectorClient:
    """Open-set 2D detector client: image plus label list in, boxes out."""

    endpoint: str
    timeout: float = 60.0
    headers: dict = field(default_factory=dict)

    def detect(self, image_b64: str, labels: list[str]) -> list[BoundingBox2D]:
        try:
            resp = requests.post(
                self.endpoint,
                json={"image_b64": image_b64, "labels": labels},
                headers=self.headers,
                timeout=self.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
        except requests.RequestException as exc:
            raise BackendError(f"detector request failed: {exc}") from exc
        except ValueError as exc:
            raise BackendError(f"detector returned non-JSON: {exc}") from exc
        boxes = []
        for raw in payload.get("boxes", []):
            boxes.append(BoundingBox2D(
                float(raw["x_min"]), float(raw["y_min"]),
                float(raw["x_max"]), float(raw["y_max"]),
                str(raw["label"]), float(raw.get("score", 1.0)),
            ))
        return boxes


def _best_box(boxes: list[BoundingBox2D], label: str) -> BoundingBox2D | None:
    matches = [b for b in boxes if b.label.lower() == label.lower()]
    return max(matches, key=lambda b: b.score) if matches else None


class PriorTable:
    def __init__(self, path: str | Path = _PRIORS_PATH, synonyms: SynonymTable | None = None):
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        self.widths = {k.lower(): float(v) for k, v in doc["widths"].items()}
        self.synonyms = synonyms or SynonymTable()

    def width_of(self, category: str) -> float:
        key = category.strip().lower()
        for candidate in (key, self.synonyms.canonical(key), key.split()[-1] if key else key):
            if candidate in self.widths:
                return self.widths[candidate]
        raise UnknownCategory(f"no physical-width prior for {category!r}")


def estimate_scale(
    primary: str,
    grounding: str,
    backend: str = "prior_table",
    k_images: int = 5,
    image_client: ImageClient | None = None,
    detector_client: DetectorClient | None = None,
    prior_table: PriorTable | None = None,
    max_scale_cap: float = DEFAULT_SCALE_CAP,
    seed: int = 0,
) -> ScaleEstimate:
    """Width ratio of primary to grounding, clamped to ``max_scale_cap``.

    Detector path: only images where both objects are detected contribute a
    sample; the minimum ratio wins. Raises NoValidImages when no image shows
    both objects.
    """
    if backend == "detector":
        if image_client is None or detector_client is None:
            raise BackendError("detector scale backend needs image and detector clients")
        if k_images < 1:
            raise ValueError("k_images must be >= 1 for the detector path")
        samples = []
        prompt = f"a {primary} on a {grounding}"
        for k in range(k_images):
            image = image_client.generate(prompt, seed=seed + k)
            boxes = detector_client.detect(image, [primary, grounding])
            box_p = _best_box(boxes, primary)
            box_g = _best_box(boxes, grounding)
            if box_p is None or box_g is None:
                logger.debug("image %d lacks one of the objects; skipped", k)
                continue
            samples.append((box_p.width, box_g.width, box_p.width / box_g.width))
        if not samples:
            raise NoValidImages(f"none of {k_images} images contained both objects")
        scale = min(s[2] for s in samples)
        source = "detector"
    elif backend == "prior_table":
        table = prior_table or PriorTable()
        w_p = table.width_of(primary)
        w_g = table.width_of(grounding)
        samples = [(w_p, w_g, w_p / w_g)]
        scale = w_p / w_g
        source = "prior_table"
    else:
        raise ValueError(f"unknown scale backend {backend!r}")

    clamped = scale > max_scale_cap
    if clamped:
        logger.info("scale %.4g clamped to cap %.4g", scale, max_scale_cap)
        scale = max_scale_cap
    return ScaleEstimate(scale=scale, samples=tuple(samples), source=source, clamped=clamped)


def apply_scale(obj: TriangleMesh, estimate: ScaleEstimate, grounding_aabb: Aabb) -> TriangleMesh:
    """Uniformly scale the object so its X width equals scale times the
    grounding X width, keeping the base at z = 0."""
    obj_width = float(obj.aabb.extents[0])
    if obj_width <= 0:
        raise ValueError("object has zero X extent")
    factor = estimate.scale * float(grounding_aabb.extents[0]) / obj_width
    scaled = obj.vertices * factor
    base = scaled[:, 2].min()
    offset = np.array([0.0, 0.0, -base])
    mesh = TriangleMesh(scaled + offset, obj.faces, None, obj.name, obj.face_tags)
    return compute_vertex_normals(mesh) if len(mesh.faces) else mesh
