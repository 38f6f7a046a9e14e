"""Placement benchmark over synthetic cluttered tables.

Four variants run on every scene: the location finder and a center-of-table
baseline, each with and without rotation refinement. The metric is the
penetration fraction of the placed object against the full scene. Output is
a small CSV plus a JSON report; per-scene failures are logged and excluded
with a count.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from sceneedit.config import FilterConfig
from sceneedit.errors import NoFeasibleLocation, NoSupportSurface
from sceneedit.grounding import Scene, ground
from sceneedit.mesh.sdf import SignedDistanceField
from sceneedit.placement import (
    filter_up_vertices,
    find_location,
    mask_covered_vertices,
    penetration_percent,
    placement_transform,
    refine_rotation,
)
from sceneedit.placement.locate import support_height
from sceneedit.placement.support import cluster_support
from sceneedit.synthetic import TableSceneSpec, make_cluttered_table_scene, random_primary

logger = logging.getLogger(__name__)

METHODS = ("baseline", "location_finder")
VARIANTS = ("raw", "refined")


@dataclass(frozen=True)
class BenchConfig:
    scenes: int = 50
    seed: int = 0
    out_dir: str = "bench_out"
    filter: FilterConfig = field(default_factory=FilterConfig)
    scene_spec: TableSceneSpec = field(default_factory=TableSceneSpec)


@dataclass
class BenchReport:
    means: dict            # {(method, variant): mean fraction}
    counts: dict           # {(method, variant): samples}
    failures: int
    runtime_seconds: float

    def to_json(self) -> dict:
        return {
            "means": {f"{m}/{v}": self.means[(m, v)] for m, v in self.means},
            "counts": {f"{m}/{v}": self.counts[(m, v)] for m, v in self.counts},
            "failures": self.failures,
            "runtime_seconds": self.runtime_seconds,
        }


def _baseline_location(grounded_submesh, cfg: FilterConfig) -> np.ndarray:
    """Center of the grounding object's footprint at its support height."""
    ids = filter_up_vertices(grounded_submesh, cfg)
    clusters = cluster_support(grounded_submesh.vertices[ids], cfg)
    cluster = clusters[0]
    box = grounded_submesh.aabb
    x, y = float(box.center[0]), float(box.center[1])
    return np.array([x, y, support_height(cluster, x, y, cfg.z_neighbors)])


def evaluate_scene(scene: Scene, primary, cfg: FilterConfig) -> dict:
    """Penetration fraction for each (method, variant) on one scene."""
    grounded = ground(scene, "table", backend="annotations")
    sdf = SignedDistanceField(scene.mesh)
    width = float(primary.aabb.extents[0])

    results = {}
    ids = filter_up_vertices(grounded.submesh, cfg)
    masked = mask_covered_vertices(grounded.submesh, ids, sdf,
                                   max(width / cfg.n, 4.0 * cfg.contact_epsilon))
    locations = {
        "baseline": _baseline_location(grounded.submesh, cfg),
        "location_finder": find_location(grounded.submesh, width, cfg,
                                         support_ids=masked).location,
    }
    for method, location in locations.items():
        raw_pose = placement_transform(primary, location, 0.0).apply_points(primary.vertices)
        raw = penetration_percent(raw_pose, sdf, support_z=float(location[2]),
                                  contact_epsilon=cfg.contact_epsilon)
        refined = refine_rotation(primary, location, sdf, cfg)
        results[(method, "raw")] = raw.fraction
        results[(method, "refined")] = refined.penetration_after
    return results


def run_bench(config: BenchConfig) -> BenchReport:
    started = time.monotonic()
    sums = {(m, v): 0.0 for m in METHODS for v in VARIANTS}
    counts = {(m, v): 0 for m in METHODS for v in VARIANTS}
    failures = 0
    for k in range(config.scenes):
        seed = config.seed + k
        try:
            scene = make_cluttered_table_scene(seed, config.scene_spec)
            primary = random_primary(seed)
            results = evaluate_scene(scene, primary, config.filter)
        except (NoFeasibleLocation, NoSupportSurface) as exc:
            failures += 1
            logger.warning("scene %d failed: %s", seed, exc)
            continue
        for key, value in results.items():
            sums[key] += value
            counts[key] += 1
    means = {
        key: (sums[key] / counts[key]) if counts[key] else float("nan") for key in sums
    }
    report = BenchReport(
        means=means,
        counts=counts,
        failures=failures,
        runtime_seconds=time.monotonic() - started,
    )
    if config.scenes == 0:
        logger.warning("benchmark ran over zero scenes; report is empty")
    _write_report(report, Path(config.out_dir))
    return report


def _write_report(report: BenchReport, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "penetration.csv").open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["method", "variant", "mean_penetration", "samples"])
        for method in METHODS:
            for variant in VARIANTS:
                key = (method, variant)
                writer.writerow([method, variant,
                                 f"{report.means[key]:.6f}", report.counts[key]])
    (out_dir / "report.json").write_text(
        json.dumps(report.to_json(), indent=1), encoding="utf-8"
    )
