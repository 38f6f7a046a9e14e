"""Command-line interface.

Subcommands: ``edit`` runs one prompt end-to-end and writes the edited mesh
plus a JSON report; ``serve`` starts the HTTP service; ``bench`` runs the
synthetic placement benchmark. Exit codes: 0 success, 1 edit error, 2
configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from sceneedit.config import FilterConfig, RunConfig, load_config_file
from sceneedit.editing import EditContext, EditSession, dispatch, load_scene, object_penetration
from sceneedit.errors import SceneEditError
from sceneedit.mesh.io import save_mesh
from sceneedit.nlp import classify_and_extract

logger = logging.getLogger(__name__)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sceneedit",
                                     description="Text-driven 3D scene editing")
    sub = parser.add_subparsers(dest="command", required=True)

    edit = sub.add_parser("edit", help="run one edit prompt end to end")
    edit.add_argument("--scene", required=True, help="scene mesh (obj/ply/gltf/glb)")
    edit.add_argument("--annotations", help="JSON sidecar with vertex labels")
    edit.add_argument("--prompt", required=True, help="edit instruction")
    edit.add_argument("--out", required=True, help="output mesh path (.glb/.ply/.obj)")
    edit.add_argument("--report", help="JSON report path (defaults next to --out)")
    _common_flags(edit)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--scene", help="optional scene used as a service default")
    serve.add_argument("--port", type=int, default=8030)
    _common_flags(serve)

    bench = sub.add_parser("bench", help="synthetic placement benchmark")
    bench.add_argument("--scenes", type=int, default=50)
    bench.add_argument("--out-dir", default="bench_out")
    _common_flags(bench)
    return parser


def _common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key = value config file")
    sub.add_argument("--nlp", choices=["fallback", "client"])
    sub.add_argument("--asset-source",
                     help="comma list of generator,library,procedural")
    sub.add_argument("--asset-library", help="directory of mesh assets")
    sub.add_argument("--scale-source", choices=["detector", "priors"])
    sub.add_argument("--scale-cap", type=float)
    sub.add_argument("--scale-samples", type=int)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--filter-n", type=int, help="filter side in cells")
    sub.add_argument("--threshold", type=float, help="occupancy threshold")
    sub.add_argument("--rotation-steps", type=int)


def _run_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = load_config_file(args.config, cfg)
    updates = {}
    for flag, key in (("nlp", "nlp"), ("asset_library", "asset_library"),
                      ("scale_cap", "scale_cap"), ("scale_samples", "scale_samples"),
                      ("seed", "seed")):
        value = getattr(args, flag, None)
        if value is not None:
            updates[key] = value
    if getattr(args, "asset_source", None):
        updates["asset_sources"] = tuple(
            s.strip() for s in args.asset_source.split(",") if s.strip()
        )
    if getattr(args, "scale_source", None):
        updates["scale_source"] = args.scale_source
    if getattr(args, "scene", None):
        updates["scene"] = args.scene
    if getattr(args, "annotations", None):
        updates["annotations"] = args.annotations
    if getattr(args, "out", None):
        updates["out"] = args.out
    if getattr(args, "port", None):
        updates["port"] = args.port
    filter_updates = {}
    if getattr(args, "filter_n", None) is not None:
        filter_updates["n"] = args.filter_n
    if getattr(args, "threshold", None) is not None:
        filter_updates["threshold"] = args.threshold
    if getattr(args, "rotation_steps", None) is not None:
        filter_updates["rotation_steps"] = args.rotation_steps
    if filter_updates:
        updates["filter"] = dataclasses.replace(cfg.filter, **filter_updates)
    return dataclasses.replace(cfg, **updates)


def run_edit(cfg: RunConfig, prompt: str, report_path: str | None = None) -> dict:
    """Shared by the CLI and tests: one prompt against one scene on disk."""
    scene = load_scene(cfg.scene, cfg.annotations, unit_scale=cfg.unit_scale)
    session = EditSession(scene, seed=cfg.seed)
    ctx = EditContext.from_run_config(cfg)
    task = classify_and_extract(prompt, backend=cfg.nlp)
    outcomes = dispatch(session, task, ctx)

    if cfg.out:
        save_mesh(session.scene.mesh, cfg.out)
    report = {
        "task": task.to_json(),
        "outcomes": [o.to_json() for o in outcomes],
        "scene": cfg.scene,
        "out": cfg.out,
        "seed": cfg.seed,
    }
    for outcome in outcomes:
        for tag in outcome.affected_tags:
            if tag in session.scene.object_registry:
                report.setdefault("penetration_check", {})[tag] = object_penetration(
                    session.scene, tag, cfg.filter
                )
    if report_path:
        Path(report_path).write_text(json.dumps(report, indent=1, sort_keys=True),
                                     encoding="utf-8")
    return report


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _run_config(args)
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "edit":
        if not Path(cfg.scene).exists():
            print(f"config error: scene file {cfg.scene!r} does not exist", file=sys.stderr)
            return 2
        if cfg.annotations and not Path(cfg.annotations).exists():
            print(f"config error: annotations file {cfg.annotations!r} does not exist",
                  file=sys.stderr)
            return 2
        report_path = args.report or (str(Path(cfg.out).with_suffix(".report.json"))
                                      if cfg.out else None)
        try:
            report = run_edit(cfg, args.prompt, report_path)
        except SceneEditError as exc:
            payload = {"error": type(exc).__name__, "detail": str(exc)}
            if report_path:
                Path(report_path).write_text(json.dumps(payload, indent=1),
                                             encoding="utf-8")
            print(f"edit error: {payload['error']}: {payload['detail']}", file=sys.stderr)
            return 1
        print(json.dumps(report["outcomes"], indent=1))
        return 0

    if args.command == "serve":
        from sceneedit.service import serve as run_service

        try:
            run_service(cfg)
        except OSError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        return 0

    if args.command == "bench":
        from sceneedit.bench import BenchConfig, run_bench

        report = run_bench(BenchConfig(scenes=args.scenes, seed=cfg.seed,
                                       out_dir=args.out_dir, filter=cfg.filter))
        print(json.dumps(report.to_json(), indent=1))
        if args.scenes == 0:
            print("warning: benchmark ran over zero scenes", file=sys.stderr)
        return 0

    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
