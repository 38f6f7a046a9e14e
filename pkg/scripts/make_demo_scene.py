#!/usr/bin/env python3
"""Generate a demo scene (floor + table + clutter) with its annotation sidecar.

The output pair feeds the CLI and the service, e.g.:

    python scripts/make_demo_scene.py --out demo
    sceneedit edit --scene demo/scene.ply --annotations demo/scene.json \
        --prompt "place a cup on the table" --out demo/edited.glb
"""

import argparse
from pathlib import Path

from sceneedit.mesh.io import save_mesh
from sceneedit.synthetic import make_cluttered_table_scene


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--clutter", type=int, default=2)
    parser.add_argument("--out", default="demo")
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scene = make_cluttered_table_scene(args.seed, clutter=args.clutter)
    save_mesh(scene.mesh, out / "scene.ply")
    scene.annotations.save(out / "scene.json")
    print(f"wrote {out / 'scene.ply'} ({len(scene.mesh.vertices)} vertices, "
          f"{len(scene.mesh.faces)} faces) and {out / 'scene.json'}")


if __name__ == "__main__":
    main()
