#!/usr/bin/env python3
"""Run the synthetic placement benchmark and print the 2x2 penetration table."""

import argparse
import logging

from sceneedit.bench import BenchConfig, METHODS, VARIANTS, run_bench
from sceneedit.config import FilterConfig


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenes", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default="bench_out")
    parser.add_argument("--threshold", type=float, default=0.9)
    parser.add_argument("--filter-n", type=int, default=3)
    parser.add_argument("--rotation-steps", type=int, default=24)
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    cfg = FilterConfig(n=args.filter_n, threshold=args.threshold,
                       rotation_steps=args.rotation_steps)
    report = run_bench(BenchConfig(scenes=args.scenes, seed=args.seed,
                                   out_dir=args.out_dir, filter=cfg))

    print(f"\n{args.scenes} scenes, {report.failures} failures, "
          f"{report.runtime_seconds:.1f} s\n")
    print(f"{'refinement':<12}{'location finder':>18}{'center baseline':>18}")
    for variant, label in (("raw", "no"), ("refined", "yes")):
        lf = report.means[("location_finder", variant)]
        base = report.means[("baseline", variant)]
        print(f"{label:<12}{lf:>17.2%}{base:>18.2%}")


if __name__ == "__main__":
    main()
