#!/usr/bin/env python3
"""Large-scale generation benchmark (opt-in; needs several GB of RAM).

Generates one graph at a substantial fraction of the reference target size
(default 37% of 3e7 vertices, roughly 11M leaves and half a billion
half-edges with the stock parameters) and reports wall-clock time per
stage plus headline tallies.  This is a throughput probe, not a test: it
asserts nothing and is skipped by the suite.  Run it only on a machine
with enough memory; --scale 0.05 is a gentler smoke value.
"""

from __future__ import annotations

import argparse
import resource
import sys
import time

from hag.fitting import TargetStats, fit_pipeline
from hag.pipeline import generate_graph


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scale", type=float, default=0.37,
                        help="leaf budget as a fraction of 3e7 (default 0.37)")
    parser.add_argument("--seed", type=int, default=1, help="master seed")
    parser.add_argument("--yes", action="store_true",
                        help="confirm you have the RAM (required above scale 0.05)")
    args = parser.parse_args(argv)

    if args.scale > 0.05 and not args.yes:
        print(
            f"scale {args.scale} allocates tens of millions of vertices; "
            "re-run with --yes to confirm (or use --scale 0.05).",
            file=sys.stderr,
        )
        return 2

    targets = TargetStats(
        vertices=3.0e7,
        labels=200.0,
        mean_agreement_degree=25.0,
        mean_conflict_degree=0.3,
        alcc=0.5,
        degree_variance=700.0,
    )
    t0 = time.perf_counter()
    fitted, _ = fit_pipeline(targets, scale=args.scale)
    print(f"fit: {time.perf_counter() - t0:.1f}s -> depth {fitted.depth}, "
          f"budget {fitted.budget:.3g} leaves")

    t0 = time.perf_counter()
    result = generate_graph(fitted.hag_params(), master_seed=args.seed)
    total = time.perf_counter() - t0
    graph, tl = result.graph, result.graph.tallies
    peak_gb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1e6
    print(f"generate: {total:.1f}s total, peak RSS {peak_gb:.2f} GB")
    for stage, secs in result.report["timings_sec"].items():
        print(f"  {stage:<8} {secs:8.1f}s")
    print(f"vertices        {graph.n_vertices:>14,}")
    print(f"half-edges      {tl.half_edges:>14,}")
    print(f"attempts        {tl.attempts:>14,}")
    print(f"agreement edges {graph.agreement.n_edges:>14,} ({tl.agreement_multi:,} multi)")
    print(f"conflict edges  {graph.conflict.n_edges:>14,} ({tl.conflict_multi:,} multi)")
    print(f"loops           {tl.loops:>14,}")
    print(f"inadmissible    {tl.inadmissible:>14,}")
    print(f"unmatched       {tl.unmatched:>14,}")
    rate = tl.half_edges / total if total > 0 else float("inf")
    print(f"throughput      {rate:>14,.0f} half-edges/s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
