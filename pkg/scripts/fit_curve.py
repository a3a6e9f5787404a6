#!/usr/bin/env python3
"""Trace the q1 feasibility curve for a fixed tree shape.

For each candidate top-height weight q1 (scanned downward from 1), solving
the mean-agreement-degree equation yields a leaf-mark mean nu and a sibling
share pi1'; the fit picks the first q1 whose sibling share crosses the
clustering-derived target.  This script prints that curve and optionally
writes it to CSV, which is handy for seeing how close a target sits to the
feasible boundary.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from hag.edges import height_distribution
from hag.errors import InfeasibleError
from hag.fitting import cube_root_derive, fit_q1_nu, fit_theta
from hag.io import write_fit_curve_csv


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--agreement-degree", type=float, default=25.0,
                        help="target mean agreement degree d_A")
    parser.add_argument("--alcc", type=float, default=0.5,
                        help="target average local clustering coefficient")
    parser.add_argument("--labels", type=float, default=200.0,
                        help="target distinct label count")
    parser.add_argument("--depth", type=int, default=4, help="tree depth D")
    parser.add_argument("--eta2", type=float, default=700.0,
                        help="target degree variance")
    parser.add_argument("--budget", type=float, default=456976.0,
                        help="leaf budget the tree must stay under")
    parser.add_argument("--out", type=Path, default=None,
                        help="optional CSV destination for the full curve")
    args = parser.parse_args(argv)

    mu, d_a_prime, pi1_prime = cube_root_derive(args.agreement_degree, args.alcc)
    theta = fit_theta(mu, args.depth, args.labels)
    print(f"saturation inversion: mu={mu:.0f}, d_A'={d_a_prime:.4f}, "
          f"pi1' target={pi1_prime:.6f}")
    print(f"label-count solve:    theta={theta:.6f} at depth {args.depth}")
    try:
        fit = fit_q1_nu(
            mu, args.depth, theta, args.eta2, d_a_prime, pi1_prime,
            full_curve=True,
        )
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 1

    q1, nu, curve = fit.q1, fit.nu, fit.curve
    print(f"crossing:             q1={q1:.4f}, nu={nu:.4f}")
    q = height_distribution(q1, args.depth)
    heights = ", ".join(f"q_{s}={q[s]:.4f}" for s in range(1, args.depth + 1))
    print(f"height distribution:  {heights}")
    print()
    print(f"{'q1':>8}{'nu':>14}{'pi1_prime':>14}   (* = at/below target)")
    step = max(1, len(curve.q1) // 40)
    for i in range(0, len(curve.q1), step):
        marker = "  *" if curve.pi1_prime[i] <= pi1_prime else ""
        print(f"{curve.q1[i]:>8.3f}{curve.nu[i]:>14.4f}{curve.pi1_prime[i]:>14.6f}{marker}")
    if args.out is not None:
        write_fit_curve_csv(args.out, curve)
        print(f"\nwrote {len(curve.q1)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
