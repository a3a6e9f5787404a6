"""Command-line interface.

Subcommands::

    hag fit        --targets targets.json [--scale C] [--out params.json]
    hag generate   --params params.json --out DIR [--seed S] [--mode match|walk]
    hag diagnose   --edges edges.tsv --attributes attributes.tsv [--targets T]
    hag analytics  --params params.json
    hag depth-one  --n N --alpha A --nu V --eta2 E --rho R --omega W

Exit codes: 0 on success, 1 when a fit or check is infeasible (including a
diagnose run whose gated deviations exceed the tolerance), 2 on I/O or
parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analytics import depth_one_expected
from .diagnostics import (
    GATED_STATS,
    compare_to_targets,
    component_size_fit,
    connected_component_sizes,
    label_frequencies,
    measure_graph_stats,
)
from .edges import depth_one_generate
from .errors import InfeasibleError, InputError
from .fitting import fit_pipeline
from .io import (
    read_graph,
    read_params_json,
    read_targets_json,
    write_attributes_tsv,
    write_component_sizes_csv,
    write_edges_tsv,
    write_fit_curve_csv,
    write_json,
    write_label_frequencies_csv,
    write_tree_tsv,
)
from .params import HagParams
from .pipeline import MODES, generate_graph, profile_for_params
from .tree import DEFAULT_NODE_BUDGET, expected_label_count


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hag",
        description="Hidden-ancestor generator for sparse assortatively labelled multigraphs.",
    )
    parser.add_argument("--version", action="version", version=f"hag {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="recover generator parameters from target statistics")
    p_fit.add_argument("--targets", required=True, help="JSON file of target statistics")
    p_fit.add_argument("--scale", type=float, default=1.0, help="leaf budget as a fraction of the target vertex count (default 1.0)")
    p_fit.add_argument("--beta", type=float, default=0.0, help="wildness/mark coupling exponent passed through to the parameters (default 0)")
    p_fit.add_argument("--rescale-labels", action="store_true", help="shrink the label target logarithmically with the scale")
    p_fit.add_argument("--out", default=None, help="write fitted parameters JSON here (default: stdout)")
    p_fit.add_argument("--curve", default=None, help="CSV path for the (q1, nu, pi1') scan curve (default: fitcurve.csv beside --out)")

    p_gen = sub.add_parser("generate", help="generate a graph from fitted parameters")
    p_gen.add_argument("--params", default=None, help="parameter JSON (a fit output or a plain parameter object)")
    p_gen.add_argument("--out", required=True, help="output directory (created if missing)")
    for flag, kind, text in (
        ("--mu", float, "mean offspring count"),
        ("--depth", int, "tree depth"),
        ("--theta", float, "color switch strength"),
        ("--q1", float, "height-one share of edge attempts"),
        ("--mu-o", float, "log-mark location"),
        ("--sigma-o", float, "log-mark scale"),
        ("--omega", float, "wildness probability"),
        ("--beta", float, "wildness/mark coupling exponent"),
    ):
        p_gen.add_argument(flag, type=kind, default=None, help=f"{text} (overrides --params)")
    p_gen.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p_gen.add_argument("--mode", choices=MODES, default="match", help="edge construction: half-edge matching (default) or paired walks")
    p_gen.add_argument("--threads", type=int, default=1, help="accepted for interface compatibility; the engine is single-threaded")
    p_gen.add_argument("--ceil-marks", action="store_true", help="round marks up to integers")
    p_gen.add_argument("--write-tree", action="store_true", help="also dump the latent tree as tree.tsv")
    p_gen.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET, help=f"refuse trees expected to exceed this node count (default {DEFAULT_NODE_BUDGET})")

    p_diag = sub.add_parser("diagnose", help="measure a graph and optionally compare to targets")
    p_diag.add_argument("--edges", required=True, help="edges.tsv path")
    p_diag.add_argument("--attributes", required=True, help="attributes.tsv path")
    p_diag.add_argument("--targets", default=None, help="optional JSON of target statistics to gate against")
    p_diag.add_argument("--tol", type=float, default=0.15, help="relative tolerance for gated deviations (default 0.15)")
    p_diag.add_argument("--sample-alcc", type=int, default=None, metavar="N", help="estimate clustering from N sampled vertices instead of exactly")
    p_diag.add_argument("--seed", type=int, default=0, help="seed for sampled clustering (default 0)")
    p_diag.add_argument("-m", "--components", type=int, default=5, help="top-m components for the stick-breaking fit (default 5)")
    p_diag.add_argument("--out", default=None, help="directory for stats.json, label_freq.csv and component_sizes.csv")

    p_ana = sub.add_parser("analytics", help="closed-form expectations for a parameter set")
    p_ana.add_argument("--params", required=True, help="parameter JSON")

    p_d1 = sub.add_parser("depth-one", help="simulate the depth-one model against its closed forms")
    p_d1.add_argument("--n", type=int, required=True, help="number of leaves")
    p_d1.add_argument("--alpha", type=float, required=True, help="pair sampling rate")
    p_d1.add_argument("--nu", type=float, required=True, help="mean mark")
    p_d1.add_argument("--eta2", type=float, required=True, help="mark variance")
    p_d1.add_argument("--rho", type=float, required=True, help="color switch probability")
    p_d1.add_argument("--omega", type=float, required=True, help="wildness probability")
    p_d1.add_argument("--reps", type=int, default=1000, help="replications (default 1000)")
    p_d1.add_argument("--seed", type=int, default=0, help="seed (default 0)")
    return parser


def _cmd_fit(args) -> int:
    targets = read_targets_json(args.targets)
    fitted, curve = fit_pipeline(
        targets,
        scale=args.scale,
        beta=args.beta,
        rescale_labels=args.rescale_labels,
    )
    payload = fitted.to_dict()
    if args.out:
        write_json(args.out, payload)
        print(f"wrote {args.out}")
    else:
        print(json.dumps(payload, indent=2, sort_keys=True))
    curve_path = args.curve
    if curve_path is None and args.out:
        curve_path = Path(args.out).parent / "fitcurve.csv"
    if curve_path is not None:
        write_fit_curve_csv(curve_path, curve)
        print(f"wrote {curve_path}")
    return 0


_PARAM_FLAGS = ("mu", "depth", "theta", "q1", "mu_o", "sigma_o", "omega", "beta")


def _cmd_generate(args) -> int:
    overrides = {
        name: getattr(args, name) for name in _PARAM_FLAGS if getattr(args, name) is not None
    }
    if args.params:
        base = read_params_json(args.params).to_dict()
        base.update(overrides)
    elif overrides:
        base = overrides
    else:
        raise InputError("generate needs --params or a full set of parameter flags")
    try:
        params = HagParams.from_dict(base)
    except (ValueError, TypeError) as exc:
        raise InputError(f"bad parameters: {exc}") from exc
    if args.threads > 1:
        print("note: the engine is single-threaded; --threads ignored", file=sys.stderr)
    result = generate_graph(
        params,
        master_seed=args.seed,
        mode=args.mode,
        node_budget=args.node_budget,
        ceil_marks=args.ceil_marks,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_edges_tsv(out / "edges.tsv", result.graph)
    write_attributes_tsv(out / "attributes.tsv", result.graph, result.attrs.marks)
    write_json(out / "report.json", result.report)
    if args.write_tree:
        write_tree_tsv(out / "tree.tsv", result.tree, result.colors)
    t = result.graph.tallies
    print(
        f"generated {result.tree.n_leaves} vertices, "
        f"{result.graph.agreement.n_edges} agreement and "
        f"{result.graph.conflict.n_edges} conflict edges "
        f"({t.attempts} attempts, {t.loops} loops, {t.inadmissible} inadmissible) "
        f"-> {out}"
    )
    return 0


def _cmd_diagnose(args) -> int:
    graph = read_graph(args.edges, args.attributes)
    rng = np.random.default_rng(args.seed)
    stats = measure_graph_stats(graph, sample_size=args.sample_alcc, rng=rng)
    payload: dict = {"stats": stats.to_dict()}
    try:
        comp = component_size_fit(graph.agreement, m=args.components)
        payload["components"] = comp.to_dict()
    except InfeasibleError as exc:
        payload["components"] = {"error": str(exc)}
    labels, counts = label_frequencies(graph)
    payload["label_frequencies"] = {
        "n_labels": int(len(labels)),
        "top_counts": [int(c) for c in counts[:10]],
    }
    sizes = connected_component_sizes(graph.agreement)
    status = 0
    if args.targets:
        targets = read_targets_json(args.targets)
        deviations = compare_to_targets(stats, targets)
        gated = {k: deviations[k] for k in GATED_STATS}
        ok = all(abs(v) <= args.tol for v in gated.values())
        payload["deviations"] = deviations
        payload["gate"] = {
            "checked": list(GATED_STATS),
            "tol": args.tol,
            "status": "pass" if ok else "fail",
        }
        status = 0 if ok else 1
    print(json.dumps(payload, indent=2, sort_keys=True))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "stats.json", payload)
        write_label_frequencies_csv(out / "label_freq.csv", labels, counts)
        write_component_sizes_csv(out / "component_sizes.csv", sizes)
        print(f"wrote {out}/stats.json, label_freq.csv, component_sizes.csv")
    if args.targets:
        print(f"gate: {payload['gate']['status']} (tol {args.tol})")
    return status


def _print_analytics_tables(profile) -> None:
    depth = profile.h.shape[0] - 1
    print("h-matrix (rows: attempt height s, columns: decoupling height t)")
    header = "".join(f"t={t:<11d}" for t in range(depth + 1))
    print(f"{'s':<4}{header}")
    for s in range(1, depth + 1):
        cells = "".join(f"{profile.h[s, t]:<12.5g}" for t in range(s + 1))
        print(f"{s:<4}{cells}")
    print()
    print("decoupling profile and color coefficients")
    print(f"{'t':<4}{'gamma':<14}{'a_coeff':<14}{'c_coeff':<14}")
    for t in range(depth):
        print(
            f"{t:<4}{profile.gamma[t]:<14.6g}"
            f"{profile.a_coeff[t]:<14.6g}{profile.c_coeff[t]:<14.6g}"
        )
    print()
    print("derived scalars")
    scalars = (
        ("agreement edges", profile.m_agree),
        ("conflict edges", profile.m_conflict),
        ("loops", profile.m_loop),
        ("inadmissible", profile.m_inadmissible),
        ("attempt budget", profile.attempt_budget),
        ("agreement degree", profile.d_a),
        ("conflict degree", profile.d_c_multi),
        ("clustering", profile.alcc),
    )
    width = max(len(name) for name, _ in scalars)
    for name, value in scalars:
        print(f"{name:<{width + 2}}{value:.6g}")
    print()


def _cmd_analytics(args) -> int:
    params = read_params_json(args.params)
    profile = profile_for_params(params)
    payload = {
        "params": params.to_dict(),
        "profile": profile.to_dict(),
        "attempt_budget": profile.attempt_budget,
        "expected_labels": expected_label_count(params.mu, params.depth, params.theta),
        "expected_unmatched": (params.mu**params.depth - 1.0)
        / (2.0 * (params.mu - 1.0)),
    }
    _print_analytics_tables(profile)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_depth_one(args) -> int:
    rng = np.random.default_rng(args.seed)
    sim = depth_one_generate(
        args.n, args.alpha, args.nu, args.eta2, args.rho, args.omega, rng, reps=args.reps
    )
    m_e, m_a, m_c, loops = depth_one_expected(
        args.n, args.alpha, args.nu, args.eta2, args.rho, args.omega
    )
    means = sim.means()
    rows = [
        ("edges", means["m_e"], m_e),
        ("agreement", means["m_a"], m_a),
        ("conflict", means["m_c"], m_c),
        ("loops", means["loops"], loops),
    ]
    print(f"depth-one model: n={args.n} alpha={args.alpha} reps={args.reps}")
    print(f"{'quantity':<12}{'simulated':>14}{'closed form':>14}{'rel dev':>10}")
    for name, got, want in rows:
        dev = (got - want) / want if want else 0.0
        print(f"{name:<12}{got:>14.4f}{want:>14.4f}{dev:>10.4f}")
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "generate": _cmd_generate,
    "diagnose": _cmd_diagnose,
    "analytics": _cmd_analytics,
    "depth-one": _cmd_depth_one,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 1
    except (InputError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
