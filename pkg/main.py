#!/usr/bin/env python3
"""obstsim: self-adjusting multi-tree overlay simulator CLI."""

import argparse
import json
import logging
import sys

import config
import scenarios
import snapshot
from errors import InvariantViolation, ObstError
from experiment import ExperimentRun
from overlay import Overlay
from seeds import derive_seed
from static_opt import bound_report, build_static_obst, partition_requests, static_cost
from workload import RequestSequence, dump_edge_list

COMMANDS = {
    "run": "Run a scenario preset and write data.csv + meta.json",
    "bounds": "Entropy bounds next to the measured cost of a static OBST(k)",
    "validate": "Run the invariant suite on a snapshot",
    "dump-tree": "Print one tree of a snapshot (pre-order lines or edges)",
    "snapshot": "Build an overlay (optionally after a workload) and save it",
    "load": "Load a snapshot, summarise it, optionally write it back out",
    "gen-workload": "Write a guest edge list and/or request sequence",
}

# CLI flag -> ExperimentConfig field
CONFIG_FLAGS = {
    "scenario": "scenario", "n": "n", "k": "k", "m": "m", "max_requests": "max_requests",
    "guest": "guest", "edge_list": "edge_list", "swarm_size": "swarm_size",
    "swarms_per_peer": "swarms_per_peer", "rnd_k": "rnd_k", "sequence": "sequence",
    "p_repeat": "p_repeat", "adjust_every": "adjust_every", "churn": "churn",
    "symmetric": "symmetric", "seed": "seed", "replicas": "replicas", "output": "output",
    "sample_every": "sample_every", "workers": "workers", "n_values": "n_values",
    "k_values": "k_values", "sequences": "sequences", "lambdas": "lambdas",
    "fractions": "fractions",
}


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _str_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file merged over ~/.obstsim/config.json.")
    p.add_argument("--scenario", help="Scenario preset name (see run --list).")
    p.add_argument("-n", type=int, help="Number of peers.")
    p.add_argument("-k", type=int, help="Number of trees.")
    p.add_argument("-m", type=int, help="Requests per run (default n*n).")
    p.add_argument("--max-requests", type=int)
    p.add_argument("--guest", choices=["bt", "edgelist", "rnd", "bad2"])
    p.add_argument("--edge-list", help="Edge-list file for --guest edgelist.")
    p.add_argument("--swarm-size", type=int)
    p.add_argument("--swarms-per-peer", type=int)
    p.add_argument("--rnd-k", type=int, help="Trees in the Rnd(k') guest graph.")
    p.add_argument("--sequence", choices=["match", "rw", "uniform"])
    p.add_argument("--p-repeat", type=float)
    p.add_argument("--static", action="store_true", help="Serve without adjusting.")
    p.add_argument("--adjust-every", type=int)
    p.add_argument("--churn", type=int, help="Peers leaving and rejoining per request.")
    p.add_argument("--symmetric", action="store_const", const=True)
    p.add_argument("--seed", type=int, help="Master seed.")
    p.add_argument("--replicas", type=int)
    p.add_argument("--output", help="Output directory.")
    p.add_argument("--sample-every", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--n-values", type=_int_list, help="Comma-separated n sweep.")
    p.add_argument("--k-values", type=_int_list, help="Comma-separated k sweep.")
    p.add_argument("--sequences", type=_str_list, help="e.g. match,rw-0.5,rw-1.0")
    p.add_argument("--lambdas", type=_int_list, help="Comma-separated churn sweep.")
    p.add_argument("--fractions", type=_float_list, help="Comma-separated removal fractions.")


def load_config(args: argparse.Namespace) -> config.ExperimentConfig:
    overrides = {field: getattr(args, flag, None) for flag, field in CONFIG_FLAGS.items()}
    if getattr(args, "static", False):
        overrides["adjust"] = False
    return config.load(args.config, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="obstsim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help=COMMANDS["run"])
    add_config_flags(p)
    p.add_argument("--list", action="store_true", help="List scenario presets and exit.")

    p = sub.add_parser("bounds", help=COMMANDS["bounds"])
    add_config_flags(p)
    p.add_argument("--requests", help="Request file ('t src dst' lines) instead of a generator.")
    p.add_argument("--json", action="store_true", help="Print the report as JSON.")

    p = sub.add_parser("validate", help=COMMANDS["validate"])
    p.add_argument("path")
    p.add_argument("--samples", type=int, default=snapshot.ROUTE_SAMPLES)

    p = sub.add_parser("dump-tree", help=COMMANDS["dump-tree"])
    p.add_argument("path")
    p.add_argument("--tree", type=int, default=1, help="1-based tree index.")
    p.add_argument("--edges", action="store_true", help="Print 'a b' edges instead.")

    p = sub.add_parser("snapshot", help=COMMANDS["snapshot"])
    add_config_flags(p)
    p.add_argument("--serve", action="store_true", help="Serve the configured workload first.")
    p.add_argument("--out", help="Snapshot path (default ~/.obstsim/snapshots/default.obst).")

    p = sub.add_parser("load", help=COMMANDS["load"])
    p.add_argument("path")
    p.add_argument("--out", help="Write the loaded overlay back out here.")

    p = sub.add_parser("gen-workload", help=COMMANDS["gen-workload"])
    add_config_flags(p)
    p.add_argument("--edges-out", help="Guest edge-list output path.")
    p.add_argument("--requests-out", help="Request sequence output path ('-' for stdout).")
    return parser


# --- handlers ---

def cmd_run(args: argparse.Namespace) -> int:
    if args.list:
        print(scenarios.catalog_summary())
        return 0
    cfg = load_config(args)
    print(ExperimentRun(cfg).run())
    return 0


def _workload(cfg: config.ExperimentConfig) -> tuple:
    seed = cfg.replica_seed_list()[0]
    g = scenarios.build_guest(cfg, cfg.n, seed)
    sigma = scenarios.build_sequence(cfg, g, cfg.sequence, cfg.requests_for(cfg.n), seed)
    return g, sigma, seed


def cmd_bounds(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    if args.requests:
        with open(args.requests) as f:
            sigma = RequestSequence.loads(f.read())
        n = max(sigma.max_id(), args.n or 0)
    else:
        _, sigma, _ = _workload(cfg)
        n = cfg.n
    requests = list(sigma)
    partition = partition_requests(requests, cfg.k, symmetric=cfg.symmetric)
    report = bound_report(requests, n, cfg.k, partition)
    measured = static_cost(build_static_obst(requests, n, cfg.k, partition), requests)

    if args.json:
        print(json.dumps({**report.to_dict(), "measured_static_cost": measured,
                          "partition_exact": partition.exact}, indent=2))
        return 0
    print(f"n={n} k={cfg.k} m={report.m}")
    print(f"H(X)={report.h_x:.4f}  H(Y)={report.h_y:.4f}  H(Z)={report.h_z:.4f}  "
          f"H(alpha)={report.h_alpha:.4f}")
    print(f"  lower (single tree, routing)  {report.lower_t1:10.4f}")
    print(f"  upper (lookup, weight-bal.)   {report.upper_t2:10.4f}")
    print(f"  upper (routing, one tree)     {report.upper_t4:10.4f}")
    print(f"  upper (routing, k trees)      {report.upper_t5:10.4f}")
    clamp = " (clamped)" if report.t7_clamped else ""
    print(f"  lower (lookup, k trees)       {report.lookup_lower_t7:10.4f}{clamp}")
    print(f"  measured static OBST({cfg.k})      {measured:10.4f}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    o = snapshot.load(args.path)
    snapshot.validate(o, samples=args.samples)
    print(f"ok: n={o.n} k={o.k}")
    return 0


def cmd_dump_tree(args: argparse.Namespace) -> int:
    o = snapshot.load(args.path)
    if not 1 <= args.tree <= o.k:
        raise InvariantViolation(f"tree index {args.tree} outside [1, {o.k}]")
    t = o.trees[args.tree - 1]
    if args.edges:
        for a, b in sorted(t.edges()):
            print(f"{a} {b}")
    else:
        print(t.dumps())
    return 0


def cmd_snapshot(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    seed = cfg.replica_seed_list()[0]
    o = Overlay.new_random(cfg.n, cfg.k, derive_seed(seed, scenarios.OVERLAY_STREAM),
                           cfg.adjust_every)
    if args.serve:
        _, sigma, _ = _workload(cfg)
        ledger = o.run_sequence(sigma, adjust=cfg.adjust, churn=cfg.churn)
        print(f"served {len(ledger)} requests, average cost {ledger.average_cost():.4f}")
    print(f"saved {snapshot.save(o, args.out)}")
    return 0


def cmd_load(args: argparse.Namespace) -> int:
    o = snapshot.load(args.path)
    heights = ", ".join(str(t.height()) for t in o.trees)
    print(f"n={o.n} k={o.k} heights=[{heights}] max_degree={o.max_degree()}")
    if args.out:
        print(f"saved {snapshot.save(o, args.out)}")
    return 0


def cmd_gen_workload(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    g, sigma, _ = _workload(cfg)
    if args.edges_out:
        with open(args.edges_out, "w") as f:
            f.write(dump_edge_list(g))
    if args.requests_out in (None, "-"):
        sys.stdout.write(sigma.dumps())
    else:
        with open(args.requests_out, "w") as f:
            f.write(sigma.dumps())
    return 0


HANDLERS = {
    "run": cmd_run,
    "bounds": cmd_bounds,
    "validate": cmd_validate,
    "dump-tree": cmd_dump_tree,
    "snapshot": cmd_snapshot,
    "load": cmd_load,
    "gen-workload": cmd_gen_workload,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="[%(name)s] %(message)s",
    )
    try:
        return HANDLERS[args.command](args)
    except InvariantViolation as e:
        print(f"Invariant violation: {e}", file=sys.stderr)
        return 2
    except ObstError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
