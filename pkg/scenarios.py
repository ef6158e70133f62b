"""Scenario catalog: one preset per experiment figure.

Every preset takes a validated config and one replica seed and returns plain
rows; the runner adds the seed column and writes them out.
"""

import logging

import metrics
from config import ExperimentConfig
from errors import ConfigError
from overlay import Overlay
from seeds import derive_seed
from workload import (
    GuestGraph,
    RequestSequence,
    bad2_edge_sets,
    gen_bad2,
    gen_bt,
    gen_rnd_obst,
    induced_prefix,
    load_edge_list,
    relabel_bfs,
    seq_match,
    seq_rw,
    seq_uniform,
)

logger = logging.getLogger(__name__)

# counters for derive_seed(replica_seed, ...)
GUEST_STREAM = 1
SEQUENCE_STREAM = 2
OVERLAY_STREAM = 3
FAILURE_STREAM = 4

DEFAULT_K_VALUES = [1, 2, 4, 8, 16, 32]
FIG4_N_VALUES = [64, 128, 256, 512, 1024]
FIG5_SEQUENCES = ["match", "rw-0.5", "rw-1.0"]
FIG5_K_VALUES = [1, 4, 32]
FIG9_FRACTIONS = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5]
FIG10_LAMBDAS = [0, 1, 2, 4, 8]


# --- shared building blocks ---

def build_guest(cfg: ExperimentConfig, n: int, seed: int) -> GuestGraph:
    guest_seed = derive_seed(seed, GUEST_STREAM)
    if cfg.guest == "bt":
        return gen_bt(n, cfg.swarm_size, cfg.swarms_per_peer, guest_seed)
    if cfg.guest == "rnd":
        return gen_rnd_obst(n, cfg.rnd_k, guest_seed)
    if cfg.guest == "bad2":
        return gen_bad2(n)[0]
    with open(cfg.edge_list) as f:
        graph = relabel_bfs(load_edge_list(f.read()), guest_seed)
    if n > graph.n:
        raise ConfigError(f"n: {n} exceeds the {graph.n} connected nodes of {cfg.edge_list}")
    return induced_prefix(graph, n)


def build_sequence(cfg: ExperimentConfig, g: GuestGraph, name: str, m: int,
                   seed: int) -> RequestSequence:
    seq_seed = derive_seed(seed, SEQUENCE_STREAM)
    if name == "match":
        return seq_match(g, m, seq_seed)
    if name == "rw":
        return seq_rw(g, m, cfg.p_repeat, seq_seed)
    if name.startswith("rw-"):
        return seq_rw(g, m, float(name[3:]), seq_seed)
    if cfg.guest == "bad2":
        e1, e2 = bad2_edge_sets(g.n)
        return seq_uniform(e1 + e2, m, seq_seed)
    return seq_uniform(g.sorted_edges(), m, seq_seed)


def fresh_overlay(cfg: ExperimentConfig, n: int, k: int, seed: int) -> Overlay:
    return Overlay.new_random(n, k, derive_seed(seed, OVERLAY_STREAM), cfg.adjust_every)


def _cost_row(ledger) -> dict:
    return {
        "avg_distance": ledger.average_distance(),
        "avg_cost": metrics.avg_cost(ledger),
        "converged_distance": metrics.converged_distance(ledger),
        "rotations": ledger.total_rotations(),
    }


# --- presets ---

def run_fig3(cfg: ExperimentConfig, seed: int) -> list[dict]:
    """Routing cost against k and n on one guest graph."""
    rows = []
    for n in cfg.n_values or [cfg.n]:
        g = build_guest(cfg, n, seed)
        sigma = build_sequence(cfg, g, cfg.sequence, cfg.requests_for(n), seed)
        for k in cfg.k_values or DEFAULT_K_VALUES:
            ledger = fresh_overlay(cfg, n, k, seed).run_sequence(sigma, adjust=cfg.adjust)
            rows.append({"guest": cfg.guest, "sequence": cfg.sequence, "n": n, "k": k,
                         **_cost_row(ledger)})
            logger.info("fig3 n=%d k=%d: distance %.3f", n, k, rows[-1]["avg_distance"])
    return rows


def run_fig4(cfg: ExperimentConfig, seed: int) -> list[dict]:
    """Bad(2): one adjusting tree against two, plus the two generating trees held static."""
    rows = []
    for n in cfg.n_values or FIG4_N_VALUES:
        e1, e2 = bad2_edge_sets(n)
        _, generating = gen_bad2(n)
        sigma = list(seq_uniform(e1 + e2, cfg.requests_for(n), derive_seed(seed, SEQUENCE_STREAM)))
        for k in (1, 2):
            ledger = fresh_overlay(cfg, n, k, seed).run_sequence(sigma, adjust=True)
            rows.append({"n": n, "variant": f"adjusting-{k}", "k": k, **_cost_row(ledger)})
        static = Overlay.from_trees(generating)
        ledger = static.run_sequence(sigma, adjust=False)
        rows.append({"n": n, "variant": "static-generating", "k": 2, **_cost_row(ledger)})
        logger.info("fig4 n=%d: k=1 %.3f, k=2 %.3f, static %.3f", n,
                    rows[-3]["avg_distance"], rows[-2]["avg_distance"], rows[-1]["avg_cost"])
    return rows


def run_fig5(cfg: ExperimentConfig, seed: int) -> list[dict]:
    """Sequence generators compared at a few k."""
    rows = []
    n = cfg.n
    g = build_guest(cfg, n, seed)
    for name in cfg.sequences or FIG5_SEQUENCES:
        sigma = build_sequence(cfg, g, name, cfg.requests_for(n), seed)
        for k in cfg.k_values or FIG5_K_VALUES:
            ledger = fresh_overlay(cfg, n, k, seed).run_sequence(sigma, adjust=cfg.adjust)
            rows.append({"sequence": name, "n": n, "k": k, **_cost_row(ledger)})
    return rows


def run_fig6(cfg: ExperimentConfig, seed: int) -> list[dict]:
    """Diameter and min cut of the union graph over time."""
    rows = []
    n = cfg.n
    g = build_guest(cfg, n, seed)
    sigma = list(build_sequence(cfg, g, cfg.sequence, cfg.requests_for(n), seed))
    for k in cfg.k_values or [cfg.k]:
        o = fresh_overlay(cfg, n, k, seed)
        for sample in metrics.topology_trace(o, sigma, cfg.adjust, cfg.cadence_for(n), cfg.churn):
            rows.append({"n": n, "k": k, **sample})
    return rows


def run_fig7(cfg: ExperimentConfig, seed: int) -> list[dict]:
    """Diameter and min cut before and after serving the workload, against n."""
    rows = []
    for n in cfg.n_values or [cfg.n]:
        g = build_guest(cfg, n, seed)
        sigma = build_sequence(cfg, g, cfg.sequence, cfg.requests_for(n), seed)
        for k in cfg.k_values or [cfg.k]:
            o = fresh_overlay(cfg, n, k, seed)
            before = o.union_graph()
            o.run_sequence(sigma, adjust=cfg.adjust)
            after = o.union_graph()
            rows.append({
                "n": n, "k": k,
                "diameter_initial": metrics.diameter(before),
                "min_cut_initial": metrics.min_edge_cut(before),
                "diameter": metrics.diameter(after),
                "min_cut": metrics.min_edge_cut(after),
                "max_degree": o.max_degree(),
            })
    return rows


def run_fig8(cfg: ExperimentConfig, seed: int) -> list[dict]:
    """Windowed routing cost traces showing convergence per k."""
    rows = []
    n = cfg.n
    g = build_guest(cfg, n, seed)
    sigma = build_sequence(cfg, g, cfg.sequence, cfg.requests_for(n), seed)
    window = cfg.cadence_for(n)
    for k in cfg.k_values or [1, 2, 4, 16]:
        ledger = fresh_overlay(cfg, n, k, seed).run_sequence(sigma, adjust=cfg.adjust)
        for start in range(0, len(ledger), window):
            chunk = ledger.records[start:start + window]
            rows.append({
                "n": n, "k": k, "t": start + len(chunk),
                "window_distance": ledger.average_distance(start, start + window),
                "window_cost": sum(r.cost for r in chunk) / len(chunk),
            })
    return rows


def run_fig9(cfg: ExperimentConfig, seed: int) -> list[dict]:
    """Connectivity after crashing growing shares of peers, with no repair."""
    rows = []
    n = cfg.n
    g = build_guest(cfg, n, seed)
    sigma = build_sequence(cfg, g, cfg.sequence, cfg.requests_for(n), seed)
    for k in cfg.k_values or [cfg.k]:
        o = fresh_overlay(cfg, n, k, seed)
        o.run_sequence(sigma, adjust=cfg.adjust)
        reports = metrics.robustness_sweep(o, cfg.fractions or FIG9_FRACTIONS,
                                           derive_seed(seed, FAILURE_STREAM))
        for fraction, report in zip(sorted(cfg.fractions or FIG9_FRACTIONS), reports):
            rows.append({
                "n": n, "k": k, "fraction": fraction,
                "removed": report.removed, "alive": report.alive,
                "components": report.components,
                "largest_cc_fraction": report.largest_cc_fraction,
                "pair_connectivity_tree": report.pair_connectivity_tree,
                "pair_connectivity_graph": report.pair_connectivity_graph,
            })
    return rows


def run_fig10(cfg: ExperimentConfig, seed: int) -> list[dict]:
    """Routing cost under churn: lambda peers leave and rejoin after every request."""
    rows = []
    n = cfg.n
    g = build_guest(cfg, n, seed)
    sigma = build_sequence(cfg, g, cfg.sequence, cfg.requests_for(n), seed)
    for k in cfg.k_values or [cfg.k]:
        for lam in cfg.lambdas or FIG10_LAMBDAS:
            ledger = fresh_overlay(cfg, n, k, seed).run_sequence(sigma, adjust=cfg.adjust, churn=lam)
            rows.append({"n": n, "k": k, "lambda": lam, **_cost_row(ledger)})
    return rows


COST_COLUMNS = ["avg_distance", "avg_cost", "converged_distance", "rotations"]

SCENARIO_CATALOG = {
    "fig3": {
        "name": "fig3",
        "description": "Average routing cost as a function of k and n under one guest graph.",
        "columns": ["guest", "sequence", "n", "k", *COST_COLUMNS],
        "run": run_fig3,
    },
    "fig4": {
        "name": "fig4",
        "description": "Bad(2) workload: adjusting OBST(1) vs OBST(2) vs the static generating pair.",
        "columns": ["n", "variant", "k", *COST_COLUMNS],
        "run": run_fig4,
    },
    "fig5": {
        "name": "fig5",
        "description": "Match vs RW-0.5 vs RW-1.0 sequences for k in {1, 4, 32}.",
        "columns": ["sequence", "n", "k", *COST_COLUMNS],
        "run": run_fig5,
    },
    "fig6": {
        "name": "fig6",
        "description": "Union-graph diameter and min edge cut sampled over time.",
        "columns": ["n", "k", "t", "diameter", "min_cut", "window_distance", "window_cost"],
        "run": run_fig6,
    },
    "fig7": {
        "name": "fig7",
        "description": "Diameter and min edge cut before and after the workload, against n.",
        "columns": ["n", "k", "diameter_initial", "min_cut_initial", "diameter", "min_cut",
                    "max_degree"],
        "run": run_fig7,
    },
    "fig8": {
        "name": "fig8",
        "description": "Windowed routing cost traces (convergence) per k.",
        "columns": ["n", "k", "t", "window_distance", "window_cost"],
        "run": run_fig8,
    },
    "fig9": {
        "name": "fig9",
        "description": "Robustness: connectivity after random peer crashes without repair.",
        "columns": ["n", "k", "fraction", "removed", "alive", "components",
                    "largest_cc_fraction", "pair_connectivity_tree", "pair_connectivity_graph"],
        "run": run_fig9,
    },
    "fig10": {
        "name": "fig10",
        "description": "Routing cost under churn rate lambda (leave then rejoin per request).",
        "columns": ["n", "k", "lambda", *COST_COLUMNS],
        "run": run_fig10,
    },
}


def get_scenario(name: str) -> dict | None:
    """Return a scenario preset by name, or None if not found."""
    return SCENARIO_CATALOG.get(name)


def catalog_summary() -> str:
    lines = ["Available scenarios:"]
    for scenario in SCENARIO_CATALOG.values():
        lines.append(f"- {scenario['name']}: {scenario['description']}")
    return "\n".join(lines)
