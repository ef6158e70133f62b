"""Topology and cost metrics for overlays: cost averages, diameter, min cut, robustness."""

import csv
import logging
import random
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from bst_core import PeerId
from errors import MembershipError, MetricsError, TreeError
from overlay import CostLedger, Overlay

logger = logging.getLogger(__name__)


@dataclass
class MetricsReport:
    avg_cost: float | None = None
    avg_distance: float | None = None
    diameter: int | None = None
    min_cut: int | None = None
    largest_cc_fraction: float | None = None
    pair_connectivity_tree: float | None = None
    pair_connectivity_graph: float | None = None
    removed: int = 0
    alive: int = 0
    components: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


# --- ledgers ---

def avg_cost(ledger: CostLedger) -> float:
    if not ledger.records:
        raise MetricsError("average cost of an empty ledger")
    return ledger.total / len(ledger.records)


def avg_distance(ledger: CostLedger) -> float:
    if not ledger.records:
        raise MetricsError("average distance of an empty ledger")
    return ledger.average_distance()


def converged_distance(ledger: CostLedger, tail: float = 0.25) -> float:
    """Mean routing distance over the final ``tail`` share of the run."""
    if not ledger.records:
        raise MetricsError("converged distance of an empty ledger")
    start = min(len(ledger.records) - 1, int(len(ledger.records) * (1 - tail)))
    return ledger.average_distance(start)


# --- graph metrics ---

def _bfs_far(g: nx.Graph, source) -> tuple[object, int]:
    lengths = nx.single_source_shortest_path_length(g, source)
    far = max(lengths.values())
    return min(v for v, d in lengths.items() if d == far), far


def double_sweep_lower_bound(g: nx.Graph) -> int:
    """Eccentricity of the node farthest from the smallest node; exact on trees."""
    if g.number_of_nodes() == 0:
        raise MetricsError("diameter of an empty graph")
    a, _ = _bfs_far(g, min(g.nodes))
    _, ecc = _bfs_far(g, a)
    return ecc


def diameter(g: nx.Graph) -> int:
    """Exact diameter; on a disconnected graph the largest component diameter."""
    if g.number_of_nodes() == 0:
        raise MetricsError("diameter of an empty graph")
    best = 0
    for nodes in nx.connected_components(g):
        sub = g.subgraph(nodes)
        if sub.number_of_edges() == sub.number_of_nodes() - 1:
            value = double_sweep_lower_bound(sub)
        else:
            value = nx.diameter(sub)
            if logger.isEnabledFor(logging.DEBUG):
                lower = double_sweep_lower_bound(sub)
                logger.debug("double sweep %s exact diameter (%d vs %d)",
                             "matches" if lower == value else "undershoots", lower, value)
        best = max(best, value)
    return best


def min_edge_cut(g: nx.Graph) -> int:
    """Global minimum edge cut with unit weights; 0 when g is disconnected."""
    if g.number_of_nodes() < 2 or not nx.is_connected(g):
        return 0
    cut_value, _ = nx.stoer_wagner(g)
    return int(cut_value)


def union_distance(o: Overlay, u: PeerId, v: PeerId) -> int | None:
    """Shortest path across the union of all trees; None when unreachable."""
    for p in (u, v):
        if p not in o:
            raise MembershipError(f"peer {p} is not in the overlay")
    try:
        return nx.shortest_path_length(o.union_graph(), u, v)
    except nx.NetworkXNoPath:
        return None


# --- failures without repair ---

def _component_labels(alive: list[PeerId], edges: Iterable[tuple[PeerId, PeerId]]) -> np.ndarray:
    g = nx.Graph()
    g.add_nodes_from(alive)
    g.add_edges_from(edges)
    index = {p: i for i, p in enumerate(alive)}
    labels = np.empty(len(alive), dtype=np.int64)
    for c, nodes in enumerate(nx.connected_components(g)):
        for p in nodes:
            labels[index[p]] = c
    return labels


def fail_peers(o: Overlay, removed: set[PeerId]) -> tuple[list[PeerId], list[set]]:
    """Surviving peers and, per tree, the edges with both endpoints alive."""
    alive = [p for p in o.peers() if p not in removed]
    per_tree = [{(a, b) for a, b in t.edges() if a not in removed and b not in removed}
                for t in o.trees]
    return alive, per_tree


def connectivity_report(o: Overlay, removed: set[PeerId]) -> MetricsReport:
    """Connectivity of the survivors, with every fraction over the original n.

    Crashing all but one peer therefore reports a largest component of 1/n
    and pair connectivity 0, not the degenerate 1 of a one-node graph.
    """
    n = o.n
    total_pairs = n * (n - 1) // 2
    alive, per_tree = fail_peers(o, removed)
    if not alive:
        return MetricsReport(largest_cc_fraction=0.0, pair_connectivity_tree=0.0,
                             pair_connectivity_graph=0.0, removed=len(removed))

    together = np.zeros((len(alive), len(alive)), dtype=bool)
    for edges in per_tree:
        labels = _component_labels(alive, edges)
        together |= labels[:, None] == labels[None, :]
    tree_pairs = (int(together.sum()) - len(alive)) // 2

    union = nx.Graph()
    union.add_nodes_from(alive)
    for edges in per_tree:
        union.add_edges_from(edges)
    sizes = [len(c) for c in nx.connected_components(union)]
    graph_pairs = sum(c * (c - 1) // 2 for c in sizes)

    def frac(pairs: int) -> float:
        return pairs / total_pairs if total_pairs else 1.0

    return MetricsReport(
        largest_cc_fraction=max(sizes) / n,
        pair_connectivity_tree=frac(tree_pairs),
        pair_connectivity_graph=frac(graph_pairs),
        removed=len(removed),
        alive=len(alive),
        components=len(sizes),
    )


def robustness_sweep(o: Overlay, removal_fractions: Sequence[float],
                     seed: int) -> list[MetricsReport]:
    """Crash a growing random set of peers and measure what still communicates.

    Removals are cumulative along one random order, trees are not repaired,
    and every fraction is taken over the original population.
    """
    for f in removal_fractions:
        if not 0 <= f < 1:
            raise TreeError(f"removal fraction {f} outside [0, 1)")
    order = o.peers()
    random.Random(seed).shuffle(order)
    reports = []
    for f in sorted(removal_fractions):
        count = int(round(f * o.n))
        reports.append(connectivity_report(o, set(order[:count])))
        logger.debug("removed %d/%d: tree %.3f graph %.3f", count, o.n,
                     reports[-1].pair_connectivity_tree, reports[-1].pair_connectivity_graph)
    return reports


# --- traces ---

def topology_trace(o: Overlay, sigma: Sequence[tuple[PeerId, PeerId]], adjust: bool,
                   sample_every: int, churn: int = 0) -> list[dict]:
    """Serve sigma while sampling diameter, min cut and windowed costs every ``sample_every`` requests."""
    if sample_every < 1:
        raise MetricsError(f"sample_every must be >= 1, got {sample_every}")
    rows = []
    ledger = CostLedger("adjusting" if adjust else "static")
    window_start = 0

    def sample(t: int) -> None:
        nonlocal window_start
        g = o.union_graph()
        window = ledger.records[window_start:]
        rows.append({
            "t": t,
            "diameter": diameter(g),
            "min_cut": min_edge_cut(g),
            "window_distance": ledger.average_distance(window_start),
            "window_cost": sum(r.cost for r in window) / len(window) if window else 0.0,
        })
        window_start = len(ledger.records)

    sample(0)
    for t, (u, v) in enumerate(sigma, start=1):
        ledger.append(o.serve_request(u, v, adjust, t - 1))
        if churn:
            o.churn_step(churn)
        if t % sample_every == 0:
            sample(t)
    return rows


def write_csv(path: str, rows: list[dict], header: Sequence[str],
              comment: str | None = None) -> None:
    with open(path, "w", newline="") as f:
        if comment is not None:
            f.write(f"# {comment}\n")
        writer = csv.DictWriter(f, fieldnames=list(header), lineterminator="\n",
                                extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
