import itertools
import random

import networkx as nx
import pytest

import metrics
from errors import MetricsError, TreeError
from overlay import STATIC, CostLedger, CostRecord, Overlay
from workload import gen_rnd_obst, seq_match


def brute_force_min_cut(g: nx.Graph) -> int:
    nodes = sorted(g.nodes)
    first, rest = nodes[0], nodes[1:]
    best = None
    for size in range(0, len(rest)):
        for extra in itertools.combinations(rest, size):
            side = {first, *extra}
            cut = sum((a in side) != (b in side) for a, b in g.edges)
            best = cut if best is None else min(best, cut)
    return best


def test_avg_cost_single_record():
    ledger = CostLedger(STATIC)
    ledger.append(CostRecord(0, 1, 0, 1))
    assert metrics.avg_cost(ledger) == 2.0


def test_avg_cost_matches_raw_records(overlay_3x32):
    ledger = overlay_3x32.run_sequence([(1, 30), (4, 17), (30, 1)] * 4, adjust=True)
    assert metrics.avg_cost(ledger) == pytest.approx(
        sum(r.distance + 1 + r.rotations for r in ledger.records) / len(ledger.records))


def test_empty_ledger_is_an_error():
    with pytest.raises(MetricsError):
        metrics.avg_cost(CostLedger(STATIC))
    with pytest.raises(MetricsError):
        metrics.converged_distance(CostLedger(STATIC))


def test_converged_distance_uses_final_quarter():
    ledger = CostLedger(STATIC)
    for t, d in enumerate([4, 4, 4, 4, 4, 4, 1, 1]):
        ledger.append(CostRecord(t, d, 0, 1))
    assert metrics.converged_distance(ledger) == 1.0


def test_diameter_examples():
    assert metrics.diameter(nx.path_graph(7)) == 6
    assert metrics.diameter(nx.complete_graph(5)) == 1
    assert metrics.diameter(nx.cycle_graph(8)) == 4
    two = nx.disjoint_union(nx.path_graph(3), nx.path_graph(5))
    assert metrics.diameter(two) == 4
    with pytest.raises(MetricsError):
        metrics.diameter(nx.Graph())


def test_double_sweep_never_exceeds_exact_diameter():
    for seed in range(5):
        g = Overlay.new_random(60, 3, seed).union_graph()
        assert metrics.double_sweep_lower_bound(g) <= metrics.diameter(g) == nx.diameter(g)


def test_single_tree_diameter_dominates_union():
    o = Overlay.new_random(50, 3, seed=4)
    union = metrics.diameter(o.union_graph())
    for t in o.trees:
        g = nx.Graph(list(t.edges()))
        assert metrics.diameter(g) >= union


def test_min_edge_cut_examples():
    assert metrics.min_edge_cut(nx.path_graph(6)) == 1
    assert metrics.min_edge_cut(nx.cycle_graph(6)) == 2
    assert metrics.min_edge_cut(nx.complete_graph(4)) == 3
    assert metrics.min_edge_cut(nx.disjoint_union(nx.path_graph(2), nx.path_graph(2))) == 0
    assert metrics.min_edge_cut(nx.empty_graph(1)) == 0


def test_min_edge_cut_matches_exhaustive_enumeration():
    for seed in range(15):
        rng = random.Random(seed)
        n = rng.randint(3, 9)
        g = nx.gnp_random_graph(n, 0.6, seed=seed)
        if not nx.is_connected(g):
            continue
        assert metrics.min_edge_cut(g) == brute_force_min_cut(g)


def test_min_edge_cut_at_most_min_degree():
    g = Overlay.new_random(40, 4, seed=2).union_graph()
    assert metrics.min_edge_cut(g) <= min(d for _, d in g.degree())


def test_union_distance_bounds(overlay_3x32):
    rng = random.Random(0)
    for _ in range(100):
        u, v = rng.sample(range(1, 33), 2)
        assert metrics.union_distance(overlay_3x32, u, v) <= overlay_3x32.closest_tree(u, v)[1]
    single = Overlay.new_random(20, 1, seed=1)
    assert metrics.union_distance(single, 3, 17) == single.trees[0].distance(3, 17)


def test_robustness_without_removals_is_fully_connected(overlay_3x32):
    [report] = metrics.robustness_sweep(overlay_3x32, [0.0], seed=1)
    assert report.largest_cc_fraction == 1.0
    assert report.pair_connectivity_tree == 1.0
    assert report.pair_connectivity_graph == 1.0
    assert report.components == 1


@pytest.mark.parametrize("seed", range(5))
def test_robustness_is_monotone_and_trees_never_beat_the_graph(seed):
    o = Overlay.new_random(64, 3, seed)
    fractions = [0.0, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9]
    reports = metrics.robustness_sweep(o, fractions, seed=seed)
    for r in reports:
        assert r.pair_connectivity_tree <= r.pair_connectivity_graph
        assert 0 < r.largest_cc_fraction <= 1
    for a, b in zip(reports, reports[1:]):
        assert b.pair_connectivity_tree <= a.pair_connectivity_tree
        assert b.pair_connectivity_graph <= a.pair_connectivity_graph
        assert b.largest_cc_fraction <= a.largest_cc_fraction
    assert o.check() == (True, "")


def test_connectivity_is_normalised_by_the_original_population(overlay_3x32):
    removed = set(range(2, 33))
    report = metrics.connectivity_report(overlay_3x32, removed)
    assert report.alive == 1
    assert report.components == 1
    assert report.largest_cc_fraction == 1 / 32
    assert report.pair_connectivity_tree == 0.0
    assert report.pair_connectivity_graph == 0.0


def test_robustness_rejects_bad_fraction(overlay_3x32):
    with pytest.raises(TreeError, match="outside"):
        metrics.robustness_sweep(overlay_3x32, [1.0], seed=0)


def test_topology_trace_cadence():
    o = Overlay.new_random(32, 2, seed=3)
    sigma = list(seq_match(gen_rnd_obst(32, 4, seed=5), 100, seed=1))
    rows = metrics.topology_trace(o, sigma, adjust=True, sample_every=32)
    assert [r["t"] for r in rows] == [0, 32, 64, 96]
    assert all(r["min_cut"] >= 1 for r in rows)


def test_write_csv(tmp_path):
    path = tmp_path / "out.csv"
    metrics.write_csv(str(path), [{"a": 1, "b": 2.5, "c": "x"}], ["a", "b"], comment="cfg")
    assert path.read_text() == "# cfg\na,b\n1,2.5\n"
