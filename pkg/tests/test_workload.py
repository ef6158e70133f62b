import logging
from collections import Counter

import networkx as nx
import pytest

from errors import WorkloadError
from workload import (
    GuestGraph,
    RequestSequence,
    bad2_edge_sets,
    dump_edge_list,
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


def test_request_sequence_roundtrip():
    seq = RequestSequence([(1, 2), (5, 3), (2, 1)])
    assert RequestSequence.loads(seq.dumps()).requests == seq.requests
    assert seq.max_id() == 5


def test_request_sequence_accepts_spaces_and_comments():
    seq = RequestSequence.loads("# header\n0 1 2\n1 3 4  # trailing\n")
    assert seq.requests == [(1, 2), (3, 4)]


@pytest.mark.parametrize("text,message", [
    ("t,src,dst\n0,1,2\n1,x,3\n", "line 3"),
    ("0 1\n", "line 1"),
    ("0 2 2\n", "self-request"),
    ("0 0 2\n", "positive"),
])
def test_request_sequence_errors_carry_line_numbers(text, message):
    with pytest.raises(WorkloadError, match=message):
        RequestSequence.loads(text)


def test_edge_list_shifts_zero_indexed_ids(caplog):
    with caplog.at_level(logging.WARNING):
        g = load_edge_list("0 1\n1 2\n2 2\n")
    assert g.edges == frozenset({(1, 2), (2, 3)})
    assert "0-indexed" in caplog.text
    assert "self-loops" in caplog.text


def test_edge_list_sums_weights():
    g = load_edge_list("1 2 0.5\n2 1 1.5\n2 3 1\n")
    assert g.weights[(1, 2)] == pytest.approx(2.0)
    assert len(g) == 2


def test_edge_list_bad_line():
    with pytest.raises(WorkloadError, match="line 2"):
        load_edge_list("1 2\n1 2 3 4\n")


def test_edge_list_roundtrip():
    g = GuestGraph.from_pairs(5, [(1, 2), (4, 2), (5, 3)])
    assert load_edge_list(dump_edge_list(g)).edges == g.edges


def test_relabel_bfs_starts_at_a_hub_and_keeps_largest_component():
    g = GuestGraph.from_pairs(9, [(5, 1), (5, 2), (5, 3), (3, 4), (7, 8)])
    relabelled = relabel_bfs(g, seed=1)
    assert relabelled.n == 5
    graph = relabelled.to_networkx()
    assert nx.is_connected(graph)
    assert graph.degree(1) == 3


def test_induced_prefix():
    g = GuestGraph.from_pairs(4, [(1, 2), (2, 3), (3, 4)])
    assert induced_prefix(g, 3).edges == frozenset({(1, 2), (2, 3)})
    with pytest.raises(WorkloadError):
        induced_prefix(g, 5)


def test_bt_is_deterministic_under_its_seed():
    g = gen_bt(100, swarm_size=10, swarms_per_peer=2, seed=3)
    assert g.n == 100
    graph = g.to_networkx()
    assert min(d for _, d in graph.degree()) >= 1
    assert gen_bt(100, swarm_size=10, swarms_per_peer=2, seed=3) == g


def test_bt_single_swarm_is_a_clique():
    g = gen_bt(4, swarm_size=4, swarms_per_peer=1, seed=0)
    assert len(g) == 6
    assert g.edges == frozenset({(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)})


def test_bt_with_one_swarm_per_peer_is_disjoint_cliques():
    graph = gen_bt(100, swarm_size=8, swarms_per_peer=1, seed=5).to_networkx()
    assert max(d for _, d in graph.degree()) <= 7
    for component in nx.connected_components(graph):
        size = len(component)
        assert graph.subgraph(component).number_of_edges() == size * (size - 1) // 2


def test_bt_overlapping_swarms_have_heavier_degree_tail():
    def max_degree(swarms_per_peer, seed):
        graph = gen_bt(1024, 32, swarms_per_peer, seed).to_networkx()
        return max(d for _, d in graph.degree())

    baseline = [max_degree(1, seed) for seed in range(20)]
    overlapping = [max_degree(2, seed) for seed in range(20)]
    assert max(baseline) <= 31
    assert sum(overlapping) / 20 > sum(baseline) / 20


def test_bt_rejects_bad_parameters():
    with pytest.raises(WorkloadError):
        gen_bt(10, swarm_size=1)


def test_rnd_obst_is_a_union_of_trees():
    g = gen_rnd_obst(50, 3, seed=8)
    assert 49 <= len(g) <= 3 * 49
    assert nx.is_connected(g.to_networkx())


@pytest.mark.parametrize("n", [4, 8, 16, 64])
def test_bad2_edge_sets_are_trees(n):
    e1, e2 = bad2_edge_sets(n)
    assert len(e1) == len(e2) == n - 1
    g, trees = gen_bad2(n)
    assert [t.edges() for t in trees] == [{tuple(sorted(e)) for e in e1},
                                          {tuple(sorted(e)) for e in e2}]
    assert len(g) <= 2 * (n - 1)


def test_bad2_rejects_sizes_not_divisible_by_four():
    with pytest.raises(WorkloadError):
        bad2_edge_sets(10)


@pytest.mark.parametrize("n", [64, 128, 256])
def test_bad2_intervals_have_linear_cuts(n):
    e1, e2 = bad2_edge_sets(n)
    edges = e1 + e2
    for length in range(n // 8 + 1, n // 4):
        for start in range(1, n - length + 2):
            stop = start + length - 1
            crossing = sum((start <= a <= stop) != (start <= b <= stop) for a, b in edges)
            assert crossing >= length / 4, (start, stop, crossing)


def test_match_emits_guest_edges_only():
    g = gen_rnd_obst(40, 2, seed=1)
    seq = seq_match(g, 333, seed=5)
    assert len(seq) == 333
    assert all((min(u, v), max(u, v)) in g.edges for u, v in seq)


def test_match_first_round_is_a_matching():
    g = GuestGraph.from_pairs(6, [(1, 2), (3, 4), (5, 6)])
    seq = seq_match(g, 3, seed=2)
    endpoints = [p for req in seq for p in req]
    assert sorted(endpoints) == [1, 2, 3, 4, 5, 6]


def test_match_needs_edges():
    with pytest.raises(WorkloadError):
        seq_match(GuestGraph.from_pairs(3, []), 5, seed=0)


def test_rw_without_repeats_walks_along_edges():
    g = gen_rnd_obst(30, 2, seed=4)
    seq = seq_rw(g, 200, 0.0, seed=1).requests
    assert all(seq[t][0] == seq[t - 1][1] for t in range(1, len(seq)))
    assert all((min(u, v), max(u, v)) in g.edges for u, v in seq)


def test_rw_full_repeat_is_constant():
    g = gen_rnd_obst(30, 2, seed=4)
    seq = seq_rw(g, 50, 1.0, seed=1).requests
    assert len(set(seq)) == 1


def test_rw_rejects_bad_probability_and_isolated_start():
    g = GuestGraph.from_pairs(3, [(1, 2)])
    with pytest.raises(WorkloadError):
        seq_rw(g, 5, 1.5, seed=0)
    with pytest.raises(WorkloadError, match="isolated"):
        seq_rw(g, 5, 0.5, seed=0, start=3)


def test_uniform_draws_from_the_multiset():
    seq = seq_uniform([(1, 2), (3, 4)], 100, seed=6)
    assert {(min(u, v), max(u, v)) for u, v in seq} <= {(1, 2), (3, 4)}
    assert seq_uniform([(1, 2), (3, 4)], 100, seed=6).requests == seq.requests


def test_match_on_a_triangle_cycles_edges_uniformly():
    g = GuestGraph.from_pairs(3, [(1, 2), (2, 3), (1, 3)])
    seq = seq_match(g, 10_000, seed=7)
    counts = Counter((min(u, v), max(u, v)) for u, v in seq)
    assert set(counts) == {(1, 2), (2, 3), (1, 3)}
    for c in counts.values():
        assert c / 10_000 == pytest.approx(1 / 3, abs=0.02)


def test_rw_repeats_at_the_requested_rate():
    g = gen_rnd_obst(64, 4, seed=2)
    seq = seq_rw(g, 20_000, 0.5, seed=9).requests
    repeats = sum(seq[t] == seq[t - 1] for t in range(1, len(seq)))
    assert repeats / (len(seq) - 1) == pytest.approx(0.5, abs=0.02)


def test_relabel_bfs_breaks_hub_ties_under_the_seed():
    # hubs 1 and 5 both have degree 4
    g = GuestGraph.from_pairs(8, [(1, 2), (1, 3), (1, 4), (1, 5), (5, 6), (5, 7), (5, 8)])
    from_one = frozenset({(1, 2), (1, 3), (1, 4), (1, 5), (5, 6), (5, 7), (5, 8)})
    from_five = frozenset({(1, 2), (1, 3), (1, 4), (1, 5), (2, 6), (2, 7), (2, 8)})
    outcomes = {relabel_bfs(g, seed).edges for seed in range(20)}
    assert outcomes == {from_one, from_five}
    assert relabel_bfs(g, 3) == relabel_bfs(g, 3)
