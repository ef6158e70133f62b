import pytest

from bst_core import Bst, random_bst
from errors import MembershipError, TreeError
from overlay import ADJUSTING, STATIC, CostLedger, CostRecord, Overlay
from workload import bad2_edge_sets, gen_bad2, gen_rnd_obst, seq_match, seq_uniform


def test_new_random_is_deterministic():
    a = Overlay.new_random(20, 3, seed=5)
    b = Overlay.new_random(20, 3, seed=5)
    assert [t.dumps() for t in a.trees] == [t.dumps() for t in b.trees]
    assert a.k == 3 and a.n == 20
    assert a.check() == (True, "")


def test_from_trees_requires_same_peers():
    with pytest.raises(TreeError, match="different peer set"):
        Overlay.from_trees([random_bst(4, 1), random_bst(5, 1)])


def test_closest_tree_prefers_lowest_index_on_ties():
    t = Bst.from_preorder([2, 1, 3])
    o = Overlay.from_trees([t, t.copy()])
    assert o.closest_tree(1, 3) == (1, 2)


def test_closest_tree_picks_the_nearer_tree():
    far = Bst.from_preorder([1, 2, 3, 4])
    near = Bst.from_preorder([4, 1, 2, 3])
    o = Overlay.from_trees([far, near])
    index, d = o.closest_tree(1, 4)
    assert (index, d) == (2, 1)


def test_serve_request_adjusting_makes_pair_adjacent(overlay_3x32):
    rec = overlay_3x32.serve_request(3, 29, adjust=True)
    assert rec.cost == rec.distance + 1 + rec.rotations
    assert overlay_3x32.trees[rec.tree_used - 1].distance(3, 29) == 1
    assert overlay_3x32.check() == (True, "")


def test_self_request_costs_nothing(overlay_3x32):
    rec = overlay_3x32.serve_request(4, 4, adjust=True)
    assert (rec.distance, rec.rotations) == (0, 0)


def test_static_cost_is_mean_distance_plus_one(overlay_3x32):
    sigma = [(1, 20), (5, 9), (32, 2), (7, 8)]
    dists = [overlay_3x32.closest_tree(u, v)[1] for u, v in sigma]
    ledger = overlay_3x32.run_sequence(sigma, adjust=False)
    assert ledger.mode == STATIC
    assert ledger.average_cost() == pytest.approx(sum(dists) / 4 + 1)
    assert ledger.total_rotations() == 0


def test_ledger_total_matches_records(overlay_3x32):
    ledger = overlay_3x32.run_sequence([(1, 20), (20, 1), (5, 30)] * 5, adjust=True)
    assert ledger.mode == ADJUSTING
    assert ledger.total == sum(r.cost for r in ledger.records)
    assert [r.t for r in ledger.records] == list(range(15))


def test_empty_ledger_average_is_zero():
    assert CostLedger(STATIC).average_cost() == 0.0
    assert CostRecord(0, 1, 0, 1).cost == 2


def test_run_sequence_reports_request_index(overlay_3x32):
    with pytest.raises(MembershipError) as info:
        overlay_3x32.run_sequence([(1, 2), (3, 99)], adjust=False)
    assert info.value.index == 1
    assert str(info.value).startswith("request 1:")


def test_adjust_every_skips_intermediate_requests():
    o = Overlay.new_random(64, 1, seed=2, adjust_every=2)
    ledger = o.run_sequence([(1, 64), (2, 63), (3, 62), (4, 61)], adjust=True)
    assert ledger.records[0].rotations == 0
    assert ledger.records[2].rotations == 0


def test_join_and_leave_update_every_tree(overlay_3x32):
    overlay_3x32.leave(10)
    assert 10 not in overlay_3x32
    assert all(10 not in t for t in overlay_3x32.trees)
    overlay_3x32.join(10)
    assert overlay_3x32.check() == (True, "")
    with pytest.raises(TreeError):
        overlay_3x32.join(10)


def test_churn_step_keeps_peer_set(overlay_3x32):
    before = overlay_3x32.peers()
    chosen = overlay_3x32.churn_step(5)
    assert len(set(chosen)) == 5
    assert overlay_3x32.peers() == before
    assert overlay_3x32.check() == (True, "")
    with pytest.raises(TreeError):
        overlay_3x32.churn_step(33)


def test_churn_of_every_peer_reinserts_them_all(overlay_3x32):
    before = overlay_3x32.peers()
    assert sorted(overlay_3x32.churn_step(32)) == before
    assert overlay_3x32.peers() == before
    assert overlay_3x32.check() == (True, "")


def test_zero_churn_leaves_trees_untouched(overlay_3x32):
    before = [t.dumps() for t in overlay_3x32.trees]
    assert overlay_3x32.churn_step(0) == []
    assert [t.dumps() for t in overlay_3x32.trees] == before


def test_churned_run_stays_valid():
    o = Overlay.new_random(40, 2, seed=9)
    g = gen_rnd_obst(40, 4, seed=1)
    o.run_sequence(seq_match(g, 300, seed=2), adjust=True, churn=2)
    assert o.check() == (True, "")


def test_empty_overlay_grows_by_joins():
    o = Overlay.empty(2)
    for p in (5, 3, 8):
        o.join(p)
    assert o.peers() == [3, 5, 8]
    assert o.check() == (True, "")


def test_perfect_embedding_costs_exactly_two():
    g = gen_rnd_obst(64, 4, seed=21)
    o = Overlay.new_random(64, 4, seed=21)
    ledger = o.run_sequence(seq_match(g, 500, seed=3), adjust=False)
    assert ledger.average_cost() == 2.0


def test_bad2_generating_trees_serve_at_cost_two():
    e1, e2 = bad2_edge_sets(32)
    _, trees = gen_bad2(32)
    o = Overlay.from_trees(trees)
    ledger = o.run_sequence(seq_uniform(e1 + e2, 400, seed=4), adjust=False)
    assert ledger.average_cost() == 2.0


def test_union_graph_degree_is_bounded(overlay_3x32):
    g = overlay_3x32.union_graph()
    assert g.number_of_nodes() == 32
    assert overlay_3x32.max_degree() <= 3 * 3


def test_copy_preserves_state(overlay_3x32):
    before = [t.dumps() for t in overlay_3x32.trees]
    clone = overlay_3x32.copy()
    clone.serve_request(1, 32, adjust=True)
    assert [t.dumps() for t in overlay_3x32.trees] == before
    assert overlay_3x32.rng.random() == clone.rng.random()
