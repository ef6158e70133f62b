"""OBST(k): k binary search trees over one peer set.

Requests are served on the tree where the two endpoints are closest; in
adjusting mode that tree is then double-splayed so the pair becomes adjacent.
Peers join as leaves of every tree and leave by the predecessor/successor swap.
"""

import logging
import random
from dataclasses import dataclass, field
from typing import Iterable

import networkx as nx

from bst_core import Bst, PeerId, RotationLedger, check_bst, random_bst
from errors import MembershipError, TreeError
from seeds import derive_seed

logger = logging.getLogger(__name__)

STATIC = "static"
ADJUSTING = "adjusting"


@dataclass(frozen=True)
class Request:
    source: PeerId
    dest: PeerId
    t: int


@dataclass(frozen=True)
class CostRecord:
    t: int
    distance: int
    rotations: int
    tree_used: int  # 1-based

    @property
    def cost(self) -> int:
        return self.distance + 1 + self.rotations


@dataclass
class CostLedger:
    mode: str
    records: list[CostRecord] = field(default_factory=list)
    total: int = 0

    def __len__(self) -> int:
        return len(self.records)

    def append(self, record: CostRecord) -> None:
        self.records.append(record)
        self.total += record.cost

    def average_cost(self) -> float:
        """Mean of distance + 1 + rotations; 0 for an empty ledger."""
        if not self.records:
            return 0.0
        return sum(r.cost for r in self.records) / len(self.records)

    def average_distance(self, start: int = 0, stop: int | None = None) -> float:
        window = self.records[start:stop]
        if not window:
            return 0.0
        return sum(r.distance for r in window) / len(window)

    def total_rotations(self) -> int:
        return sum(r.rotations for r in self.records)


class Overlay:
    def __init__(self, trees: list[Bst], seed: int = 0, adjust_every: int = 1):
        if not trees:
            raise TreeError("an overlay needs at least one tree")
        if adjust_every < 1:
            raise TreeError(f"adjust_every must be >= 1, got {adjust_every}")
        self.trees = trees
        self.rng = random.Random(seed)
        self.adjust_every = adjust_every
        self.served = 0
        self._adjustable = 0

    @property
    def k(self) -> int:
        return len(self.trees)

    @property
    def n(self) -> int:
        return len(self.trees[0])

    def peers(self) -> list[PeerId]:
        return self.trees[0].ids()

    def __contains__(self, peer: PeerId) -> bool:
        return peer in self.trees[0]

    # --- construction ---

    @classmethod
    def new_random(cls, n: int, k: int, seed: int, adjust_every: int = 1) -> "Overlay":
        if n < 1 or k < 1:
            raise TreeError(f"new_random needs n >= 1 and k >= 1, got n={n}, k={k}")
        trees = [random_bst(n, derive_seed(seed, i)) for i in range(k)]
        return cls(trees, seed=derive_seed(seed, k, n), adjust_every=adjust_every)

    @classmethod
    def from_trees(cls, trees: list[Bst], seed: int = 0, adjust_every: int = 1) -> "Overlay":
        if not trees:
            raise TreeError("from_trees needs at least one tree")
        expected = set(trees[0].nodes)
        for i, t in enumerate(trees[1:], start=2):
            if set(t.nodes) != expected:
                raise TreeError(f"tree {i} spans a different peer set than tree 1")
        return cls(trees, seed=seed, adjust_every=adjust_every)

    @classmethod
    def empty(cls, k: int, seed: int = 0) -> "Overlay":
        if k < 1:
            raise TreeError(f"k must be >= 1, got {k}")
        return cls([Bst() for _ in range(k)], seed=seed)

    def copy(self) -> "Overlay":
        clone = Overlay([t.copy() for t in self.trees], adjust_every=self.adjust_every)
        clone.rng.setstate(self.rng.getstate())
        clone.served = self.served
        clone._adjustable = self._adjustable
        return clone

    def check(self) -> tuple[bool, str]:
        expected = set(self.trees[0].nodes)
        for i, t in enumerate(self.trees, start=1):
            ok, problem = check_bst(t)
            if not ok:
                return False, f"tree {i}: {problem}"
            if set(t.nodes) != expected:
                return False, f"tree {i}: peer set differs from tree 1"
        return True, ""

    # --- serving requests ---

    def _require(self, *peers: PeerId) -> None:
        for p in peers:
            if p not in self.trees[0]:
                raise MembershipError(f"peer {p} is not in the overlay")

    def closest_tree(self, u: PeerId, v: PeerId) -> tuple[int, int]:
        """(1-based tree index, hop distance) of the tree where u and v are closest."""
        self._require(u, v)
        best_index, best = 1, None
        for i, t in enumerate(self.trees, start=1):
            d = t.distance(u, v)
            if best is None or d < best:
                best_index, best = i, d
                if d <= 1:
                    break
        return best_index, best

    def serve_request(self, u: PeerId, v: PeerId, adjust: bool,
                      t: int | None = None) -> CostRecord:
        index = self.served if t is None else t
        self.served += 1
        if u == v:
            self._require(u)
            return CostRecord(index, 0, 0, 1)
        tree_used, distance = self.closest_tree(u, v)
        rotations = 0
        if adjust:
            self._adjustable += 1
            if self._adjustable % self.adjust_every == 0:
                ledger = RotationLedger()
                self.trees[tree_used - 1].double_splay(u, v, ledger)
                rotations = ledger.count
        return CostRecord(index, distance, rotations, tree_used)

    def run_sequence(self, sigma: Iterable[tuple[PeerId, PeerId]], adjust: bool,
                     churn: int = 0) -> CostLedger:
        """Serve every request in order; ``churn`` peers leave and rejoin after each."""
        ledger = CostLedger(ADJUSTING if adjust else STATIC)
        for t, (u, v) in enumerate(sigma):
            try:
                self._require(u, v)
            except MembershipError as exc:
                raise MembershipError(exc.message, index=t) from None
            ledger.append(self.serve_request(u, v, adjust, t))
            if churn:
                self.churn_step(churn)
        logger.debug("served %d requests (%s), average cost %.3f",
                     len(ledger), ledger.mode, ledger.average_cost())
        return ledger

    # --- joins, leaves, churn ---

    def join(self, peer: PeerId) -> None:
        if peer in self.trees[0]:
            raise TreeError(f"peer {peer} already joined")
        for t in self.trees:
            t.insert_leaf(peer)

    def leave(self, peer: PeerId) -> None:
        self._require(peer)
        for t in self.trees:
            t.remove(peer)

    def churn_step(self, lam: int) -> list[PeerId]:
        """``lam`` random peers leave every tree and rejoin as leaves."""
        peers = self.peers()
        if not 0 <= lam <= len(peers):
            raise TreeError(f"churn rate {lam} outside [0, {len(peers)}]")
        chosen = self.rng.sample(peers, lam)
        for p in chosen:
            self.leave(p)
            self.join(p)
        return chosen

    # --- graph views ---

    def union_graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.peers())
        for t in self.trees:
            g.add_edges_from(t.edges())
        return g

    def max_degree(self) -> int:
        return max((d for _, d in self.union_graph().degree()), default=0)
