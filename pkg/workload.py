"""Guest graphs and request-sequence generators.

Guest graphs model who talks to whom (BitTorrent-like swarms, social graphs
from edge lists, random OBSTs, the two-tree Bad(2) instance); sequences turn
a guest graph into a stream of (source, destination) requests: random maximal
matchings (Match) or random walks with optional repetition (RW-p).
"""

import csv
import io
import logging
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import networkx as nx

from bst_core import Bst, PeerId, from_edges, random_bst
from errors import WorkloadError
from seeds import derive_seed

logger = logging.getLogger(__name__)

Pair = tuple[PeerId, PeerId]


def _norm(a: PeerId, b: PeerId) -> Pair:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class GuestGraph:
    n: int
    edges: frozenset[Pair]
    weights: dict[Pair, float] | None = field(default=None, compare=False)

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[Pair],
                   weights: dict[Pair, float] | None = None) -> "GuestGraph":
        edges = set()
        for a, b in pairs:
            if a == b:
                continue
            if not (1 <= a <= n and 1 <= b <= n):
                raise WorkloadError(f"edge ({a}, {b}) outside [1, {n}]")
            edges.add(_norm(a, b))
        return cls(n, frozenset(edges), weights)

    def __len__(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[Pair]:
        return sorted(self.edges)

    def adjacency(self) -> dict[PeerId, list[PeerId]]:
        adj: dict[PeerId, list[PeerId]] = {v: [] for v in range(1, self.n + 1)}
        for a, b in self.sorted_edges():
            adj[a].append(b)
            adj[b].append(a)
        for v in adj:
            adj[v].sort()
        return adj

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(1, self.n + 1))
        g.add_edges_from(self.edges)
        return g


@dataclass
class RequestSequence:
    requests: list[Pair]

    def __iter__(self) -> Iterator[Pair]:
        return iter(self.requests)

    def __len__(self) -> int:
        return len(self.requests)

    @property
    def m(self) -> int:
        return len(self.requests)

    def max_id(self) -> int:
        return max((max(u, v) for u, v in self.requests), default=0)

    def dumps(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "src", "dst"])
        for t, (u, v) in enumerate(self.requests):
            writer.writerow([t, u, v])
        return buf.getvalue()

    @classmethod
    def loads(cls, text: str) -> "RequestSequence":
        requests = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line or line.replace(" ", "").lower() == "t,src,dst":
                continue
            parts = [p for p in line.replace(",", " ").split()]
            if len(parts) != 3:
                raise WorkloadError(f"line {lineno}: expected 't src dst', got {line!r}")
            try:
                _, u, v = (int(p) for p in parts)
            except ValueError:
                raise WorkloadError(f"line {lineno}: non-integer field in {line!r}") from None
            if u < 1 or v < 1:
                raise WorkloadError(f"line {lineno}: peer ids must be positive")
            if u == v:
                raise WorkloadError(f"line {lineno}: self-request ({u}, {v})")
            requests.append((u, v))
        return cls(requests)


# --- edge lists ---

def load_edge_list(text: str) -> GuestGraph:
    """Parse whitespace-separated id pairs (optional third weight column)."""
    raw: list[tuple[int, int, float | None]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise WorkloadError(f"line {lineno}: expected 'a b [weight]', got {line!r}")
        try:
            a, b = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else None
        except ValueError:
            raise WorkloadError(f"line {lineno}: cannot parse {line!r}") from None
        if a < 0 or b < 0:
            raise WorkloadError(f"line {lineno}: negative id in {line!r}")
        raw.append((a, b, w))
    if not raw:
        raise WorkloadError("edge list is empty")

    shift = 0
    if min(min(a, b) for a, b, _ in raw) == 0:
        logger.warning("edge list is 0-indexed; shifting ids by +1")
        shift = 1
    loops = 0
    pairs, weights = [], {}
    for a, b, w in raw:
        a, b = a + shift, b + shift
        if a == b:
            loops += 1
            continue
        pairs.append((a, b))
        if w is not None:
            weights[_norm(a, b)] = weights.get(_norm(a, b), 0.0) + w
    if loops:
        logger.warning("dropped %d self-loops", loops)
    n = max(max(a, b) for a, b in pairs) if pairs else max(a for a, _, _ in raw) + shift
    return GuestGraph.from_pairs(n, pairs, weights or None)


def dump_edge_list(g: GuestGraph) -> str:
    lines = [f"# n={g.n} edges={len(g)}"]
    lines += [f"{a} {b}" for a, b in g.sorted_edges()]
    return "\n".join(lines) + "\n"


def relabel_bfs(g: GuestGraph, seed: int = 0) -> GuestGraph:
    """Renumber 1..n' in BFS order from a maximum-degree node (ties broken at random)."""
    graph = g.to_networkx()
    graph.remove_nodes_from([v for v, d in list(graph.degree()) if d == 0])
    if graph.number_of_nodes() == 0:
        raise WorkloadError("cannot relabel a graph without edges")
    if not nx.is_connected(graph):
        components = sorted(nx.connected_components(graph), key=lambda c: (-len(c), min(c)))
        logger.warning("graph has %d components; keeping the largest (%d of %d nodes)",
                       len(components), len(components[0]), graph.number_of_nodes())
        graph = graph.subgraph(components[0]).copy()

    top = max(d for _, d in graph.degree())
    hubs = sorted(v for v, d in graph.degree() if d == top)
    start = random.Random(seed).choice(hubs)
    order = [start] + [b for _, b in nx.bfs_edges(graph, start, sort_neighbors=sorted)]
    mapping = {old: new for new, old in enumerate(order, start=1)}
    pairs = [(mapping[a], mapping[b]) for a, b in graph.edges()]
    return GuestGraph.from_pairs(len(order), pairs)


def induced_prefix(g: GuestGraph, n: int) -> GuestGraph:
    if not 1 <= n <= g.n:
        raise WorkloadError(f"prefix size {n} outside [1, {g.n}]")
    return GuestGraph.from_pairs(n, [(a, b) for a, b in g.edges if b <= n])


# --- guest graph generators ---

def gen_bt(n: int, swarm_size: int = 32, swarms_per_peer: int = 2, seed: int = 0) -> GuestGraph:
    """BitTorrent-like swarms: union of cliques with neighbour-driven swarm choice.

    Peers arrive in random order. The first swarm a peer joins is uniform among
    swarms with room; each further swarm is chosen with probability
    proportional to 1 + the number of the peer's current neighbours already in it.
    """
    if n < 1 or swarm_size < 2 or swarms_per_peer < 1:
        raise WorkloadError(
            f"infeasible BT parameters n={n}, swarm_size={swarm_size}, "
            f"swarms_per_peer={swarms_per_peer}")
    n_swarms = max(swarms_per_peer, math.ceil(n * swarms_per_peer / swarm_size))
    rng = random.Random(seed)
    members: list[set[PeerId]] = [set() for _ in range(n_swarms)]
    order = list(range(1, n + 1))
    rng.shuffle(order)

    overfull = 0
    for peer in order:
        joined: set[int] = set()
        neighbours: set[PeerId] = set()
        for j in range(swarms_per_peer):
            candidates = [s for s in range(n_swarms)
                          if s not in joined and len(members[s]) < swarm_size]
            if not candidates:
                candidates = [s for s in range(n_swarms) if s not in joined]
                overfull += 1
            if j == 0:
                s = rng.choice(candidates)
            else:
                weights = [1 + len(members[c] & neighbours) for c in candidates]
                s = rng.choices(candidates, weights=weights)[0]
            neighbours |= members[s]
            members[s].add(peer)
            joined.add(s)
    if overfull:
        logger.warning("%d swarm joins exceeded swarm_size=%d", overfull, swarm_size)

    pairs = []
    for swarm in members:
        ordered = sorted(swarm)
        pairs += [(a, b) for i, a in enumerate(ordered) for b in ordered[i + 1:]]
    return GuestGraph.from_pairs(n, pairs)


def gen_rnd_obst(n: int, k: int, seed: int) -> GuestGraph:
    """Union of k random BSTs; the same seed gives the trees of Overlay.new_random."""
    if n < 1 or k < 1:
        raise WorkloadError(f"gen_rnd_obst needs n, k >= 1, got n={n}, k={k}")
    pairs: set[Pair] = set()
    for i in range(k):
        pairs |= random_bst(n, derive_seed(seed, i)).edges()
    return GuestGraph.from_pairs(n, pairs)


def bad2_edge_sets(n: int) -> tuple[list[Pair], list[Pair]]:
    """Edge lists of the two laminated trees of the Bad(2) instance."""
    if n < 4 or n % 4:
        raise WorkloadError(f"Bad(2) needs n divisible by 4, got n={n}")
    h, q = n // 2, n // 4
    e1 = ([(i, h - i + 1) for i in range(1, q + 1)]
          + [(h - i, i + 2) for i in range(0, q - 1)]
          + [(h + i, n - i) for i in range(0, q)]
          + [(n - i, h + 1 + i) for i in range(0, q)])
    e2 = ([(i, n - i + 1) for i in range(1, h + 1)]
          + [(n - i, i + 2) for i in range(0, h - 1)])
    return e1, e2


def gen_bad2(n: int) -> tuple[GuestGraph, list[Bst]]:
    e1, e2 = bad2_edge_sets(n)
    trees = [from_edges(n, e1), from_edges(n, e2)]
    return GuestGraph.from_pairs(n, e1 + e2), trees


# --- request sequences ---

def seq_match(g: GuestGraph, m: int, seed: int) -> RequestSequence:
    """Repeated random maximal matchings; every matched edge is emitted once per round."""
    edges = g.sorted_edges()
    if not edges:
        raise WorkloadError("Match needs a guest graph with at least one edge")
    rng = random.Random(seed)
    requests: list[Pair] = []
    while len(requests) < m:
        shuffled = edges[:]
        rng.shuffle(shuffled)
        used: set[PeerId] = set()
        for a, b in shuffled:
            if a in used or b in used:
                continue
            used.update((a, b))
            requests.append((a, b) if rng.random() < 0.5 else (b, a))
            if len(requests) == m:
                break
    return RequestSequence(requests)


def seq_rw(g: GuestGraph, m: int, p_repeat: float, seed: int,
           start: PeerId | None = None) -> RequestSequence:
    """Random walk; each step re-emits the previous request with probability p_repeat."""
    if not 0.0 <= p_repeat <= 1.0:
        raise WorkloadError(f"p_repeat must lie in [0, 1], got {p_repeat}")
    adj = g.adjacency()
    rng = random.Random(seed)
    if start is None:
        movable = [v for v in sorted(adj) if adj[v]]
        if not movable:
            raise WorkloadError("random walk needs a guest graph with at least one edge")
        start = rng.choice(movable)
    elif not adj.get(start):
        raise WorkloadError(f"random walk start {start} is isolated")

    requests: list[Pair] = []
    current = start
    previous: Pair | None = None
    while len(requests) < m:
        if previous is not None and rng.random() < p_repeat:
            requests.append(previous)
            continue
        nxt = rng.choice(adj[current])
        previous = (current, nxt)
        requests.append(previous)
        current = nxt
    return RequestSequence(requests)


def seq_uniform(edges: list[Pair], m: int, seed: int) -> RequestSequence:
    """Requests drawn uniformly from an edge multiset, each in a random direction."""
    if not edges:
        raise WorkloadError("uniform sequence needs at least one edge")
    rng = random.Random(seed)
    requests = []
    for _ in range(m):
        a, b = rng.choice(edges)
        requests.append((a, b) if rng.random() < 0.5 else (b, a))
    return RequestSequence(requests)
