"""Static optimisation toolkit: empirical measures, entropy bounds, and oracles.

Covers the weight-balanced (Mehlhorn) tree, the exact interval-DP optimum,
request partitioning across k trees, the entropy upper/lower bounds for
OBST(1) and OBST(k), exhaustive small-n oracles, and the intersecting-request
machinery behind perfect overlays. Logs are base 2 throughout.
"""

import bisect
import itertools
import logging
import math
import random
from collections import Counter
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

from bst_core import Bst, PeerId
from errors import BoundsError, MembershipError, TreeError
from overlay import Overlay
from seeds import derive_seed

logger = logging.getLogger(__name__)

Pair = tuple[PeerId, PeerId]

LOG2_3 = math.log2(3)
MEHLHORN_CONSTANT = 1.0 / (1.0 - math.log2(math.sqrt(5) - 1))


# --- empirical measures and entropy ---

@dataclass
class EmpiricalMeasures:
    n: int
    m: int
    x: np.ndarray  # source frequency of id i at index i-1
    y: np.ndarray
    z: np.ndarray
    f: dict[Pair, float]


def empirical_measures(sigma: Iterable[Pair], n: int) -> EmpiricalMeasures:
    requests = list(sigma)
    if not requests:
        raise BoundsError("empirical measures need a non-empty request sequence")
    x = np.zeros(n)
    y = np.zeros(n)
    counts: Counter = Counter()
    for u, v in requests:
        if not (1 <= u <= n and 1 <= v <= n):
            raise BoundsError(f"request ({u}, {v}) outside [1, {n}]")
        x[u - 1] += 1
        y[v - 1] += 1
        counts[(u, v)] += 1
    m = len(requests)
    x /= m
    y /= m
    return EmpiricalMeasures(n, m, x, y, (x + y) / 2,
                             {pair: c / m for pair, c in counts.items()})


def entropy(p: Iterable[float] | Mapping) -> float:
    """Shannon entropy in bits; the mass is normalised and 0 log 0 = 0."""
    values = p.values() if isinstance(p, Mapping) else p
    arr = np.asarray(list(values), dtype=float)
    if (arr < 0).any():
        raise BoundsError("distribution has negative mass")
    total = arr.sum()
    if total <= 0:
        return 0.0
    q = arr[arr > 0] / total
    return max(0.0, float(-(q * np.log2(q)).sum()))


# --- single-tree lookup structures ---

def weighted_depth(t: Bst, weights: Sequence[float]) -> float:
    """Sum of w_i * depth(i) with weights indexed by id - 1 and depth in edges."""
    return float(sum(weights[key - 1] * d for key, d in t.depths().items()))


def mehlhorn_tree(z: Sequence[float]) -> Bst:
    """Weight-balanced BST over ids 1..n.

    Each subtree root is the id minimising |weight left of it - weight right
    of it| (smallest id on ties); zero-weight ranges are split at the middle.
    """
    w = np.asarray(z, dtype=float)
    n = len(w)
    if n == 0:
        return Bst()
    prefix = np.concatenate([[0.0], np.cumsum(w)])
    preorder = []
    stack = [(1, n)]
    while stack:
        lo, hi = stack.pop()
        if lo > hi:
            continue
        if prefix[hi] - prefix[lo - 1] <= 0:
            r = (lo + hi) // 2
        else:
            rs = np.arange(lo, hi + 1)
            imbalance = np.abs((prefix[rs - 1] - prefix[lo - 1]) - (prefix[hi] - prefix[rs]))
            r = lo + int(np.argmin(imbalance))
        preorder.append(r)
        stack.append((r + 1, hi))
        stack.append((lo, r - 1))
    return Bst.from_preorder(preorder)


def optimal_lookup_bst(weights: Sequence[float], limit: int = 512) -> tuple[Bst, float]:
    """Exact minimum of sum w_i * depth_i by interval DP (Knuth's root monotonicity)."""
    w = [float(v) for v in weights]
    n = len(w)
    if n > limit:
        raise BoundsError(f"optimal_lookup_bst limited to n <= {limit}, got {n}")
    if n == 0:
        return Bst(), 0.0
    prefix = [0.0]
    for v in w:
        prefix.append(prefix[-1] + v)

    # e[i][j]: optimal sum of w * (depth + 1) over ids i..j; e[i][i-1] = 0
    e = [[0.0] * (n + 2) for _ in range(n + 2)]
    root = [[0] * (n + 2) for _ in range(n + 2)]
    for i in range(1, n + 1):
        e[i][i] = w[i - 1]
        root[i][i] = i
    for length in range(2, n + 1):
        for i in range(1, n - length + 2):
            j = i + length - 1
            best, best_r = math.inf, i
            for r in range(root[i][j - 1], root[i + 1][j] + 1):
                c = e[i][r - 1] + e[r + 1][j]
                if c < best:
                    best, best_r = c, r
            e[i][j] = best + prefix[j] - prefix[i - 1]
            root[i][j] = best_r

    preorder = []
    stack = [(1, n)]
    while stack:
        i, j = stack.pop()
        if i > j:
            continue
        r = root[i][j]
        preorder.append(r)
        stack.append((r + 1, j))
        stack.append((i, r - 1))
    return Bst.from_preorder(preorder), e[1][n] - prefix[n]


@lru_cache(maxsize=None)
def _shapes(size: int) -> np.ndarray:
    """Depth vectors of every BST over ``size`` consecutive keys (Catalan many rows)."""
    if size == 0:
        return np.zeros((1, 0), dtype=np.int16)
    blocks = []
    for r in range(size):
        left, right = _shapes(r), _shapes(size - r - 1)
        a, b = len(left), len(right)
        blocks.append(np.hstack([
            np.repeat(left + 1, b, axis=0),
            np.zeros((a * b, 1), dtype=np.int16),
            np.tile(right + 1, (a, 1)),
        ]))
    return np.vstack(blocks)


def all_bst_depths(n: int) -> np.ndarray:
    return _shapes(n)


def tree_from_depths(depths: Sequence[int]) -> Bst:
    """Rebuild the BST over ids 1..n whose node depths are ``depths``."""
    d = list(depths)
    preorder = []
    stack = [(1, len(d))]
    while stack:
        lo, hi = stack.pop()
        if lo > hi:
            continue
        r = min(range(lo, hi + 1), key=lambda i: d[i - 1])
        preorder.append(r)
        stack.append((r + 1, hi))
        stack.append((lo, r - 1))
    return Bst.from_preorder(preorder)


def brute_force_optimal_obst1(sigma: Iterable[Pair], n: int,
                              limit: int = 12) -> tuple[Bst, float]:
    """Best single BST for static routing by enumerating all of them.

    Returns the tree and its average request cost (distance + 1).
    """
    if n > limit:
        raise BoundsError(f"exhaustive OBST(1) limited to n <= {limit}, got {n}")
    meas = empirical_measures(sigma, n)
    depths = all_bst_depths(n).astype(np.int32)
    total = np.zeros(len(depths))
    for (u, v), weight in meas.f.items():
        lo, hi = min(u, v), max(u, v)
        lca_depth = depths[:, lo - 1:hi].min(axis=1)
        total += weight * (depths[:, u - 1] + depths[:, v - 1] - 2 * lca_depth)
    best = int(np.argmin(total))
    return tree_from_depths(depths[best]), float(total[best]) + 1.0


def exhaustive_lookup_optimum(weights: Sequence[float], k: int) -> float:
    """Minimum average lookup depth over all sets of k in {1, 2} BSTs."""
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    depths = all_bst_depths(len(w)).astype(float)
    if k == 1:
        return float((depths @ w).min())
    if k == 2:
        best = math.inf
        for row in depths:
            best = min(best, float((np.minimum(row, depths) @ w).min()))
        return best
    raise BoundsError(f"exhaustive lookup oracle supports k in (1, 2), got {k}")


def lookup_cost(trees: Bst | Sequence[Bst], lookups: Iterable[PeerId]) -> float:
    """Average depth of each looked-up id in the tree where it sits shallowest."""
    trees = [trees] if isinstance(trees, Bst) else list(trees)
    tables = [t.depths() for t in trees]
    total, count = 0, 0
    for v in lookups:
        try:
            total += min(tab[v] for tab in tables)
        except KeyError:
            raise MembershipError(f"lookup {v} is not in every tree") from None
        count += 1
    return total / count if count else 0.0


# --- partitioning requests across trees ---

@dataclass
class Partition:
    classes: list[Pair]
    weights: list[float]
    assignment: dict[Pair, int]  # class -> 1-based set index
    alphas: tuple[float, ...]
    exact: bool = False

    @property
    def k(self) -> int:
        return len(self.alphas)

    @property
    def entropy(self) -> float:
        return entropy(self.alphas)

    def members(self, index: int) -> list[Pair]:
        return [c for c in self.classes if self.assignment[c] == index]


def _loads_entropy(loads: Sequence[float]) -> float:
    # same value as entropy(loads); plain floats for the partition search inner loop
    total = sum(loads)
    h = 0.0
    for a in loads:
        if a > 0:
            p = a / total
            h -= p * math.log2(p)
    return h


def _exhaustive_assign(weights: list[float], k: int) -> list[int]:
    best_h, best = -1.0, [0] * len(weights)
    loads = [0.0] * k
    current = [0] * len(weights)

    def visit(i: int) -> None:
        nonlocal best_h, best
        if i == len(weights):
            h = _loads_entropy(loads)
            if h > best_h + 1e-12:
                best_h, best = h, current[:]
            return
        tried_empty = False
        for s in range(k):
            if loads[s] == 0.0:
                if tried_empty:
                    continue
                tried_empty = True
            loads[s] += weights[i]
            current[i] = s
            visit(i + 1)
            loads[s] -= weights[i]

    visit(0)
    return best


def _greedy_assign(weights: list[float], k: int) -> list[int]:
    """Longest-processing-time placement followed by single-class moves."""
    loads = [0.0] * k
    out = []
    for w in weights:
        s = min(range(k), key=lambda i: (loads[i], i))
        loads[s] += w
        out.append(s)

    for _ in range(50):
        improved = False
        h = _loads_entropy(loads)
        for i, w in enumerate(weights):
            src = out[i]
            for dst in range(k):
                if dst == src:
                    continue
                loads[src] -= w
                loads[dst] += w
                h_new = _loads_entropy(loads)
                if h_new > h + 1e-12:
                    out[i], src, h, improved = dst, dst, h_new, True
                else:
                    loads[src] += w
                    loads[dst] -= w
        if not improved:
            break
    return out


def partition_requests(sigma: Iterable[Pair], k: int, symmetric: bool = False,
                       exact_limit: int = 20, budget: int = 1 << 20) -> Partition:
    """Split request classes into k sets, approximately maximising H(alpha)."""
    if k < 1:
        raise BoundsError(f"k must be >= 1, got {k}")
    counts: Counter = Counter()
    m = 0
    for u, v in sigma:
        key = (min(u, v), max(u, v)) if symmetric else (u, v)
        counts[key] += 1
        m += 1
    if m == 0:
        raise BoundsError("cannot partition an empty request sequence")
    classes = sorted(counts, key=lambda c: (-counts[c], c))
    weights = [counts[c] / m for c in classes]

    exact = k == 1 or (len(classes) <= exact_limit and k ** max(len(classes) - 1, 0) <= budget)
    if k == 1:
        sets = [0] * len(classes)
    elif exact:
        sets = _exhaustive_assign(weights, k)
    else:
        if len(classes) <= exact_limit:
            logger.info("exhaustive partition over %d classes exceeds budget; using greedy",
                        len(classes))
        sets = _greedy_assign(weights, k)

    alphas = [0.0] * k
    for s, w in zip(sets, weights):
        alphas[s] += w
    assignment = {c: s + 1 for c, s in zip(classes, sets)}
    return Partition(classes, weights, assignment, tuple(alphas), exact)


def restricted_z(partition: Partition, index: int, n: int) -> np.ndarray:
    """Z measure of the requests in set ``index``, renormalised (uniform if empty)."""
    z = np.zeros(n)
    for (u, v), w in zip(partition.classes, partition.weights):
        if partition.assignment[(u, v)] == index:
            z[u - 1] += w / 2
            z[v - 1] += w / 2
    total = z.sum()
    return z / total if total > 0 else np.full(n, 1.0 / n)


def build_static_obst(sigma: Iterable[Pair], n: int, k: int,
                      partition: Partition | None = None) -> Overlay:
    """One weight-balanced tree per request set of a partition of sigma."""
    requests = list(sigma)
    if partition is None:
        partition = partition_requests(requests, k)
    if partition.k != k:
        raise BoundsError(f"partition has {partition.k} sets, expected {k}")
    trees = [mehlhorn_tree(restricted_z(partition, i, n)) for i in range(1, k + 1)]
    return Overlay.from_trees(trees)


def static_cost(overlay: Overlay, sigma: Iterable[Pair]) -> float:
    return overlay.run_sequence(sigma, adjust=False).average_cost()


# --- bounds ---

@dataclass
class BoundReport:
    n: int
    k: int
    m: int
    h_x: float
    h_y: float
    h_z: float
    h_alpha: float
    lower_t1: float
    upper_t2: float
    upper_t4: float
    upper_t5: float
    lookup_lower_t7: float
    t7_clamped: bool
    mehlhorn_constant: float = MEHLHORN_CONSTANT

    def to_dict(self) -> dict:
        return asdict(self)


def bound_report(sigma: Iterable[Pair], n: int, k: int,
                 partition: Partition | None = None) -> BoundReport:
    requests = list(sigma)
    meas = empirical_measures(requests, n)
    if partition is None:
        partition = partition_requests(requests, k)
    if partition.k != k:
        raise BoundsError(f"partition has {partition.k} sets, expected {k}")
    h_x, h_y, h_z = entropy(meas.x), entropy(meas.y), entropy(meas.z)
    h_alpha = partition.entropy
    t7 = (h_y - math.log2(k)) / LOG2_3
    if t7 < 0:
        logger.info("k=%d makes the lookup lower bound vacuous; clamped at 0", k)
    return BoundReport(
        n=n, k=k, m=meas.m,
        h_x=h_x, h_y=h_y, h_z=h_z, h_alpha=h_alpha,
        lower_t1=h_y / LOG2_3,
        upper_t2=2 + MEHLHORN_CONSTANT * h_y,
        upper_t4=4 + 2 * MEHLHORN_CONSTANT * h_z,
        upper_t5=4 + MEHLHORN_CONSTANT * (2 * h_z - 2 * h_alpha),
        lookup_lower_t7=max(0.0, t7),
        t7_clamped=t7 < 0,
    )


# --- intersecting requests and perfect overlays ---

def intersects(r1: Pair, r2: Pair) -> bool:
    """True iff exactly one endpoint of r2 lies strictly between the endpoints of r1.

    Requests sharing an endpoint never intersect.
    """
    i, j = r1
    a, b = r2
    if i == j or a == b:
        raise BoundsError(f"degenerate request in {r1} / {r2}")
    if len({i, j, a, b}) < 4:
        return False
    lo, hi = min(i, j), max(i, j)
    return (lo < a < hi) != (lo < b < hi)


def _validate_matching(matching: Iterable[Pair]) -> list[Pair]:
    pairs = [tuple(p) for p in matching]
    seen: set[PeerId] = set()
    for a, b in pairs:
        if a == b or a in seen or b in seen:
            raise BoundsError(f"not a matching: ({a}, {b}) reuses an endpoint")
        seen.update((a, b))
    return pairs


def _crossing_family_size(pairs: list[Pair], at_least: int | None = None) -> int:
    """Largest pairwise-crossing family of chords.

    Such a family has all left endpoints before all right endpoints, with right
    endpoints increasing in left-endpoint order, so it is a longest increasing
    subsequence among the chords straddling some split point.
    """
    chords = sorted((min(p), max(p)) for p in pairs)
    best = 1 if chords else 0
    for split, _ in chords:
        tails: list[int] = []
        for a, b in chords:
            if a > split:
                break
            if b <= split:
                continue
            pos = bisect.bisect_left(tails, b)
            if pos == len(tails):
                tails.append(b)
            else:
                tails[pos] = b
        best = max(best, len(tails))
        if at_least is not None and best >= at_least:
            break
    return best


def max_mutually_intersecting(matching: Iterable[Pair], clique_limit: int = 24) -> int:
    pairs = _validate_matching(matching)
    if not pairs:
        return 0
    if len(pairs) > clique_limit:
        return _crossing_family_size(pairs)
    g = nx.Graph()
    g.add_nodes_from(range(len(pairs)))
    for i, j in itertools.combinations(range(len(pairs)), 2):
        if intersects(pairs[i], pairs[j]):
            g.add_edge(i, j)
    return max(len(c) for c in nx.find_cliques(g))


def interval_scenario_holds(matching: Iterable[Pair], n: int, r: int) -> bool | None:
    """Whether interval I_i meets I_{i+x/2} for every i, with x = n / r intervals.

    None when n / r is not an even integer.
    """
    if n % r or (n // r) % 2:
        return None
    half = n // r // 2
    linked: set[tuple[int, int]] = set()
    for a, b in matching:
        ia, ib = (a - 1) // r, (b - 1) // r
        linked.add((min(ia, ib), max(ia, ib)))
    return all((i, i + half) in linked for i in range(half))


@dataclass
class MonteCarloResult:
    n: int
    r: int
    trials: int
    threshold: int
    hits: int
    scenario_hits: int | None

    @property
    def frequency(self) -> float:
        return self.hits / self.trials

    @property
    def scenario_frequency(self) -> float | None:
        return None if self.scenario_hits is None else self.scenario_hits / self.trials

    @property
    def bound(self) -> float:
        return 1.0 - 1.0 / self.r

    @property
    def sigma_hat(self) -> float:
        p = self.bound
        return math.sqrt(p * (1 - p) / self.trials)


def random_perfect_matching(n: int, rng: random.Random) -> list[Pair]:
    ids = list(range(1, n + 1))
    rng.shuffle(ids)
    return [(ids[i], ids[i + 1]) for i in range(0, n, 2)]


def theorem9_montecarlo(n: int, r: int, trials: int, seed: int) -> MonteCarloResult:
    """Frequency of random perfect matchings that need at least n/r trees to embed perfectly."""
    if n < 2 or n % 2:
        raise BoundsError(f"a perfect matching needs an even n >= 2, got {n}")
    if r < math.sqrt(n * math.log(n)) or r > n:
        raise BoundsError(f"r={r} outside [sqrt(n ln n), n] = [{math.sqrt(n * math.log(n)):.2f}, {n}]")
    if trials < 1:
        raise BoundsError("need at least one trial")
    threshold = math.ceil(n / r)
    hits = 0
    scenario_hits: int | None = 0 if n % r == 0 and (n // r) % 2 == 0 else None
    for trial in range(trials):
        matching = random_perfect_matching(n, random.Random(derive_seed(seed, trial)))
        if len(matching) <= 24:
            size = max_mutually_intersecting(matching)
        else:
            size = _crossing_family_size(matching, at_least=threshold)
        hits += size >= threshold
        if scenario_hits is not None:
            scenario_hits += bool(interval_scenario_holds(matching, n, r))
    logger.debug("n=%d r=%d: %d/%d matchings need >= %d trees", n, r, hits, trials, threshold)
    return MonteCarloResult(n, r, trials, threshold, hits, scenario_hits)


def embed_nonintersecting_matching(matching: Iterable[Pair]) -> Bst:
    """Single BST with every pair of a non-intersecting matching adjacent.

    Pairs are inserted outermost first, each lower endpoint as a leaf and
    the upper one as its child.
    """
    pairs = _validate_matching(matching)
    for p, q in itertools.combinations(pairs, 2):
        if intersects(p, q):
            raise BoundsError(f"requests {p} and {q} intersect")
    t = Bst()
    for a, b in sorted(((min(p), max(p)) for p in pairs), key=lambda c: (c[0] - c[1], c[0])):
        t.insert_leaf(a)
        t.insert_leaf(b)
        if t.nodes[b].parent is not t.nodes[a]:
            raise TreeError(f"pair ({a}, {b}) could not be embedded adjacently")
    return t


def embed_matching_obst(matching: Iterable[Pair], k: int) -> Overlay:
    """Perfect OBST(k) for a matching whose pairs fit into k intersection-free groups."""
    pairs = _validate_matching(matching)
    groups: list[list[Pair]] = [[] for _ in range(k)]
    for pair in sorted(pairs, key=lambda c: (-abs(c[0] - c[1]), min(c))):
        for group in groups:
            if not any(intersects(pair, other) for other in group):
                group.append(pair)
                break
        else:
            raise BoundsError(f"matching needs more than k={k} trees")
    everyone = sorted(v for p in pairs for v in p)
    trees = []
    for group in groups:
        t = embed_nonintersecting_matching(group)
        for v in everyone:
            if v not in t:
                t.insert_leaf(v)
        trees.append(t)
    return Overlay.from_trees(trees)
