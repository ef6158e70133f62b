"""Binary search trees over peer identifiers.

Every node stores the smallest and largest identifier of its subtree, so a
peer can forward a message using only its own id, its children's ranges and
its parent: the local greedy routing every overlay tree relies on. Rotations
keep those annotations current in O(1), splays are confined to a subtree, and
the double splay serves one request by making its endpoints adjacent.
"""

import logging
import random
from dataclasses import dataclass
from typing import Iterable

import networkx as nx

from errors import MembershipError, TreeError

logger = logging.getLogger(__name__)

PeerId = int


class Node:
    __slots__ = ("key", "left", "right", "parent", "lo", "hi")

    def __init__(self, key: PeerId):
        self.key = key
        self.left: Node | None = None
        self.right: Node | None = None
        self.parent: Node | None = None
        self.lo = key
        self.hi = key

    def __repr__(self) -> str:
        return f"Node({self.key}, lo={self.lo}, hi={self.hi})"


def _pull(node: Node) -> None:
    node.lo = node.left.lo if node.left is not None else node.key
    node.hi = node.right.hi if node.right is not None else node.key


@dataclass
class RotationLedger:
    """Rotation counter for one request (rho_t)."""

    count: int = 0


class Bst:
    def __init__(self):
        self.root: Node | None = None
        self.nodes: dict[PeerId, Node] = {}

    # --- basic queries ---

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, key: PeerId) -> bool:
        return key in self.nodes

    def ids(self) -> list[PeerId]:
        return sorted(self.nodes)

    def node(self, key: PeerId) -> Node:
        try:
            return self.nodes[key]
        except KeyError:
            raise MembershipError(f"peer {key} is not in the tree") from None

    def preorder(self) -> list[PeerId]:
        out = []
        stack = [self.root] if self.root is not None else []
        while stack:
            node = stack.pop()
            out.append(node.key)
            if node.right is not None:
                stack.append(node.right)
            if node.left is not None:
                stack.append(node.left)
        return out

    def inorder(self) -> list[PeerId]:
        out = []
        stack: list[Node] = []
        node = self.root
        while stack or node is not None:
            while node is not None:
                stack.append(node)
                node = node.left
            node = stack.pop()
            out.append(node.key)
            node = node.right
        return out

    def edges(self) -> set[tuple[PeerId, PeerId]]:
        """Undirected tree edges as (smaller, larger) pairs."""
        return {
            (min(n.key, n.parent.key), max(n.key, n.parent.key))
            for n in self.nodes.values()
            if n.parent is not None
        }

    def depth(self, key: PeerId) -> int:
        self.node(key)
        d = 0
        node = self.root
        while node.key != key:
            node = node.left if key < node.key else node.right
            d += 1
        return d

    def depths(self) -> dict[PeerId, int]:
        out = {}
        stack = [(self.root, 0)] if self.root is not None else []
        while stack:
            node, d = stack.pop()
            out[node.key] = d
            for child in (node.left, node.right):
                if child is not None:
                    stack.append((child, d + 1))
        return out

    def height(self) -> int:
        return max(self.depths().values(), default=0)

    def copy(self) -> "Bst":
        return Bst.from_preorder(self.preorder())

    # --- routing ---

    def lca(self, u: PeerId, v: PeerId) -> PeerId:
        """First node on the root-down search lying between u and v."""
        self.node(u)
        self.node(v)
        lo, hi = min(u, v), max(u, v)
        node = self.root
        while not lo <= node.key <= hi:
            node = node.left if hi < node.key else node.right
        return node.key

    def _depth_below(self, top: Node, key: PeerId) -> int:
        d = 0
        node = top
        while node.key != key:
            node = node.left if key < node.key else node.right
            d += 1
        return d

    def distance(self, u: PeerId, v: PeerId) -> int:
        w = self.node(self.lca(u, v))
        return self._depth_below(w, u) + self._depth_below(w, v)

    def next_hop(self, current: PeerId, dest: PeerId) -> PeerId:
        if dest not in self.nodes:
            raise MembershipError(f"unroutable: destination {dest} is not in the tree")
        node = self.node(current)
        if current == dest:
            return current
        if node.lo <= dest < node.key:
            return node.left.key
        if node.key < dest <= node.hi:
            return node.right.key
        return node.parent.key

    def route(self, u: PeerId, v: PeerId) -> list[PeerId]:
        path = [u]
        current = u
        while current != v:
            current = self.next_hop(current, v)
            path.append(current)
            if len(path) > len(self.nodes):
                raise TreeError(f"routing loop from {u} to {v}")
        return path

    # --- adjustments ---

    def _rotate(self, x: Node) -> None:
        p = x.parent
        g = p.parent
        if p.left is x:
            b = x.right
            p.left = b
            x.right = p
        else:
            b = x.left
            p.right = b
            x.left = p
        if b is not None:
            b.parent = p
        p.parent = x
        x.parent = g
        if g is None:
            self.root = x
        elif g.left is p:
            g.left = x
        else:
            g.right = x
        _pull(p)
        _pull(x)

    def rotate_up(self, key: PeerId, ledger: RotationLedger | None = None) -> None:
        x = self.node(key)
        if x.parent is None:
            raise TreeError(f"cannot rotate the root {key}")
        self._rotate(x)
        if ledger is not None:
            ledger.count += 1

    def splay_within(self, key: PeerId, subtree_root: PeerId,
                     ledger: RotationLedger | None = None) -> int:
        """Splay ``key`` until it takes the place of ``subtree_root``.

        Classic bottom-up zig / zig-zig / zig-zag steps, never rotating above
        the subtree. Returns the number of rotations performed.
        """
        x = self.node(key)
        top = self.node(subtree_root)
        walk = x
        while walk is not None and walk is not top:
            walk = walk.parent
        if walk is None:
            raise TreeError(f"{key} is not in the subtree rooted at {subtree_root}")

        stop = top.parent
        rotations = 0
        while x.parent is not stop:
            p = x.parent
            g = p.parent
            if g is stop:
                self._rotate(x)
                rotations += 1
            elif (g.left is p) == (p.left is x):
                self._rotate(p)
                self._rotate(x)
                rotations += 2
            else:
                self._rotate(x)
                self._rotate(x)
                rotations += 2
        if ledger is not None:
            ledger.count += rotations
        return rotations

    def double_splay(self, u: PeerId, v: PeerId,
                     ledger: RotationLedger | None = None) -> int:
        """Serve request (u, v): afterwards u and v are adjacent."""
        if u == v:
            self.node(u)
            return 0
        w = self.lca(u, v)
        rotations = self.splay_within(u, w, ledger)
        top = self.nodes[u]
        child = top.left if v < u else top.right
        rotations += self.splay_within(v, child.key, ledger)
        return rotations

    # --- membership changes ---

    def insert_leaf(self, key: PeerId) -> None:
        if key in self.nodes:
            raise TreeError(f"peer {key} is already in the tree")
        new = Node(key)
        self.nodes[key] = new
        if self.root is None:
            self.root = new
            return
        node = self.root
        while True:
            node.lo = min(node.lo, key)
            node.hi = max(node.hi, key)
            if key < node.key:
                if node.left is None:
                    node.left = new
                    break
                node = node.left
            else:
                if node.right is None:
                    node.right = new
                    break
                node = node.right
        new.parent = node

    def remove(self, key: PeerId) -> None:
        """Swap with the in-order predecessor (or successor) until a leaf, then detach."""
        node = self.node(key)
        while node.left is not None or node.right is not None:
            if node.left is not None:
                other = node.left
                while other.right is not None:
                    other = other.right
            else:
                other = node.right
                while other.left is not None:
                    other = other.left
            node.key, other.key = other.key, node.key
            self.nodes[node.key] = node
            self.nodes[other.key] = other
            node = other

        parent = node.parent
        if parent is None:
            self.root = None
        elif parent.left is node:
            parent.left = None
        else:
            parent.right = None
        node.parent = None
        del self.nodes[key]
        while parent is not None:
            _pull(parent)
            parent = parent.parent

    # --- serialization ---

    def dumps(self) -> str:
        """One line per node, pre-order: ``id left|- right|-``."""
        lines = []
        for key in self.preorder():
            node = self.nodes[key]
            left = node.left.key if node.left is not None else "-"
            right = node.right.key if node.right is not None else "-"
            lines.append(f"{key} {left} {right}")
        return "\n".join(lines)

    @classmethod
    def from_preorder(cls, keys: Iterable[PeerId]) -> "Bst":
        t = cls()
        for key in keys:
            t.insert_leaf(key)
        return t

    @classmethod
    def parse(cls, text: str | list[str], validate: bool = True) -> "Bst":
        lines = text.splitlines() if isinstance(text, str) else list(text)
        lines = [ln.strip() for ln in lines if ln.strip()]
        t = cls()
        children: dict[PeerId, tuple[PeerId | None, PeerId | None]] = {}
        for lineno, line in enumerate(lines, start=1):
            parts = line.split()
            if len(parts) != 3:
                raise TreeError(f"line {lineno}: expected 'id left right', got {line!r}")
            try:
                key = int(parts[0])
                left = None if parts[1] == "-" else int(parts[1])
                right = None if parts[2] == "-" else int(parts[2])
            except ValueError:
                raise TreeError(f"line {lineno}: non-integer id in {line!r}") from None
            if key in t.nodes:
                raise TreeError(f"line {lineno}: duplicate node {key}")
            t.nodes[key] = Node(key)
            children[key] = (left, right)
        if not lines:
            return t

        for key, (left, right) in children.items():
            node = t.nodes[key]
            for side, child_key in (("left", left), ("right", right)):
                if child_key is None:
                    continue
                child = t.nodes.get(child_key)
                if child is None:
                    raise TreeError(f"node {key}: {side} child {child_key} has no line")
                if child.parent is not None:
                    raise TreeError(f"node {child_key} has two parents")
                child.parent = node
                setattr(node, side, child)
        t.root = t.nodes[int(lines[0].split()[0])]
        if t.root.parent is not None:
            raise TreeError(f"first line {t.root.key} is not the root")

        for key in reversed(t.preorder()):
            _pull(t.nodes[key])
        if validate:
            ok, problem = check_bst(t)
            if not ok:
                raise TreeError(problem)
        return t


def check_bst(t: Bst) -> tuple[bool, str]:
    """Validate order, annotations and pointers; returns (ok, first violation)."""
    if t.root is None:
        if t.nodes:
            return False, "tree has nodes but no root"
        return True, ""
    if t.root.parent is not None:
        return False, f"root {t.root.key} has a parent"

    visited: set[int] = set()
    order: list[Node] = []
    # (node, lower bound, its owner, upper bound, its owner)
    stack = [(t.root, None, None, None, None)]
    while stack:
        node, lo, lo_owner, hi, hi_owner = stack.pop()
        if id(node) in visited:
            return False, f"cycle through {node.key}"
        visited.add(id(node))
        order.append(node)
        if t.nodes.get(node.key) is not node:
            return False, f"node table mismatch at {node.key}"
        if lo is not None and node.key <= lo:
            return False, f"search-order violated at {lo_owner}"
        if hi is not None and node.key >= hi:
            return False, f"search-order violated at {hi_owner}"
        for child in (node.left, node.right):
            if child is not None and child.parent is not node:
                return False, f"parent pointer of {child.key} does not point to {node.key}"
        if node.right is not None:
            stack.append((node.right, node.key, node.key, hi, hi_owner))
        if node.left is not None:
            stack.append((node.left, lo, lo_owner, node.key, node.key))

    if len(order) != len(t.nodes):
        return False, f"{len(t.nodes) - len(order)} nodes unreachable from the root"

    true_lo: dict[int, PeerId] = {}
    true_hi: dict[int, PeerId] = {}
    for node in reversed(order):
        true_lo[node.key] = true_lo[node.left.key] if node.left is not None else node.key
        true_hi[node.key] = true_hi[node.right.key] if node.right is not None else node.key
        if node.lo != true_lo[node.key] or node.hi != true_hi[node.key]:
            return False, f"stale subtree range at {node.key}"
    return True, ""


def random_bst(n: int, seed: int) -> Bst:
    """Leaf-insert ids 1..n in a seed-determined uniformly random order."""
    if n < 1:
        raise TreeError(f"random tree needs at least one node, got n={n}")
    order = list(range(1, n + 1))
    random.Random(seed).shuffle(order)
    return Bst.from_preorder(order)


def _orient(graph: nx.Graph, root: PeerId) -> tuple[int, list[PeerId]] | None:
    """Height and BFS order of ``graph`` rooted at ``root``, or None if not a BST."""
    order = []
    height = 0
    frontier = [(root, None, None, None, 0)]
    while frontier:
        nxt = []
        for node, parent, lo, hi, d in frontier:
            if (lo is not None and node <= lo) or (hi is not None and node >= hi):
                return None
            order.append(node)
            height = max(height, d)
            kids = [c for c in graph.neighbors(node) if c != parent]
            smaller = [c for c in kids if c < node]
            larger = [c for c in kids if c > node]
            if len(smaller) > 1 or len(larger) > 1:
                return None
            for c in smaller:
                nxt.append((c, node, lo, node, d + 1))
            for c in larger:
                nxt.append((c, node, node, hi, d + 1))
        frontier = nxt
    return height, order


def from_edges(n: int, edges: Iterable[Iterable[PeerId]]) -> Bst:
    """Orient an undirected tree on ids 1..n as a BST.

    When several roots give a valid orientation, the shallowest one wins and
    ties go to the lowest id.
    """
    if n < 1:
        raise TreeError("from_edges needs n >= 1")
    graph = nx.Graph()
    graph.add_nodes_from(range(1, n + 1))
    for edge in edges:
        a, b = tuple(edge)
        if not (1 <= a <= n and 1 <= b <= n) or a == b:
            raise TreeError(f"edge {{{a},{b}}} is outside [1, {n}] or a self-loop")
        graph.add_edge(a, b)
    if not nx.is_tree(graph):
        kind = "disconnected" if not nx.is_connected(graph) else "cyclic"
        raise TreeError(f"edge set is {kind}: not a tree on {n} nodes")

    best: tuple[int, list[PeerId]] | None = None
    for root in sorted(graph.nodes):
        oriented = _orient(graph, root)
        if oriented is not None and (best is None or oriented[0] < best[0]):
            best = oriented
    if best is None:
        raise TreeError("edge set admits no binary-search-tree orientation")
    logger.debug("oriented %d-node tree at root %d (height %d)", n, best[1][0], best[0])
    return Bst.from_preorder(best[1])
