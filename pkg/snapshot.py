"""Overlay snapshots: plain-text dumps of every tree, plus the invariant suite run on load."""

import logging
import os
import random

from bst_core import Bst, check_bst
from errors import InvariantViolation, TreeError
from overlay import Overlay

logger = logging.getLogger(__name__)

SNAPSHOT_DIR = os.path.join(os.path.expanduser("~"), ".obstsim", "snapshots")
DEFAULT_SNAPSHOT = os.path.join(SNAPSHOT_DIR, "default.obst")

ROUTE_SAMPLES = 200


def _path(path: str | None) -> str:
    if path is not None:
        return path
    os.makedirs(SNAPSHOT_DIR, exist_ok=True)
    return DEFAULT_SNAPSHOT


def dumps(o: Overlay) -> str:
    """``obst <n> <k>`` header, then ``tree <i>`` followed by that tree's pre-order lines."""
    parts = [f"obst {o.n} {o.k}"]
    for i, t in enumerate(o.trees, start=1):
        parts.append(f"tree {i}")
        if len(t):
            parts.append(t.dumps())
    return "\n".join(parts) + "\n"


def loads(text: str) -> Overlay:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InvariantViolation("empty snapshot")
    header = lines[0].split()
    if len(header) != 3 or header[0] != "obst":
        raise InvariantViolation(f"line 1: expected 'obst <n> <k>', got {lines[0]!r}")
    try:
        n, k = int(header[1]), int(header[2])
    except ValueError:
        raise InvariantViolation(f"line 1: non-integer size in {lines[0]!r}") from None

    blocks: list[list[str]] = []
    for line in lines[1:]:
        if line.startswith("tree"):
            blocks.append([])
        elif not blocks:
            raise InvariantViolation(f"node line {line!r} before the first 'tree' marker")
        else:
            blocks[-1].append(line)
    if len(blocks) != k:
        raise InvariantViolation(f"header announces {k} trees, found {len(blocks)}")

    trees = []
    for i, block in enumerate(blocks, start=1):
        try:
            t = Bst.parse(block, validate=False)
        except TreeError as exc:
            raise InvariantViolation(f"tree {i}: {exc}") from None
        ok, problem = check_bst(t)
        if not ok:
            raise InvariantViolation(f"tree {i}: {problem}")
        if len(t) != n:
            raise InvariantViolation(f"tree {i}: {len(t)} nodes, header says {n}")
        trees.append(t)
    try:
        return Overlay.from_trees(trees)
    except TreeError as exc:
        raise InvariantViolation(str(exc)) from None


def validate(o: Overlay, samples: int = ROUTE_SAMPLES, seed: int = 0) -> None:
    """Raise InvariantViolation unless every tree is a sound BST over the same
    peers and greedy routes match tree distances on sampled pairs."""
    ok, problem = o.check()
    if not ok:
        raise InvariantViolation(problem)
    peers = o.peers()
    if len(peers) < 2:
        return
    rng = random.Random(seed)
    for i, t in enumerate(o.trees, start=1):
        for _ in range(samples):
            u, v = rng.sample(peers, 2)
            try:
                hops = len(t.route(u, v)) - 1
            except TreeError as exc:
                raise InvariantViolation(f"tree {i}: routing {u}->{v} failed: {exc}") from None
            if hops != t.distance(u, v):
                raise InvariantViolation(
                    f"tree {i}: greedy route {u}->{v} takes {hops} hops, tree distance is {t.distance(u, v)}"
                )
    logger.debug("overlay with n=%d k=%d passed validation", o.n, o.k)


def save(o: Overlay, path: str | None = None) -> str:
    target = _path(path)
    with open(target, "w") as f:
        f.write(dumps(o))
    return target


def load(path: str | None = None) -> Overlay:
    target = _path(path)
    if not os.path.exists(target):
        raise InvariantViolation(f"snapshot {target} does not exist")
    with open(target) as f:
        return loads(f.read())
