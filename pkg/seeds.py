"""Deterministic seed fan-out.

A master seed is expanded into child seeds by hashing the master together with
a tuple of integer counters, e.g. ``derive_seed(master, replica)`` for an
experiment replica or ``derive_seed(seed, tree_index)`` for the i-th random
tree of an overlay. The scheme is stable across platforms and Python versions
because it relies only on BLAKE2b over the decimal text "master:c1:c2:...".
"""

import hashlib


def derive_seed(master: int, *counters: int) -> int:
    text = ":".join(str(int(c)) for c in (master, *counters))
    digest = hashlib.blake2b(text.encode("ascii"), digest_size=8).digest()
    # 63 bits keeps the value a valid seed for numpy as well as random
    return int.from_bytes(digest, "big") >> 1


def replica_seeds(master: int, count: int) -> list[int]:
    return [derive_seed(master, i) for i in range(count)]
