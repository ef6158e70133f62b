import random

import pytest

import config
import snapshot
from bst_core import random_bst
from overlay import Overlay


@pytest.fixture(autouse=True)
def isolated_home(tmp_path, monkeypatch):
    """Keep tests away from the real ~/.obstsim directory."""
    monkeypatch.setattr(config, "CONFIG_FILE", str(tmp_path / "home" / "config.json"))
    monkeypatch.setattr(snapshot, "SNAPSHOT_DIR", str(tmp_path / "home" / "snapshots"))
    monkeypatch.setattr(snapshot, "DEFAULT_SNAPSHOT", str(tmp_path / "home" / "snapshots" / "default.obst"))


@pytest.fixture
def tree16():
    return random_bst(16, seed=7)


@pytest.fixture
def overlay_3x32():
    return Overlay.new_random(32, 3, seed=11)


def random_pairs(n: int, m: int, seed: int) -> list[tuple[int, int]]:
    rng = random.Random(seed)
    out = []
    while len(out) < m:
        u, v = rng.randint(1, n), rng.randint(1, n)
        if u != v:
            out.append((u, v))
    return out
