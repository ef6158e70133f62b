import json
import os

import pytest

import config
from errors import ConfigError


def write_json(path, data) -> str:
    path.write_text(json.dumps(data))
    return str(path)


def test_defaults_load_without_any_file():
    cfg = config.load()
    assert cfg.scenario == "fig3"
    assert (cfg.n, cfg.k) == (128, 2)
    assert cfg.guest == "rnd" and cfg.sequence == "match"
    assert cfg.workers == 1


def test_request_count_defaults_to_n_squared_and_is_capped():
    cfg = config.load(overrides={"n": 64})
    assert cfg.requests_for(64) == 4096
    assert cfg.cadence_for(64) == 64
    capped = config.load(overrides={"n": 64, "max_requests": 1000})
    assert capped.requests_for(64) == 1000
    explicit = config.load(overrides={"m": 10})
    assert explicit.requests_for(512) == 10


def test_merge_order_user_file_then_path_then_overrides(tmp_path):
    os.makedirs(os.path.dirname(config.CONFIG_FILE))
    write_json(tmp_path / "home" / "config.json", {"n": 32, "k": 4, "seed": 9})
    path = write_json(tmp_path / "exp.json", {"k": 3, "scenario": "fig5"})
    cfg = config.load(path, overrides={"seed": 1, "n": None})
    assert (cfg.n, cfg.k, cfg.scenario, cfg.seed) == (32, 3, "fig5", 1)


def test_missing_path_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError, match="does not exist"):
        config.load(str(tmp_path / "nope.json"))


def test_malformed_json_names_the_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "n": 12,\n  "k" 3\n}')
    with pytest.raises(ConfigError, match="line 3"):
        config.load(str(path))


def test_non_object_json_is_rejected(tmp_path):
    with pytest.raises(ConfigError, match="JSON object"):
        config.load(write_json(tmp_path / "list.json", [1, 2]))


@pytest.mark.parametrize("overrides,field", [
    ({"n": 1}, "n:"),
    ({"k": 0}, "k:"),
    ({"p_repeat": 1.5}, "p_repeat:"),
    ({"guest": "torus"}, "guest:"),
    ({"fractions": [0.2, 1.0]}, "fractions:"),
    ({"sequences": ["match", "zipf"]}, "sequences:"),
])
def test_validation_errors_name_the_field(overrides, field):
    with pytest.raises(ConfigError, match=field):
        config.load(overrides=overrides)


def test_edgelist_guest_needs_a_path():
    with pytest.raises(ConfigError, match="edge_list"):
        config.load(overrides={"guest": "edgelist"})
    cfg = config.load(overrides={"guest": "edgelist", "edge_list": "graph.txt"})
    assert cfg.edge_list == "graph.txt"


def test_bad2_guest_needs_multiples_of_four():
    with pytest.raises(ConfigError, match="divisible by 4"):
        config.load(overrides={"guest": "bad2", "n": 30})
    with pytest.raises(ConfigError, match="divisible by 4"):
        config.load(overrides={"guest": "bad2", "n": 32, "n_values": [64, 100, 130]})
    assert config.load(overrides={"guest": "bad2", "n": 32}).n == 32


def test_replica_seeds():
    cfg = config.load(overrides={"seed": 3, "replicas": 4})
    seeds = cfg.replica_seed_list()
    assert len(set(seeds)) == 4
    assert seeds == config.load(overrides={"seed": 3, "replicas": 4}).replica_seed_list()
    assert config.load(overrides={"seeds": [5, 7]}).replica_seed_list() == [5, 7]
