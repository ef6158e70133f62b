"""Experiment runner: replicas of one scenario preset, written as CSV plus JSON metadata."""

import json
import logging
import os
import platform
import time
import uuid
from concurrent.futures import ProcessPoolExecutor

import networkx
import numpy
import pydantic

import metrics
import scenarios
from config import ExperimentConfig
from errors import ConfigError

logger = logging.getLogger(__name__)

DATA_FILE = "data.csv"
META_FILE = "meta.json"


def _run_replica(payload: tuple[dict, int]) -> list[dict]:
    """Worker entry point; rebuilds the config so nothing is shared between replicas."""
    data, seed = payload
    cfg = ExperimentConfig(**data)
    scenario = scenarios.get_scenario(cfg.scenario)
    rows = scenario["run"](cfg, seed)
    return [{"seed": seed, **row} for row in rows]


def library_versions() -> dict:
    return {
        "python": platform.python_version(),
        "networkx": networkx.__version__,
        "numpy": numpy.__version__,
        "pydantic": pydantic.VERSION,
    }


class ExperimentRun:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.scenario = scenarios.get_scenario(cfg.scenario)
        if self.scenario is None:
            raise ConfigError(f"scenario: unknown preset {cfg.scenario!r}\n"
                              + scenarios.catalog_summary())
        self.run_id = uuid.uuid4().hex[:12]
        self.workspace = cfg.output
        self.data_file = os.path.join(self.workspace, DATA_FILE)
        self.meta_file = os.path.join(self.workspace, META_FILE)
        self.seeds = cfg.replica_seed_list()
        self.rows: list[dict] = []
        self.wall_time = 0.0

    def header(self) -> list[str]:
        return ["seed", *self.scenario["columns"]]

    def config_echo(self) -> str:
        return json.dumps(self.cfg.model_dump(), sort_keys=True)

    def execute(self) -> list[dict]:
        """Run every replica and return rows in seed-list order."""
        data = self.cfg.model_dump()
        payloads = [(data, seed) for seed in self.seeds]
        if self.cfg.workers > 1 and len(payloads) > 1:
            with ProcessPoolExecutor(max_workers=min(self.cfg.workers, len(payloads))) as pool:
                batches = list(pool.map(_run_replica, payloads))
        else:
            batches = [_run_replica(p) for p in payloads]
        return [row for batch in batches for row in batch]

    def run(self) -> str:
        logger.info("running %s with %d replica(s) into %s",
                    self.cfg.scenario, len(self.seeds), self.workspace)
        started = time.perf_counter()
        self.rows = self.execute()
        self.wall_time = time.perf_counter() - started

        os.makedirs(self.workspace, exist_ok=True)
        metrics.write_csv(self.data_file, self.rows, self.header(), comment=self.config_echo())
        meta = {
            "run_id": self.run_id,
            "scenario": self.cfg.scenario,
            "config": self.cfg.model_dump(),
            "seeds": self.seeds,
            "rows": len(self.rows),
            "wall_time_s": round(self.wall_time, 3),
            "versions": library_versions(),
            "data": DATA_FILE,
        }
        with open(self.meta_file, "w") as f:
            json.dump(meta, f, indent=2, sort_keys=True)
            f.write("\n")

        summary = f"{self.cfg.scenario}: {len(self.rows)} rows in {self.wall_time:.1f}s -> {self.data_file}"
        logger.info(summary)
        return summary
