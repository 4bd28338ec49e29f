"""
Experiment orchestration: seeded trials across a worker pool, per-point
summaries, and CSV/JSON emission.

Trials are independent and each one derives its generator from
(seed, trial index), so results do not depend on the worker count. Workers
fill a pre-indexed buffer and serialization happens once, in trial order.
"""

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from netcoding import fixtures
from netcoding.config import SCHEMA_VERSION, ExperimentConfig
from netcoding.errors import ConfigError, Diagnostic, InvariantViolation
from netcoding.fountain import FountainSpec, build_fountain, fountain_trial
from netcoding.radio_sim import RadioNetworkSpec, build_network, fit_throughput_scaling, radio_trial, summarize_radio
from netcoding.rng import derive_seed, make_rng
from netcoding.storage_code import (
    DisseminationGraph,
    StorageCodeSpec,
    disseminate,
    random_payloads,
    storage_trial,
)

logger = logging.getLogger(__name__)

COLUMNS = {
    "storage": ["trial", "seed", "point", "success", "rank", "rank_deficit", "flow_decodable", "wall_time_micros"],
    "fountain": ["trial", "seed", "point", "recovered", "fraction", "met_target", "prerouting_degree",
                 "wall_time_micros"],
    "radio": ["trial", "seed", "point", "N", "H", "M", "coding", "forwarding", "min_cut", "coding_over_N",
              "wall_time_micros"],
}


@dataclass(frozen=True)
class TrialTask:
    kind: str
    point: int
    trial: int
    spec: Union[StorageCodeSpec, FountainSpec, RadioNetworkSpec]
    query_size: Optional[int] = None
    timing: bool = True


def execute_trial(task: TrialTask) -> Dict[str, Any]:
    """Run one trial and return its row; raises InvariantViolation on a broken guarantee"""
    started = time.perf_counter_ns()
    row: Dict[str, Any] = {
        "trial": task.trial,
        "seed": derive_seed(task.spec.seed, task.trial),
        "point": task.point,
    }

    if task.kind == "storage":
        outcome = storage_trial(task.spec, task.trial, task.query_size)
        if outcome.success and not outcome.payload_exact:
            raise InvariantViolation(f"trial {task.trial}: decoded payloads differ from the data")
        if outcome.success and not outcome.flow_decodable:
            raise InvariantViolation(f"trial {task.trial}: decoded without a saturating flow")
        row.update(
            success=int(outcome.success),
            rank=outcome.rank,
            rank_deficit=outcome.rank_deficit,
            flow_decodable=int(outcome.flow_decodable),
        )
    elif task.kind == "fountain":
        outcome = fountain_trial(task.spec, task.trial)
        if not outcome.payload_exact:
            raise InvariantViolation(f"trial {task.trial}: a peeled payload differs from the data")
        row.update(
            recovered=outcome.recovered,
            fraction=outcome.fraction,
            met_target=int(outcome.met_target),
            prerouting_degree=outcome.prerouting_degree,
        )
    else:
        outcome = radio_trial(task.spec, task.trial)
        row.update(
            N=task.spec.N,
            H=task.spec.H,
            M=task.spec.M,
            coding=outcome.coding,
            forwarding=outcome.forwarding,
            min_cut=outcome.min_cut,
            coding_over_N=outcome.coding / task.spec.N,
        )

    row["wall_time_micros"] = (time.perf_counter_ns() - started) // 1000 if task.timing else 0
    return row


def _plain(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


class ExperimentRunner:
    def __init__(self, config: ExperimentConfig, workers: int = 1, timing: bool = True):
        self.config = config
        self.workers = max(1, int(workers))
        self.timing = timing

    def tasks(self) -> List[TrialTask]:
        tasks = []
        for point, parameters in enumerate(self.config.points):
            spec = parameters.to_spec(self.config.seed)
            query_size = getattr(parameters, "effective_query_size", None)
            for trial in range(self.config.trials):
                tasks.append(TrialTask(self.config.kind, point, trial, spec, query_size, self.timing))
        return tasks

    def run_trials(self) -> pd.DataFrame:
        tasks = self.tasks()
        results: List[Optional[Dict[str, Any]]] = [None] * len(tasks)
        if self.workers == 1:
            for index, task in enumerate(tasks):
                results[index] = execute_trial(task)
        else:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                slots = {pool.submit(execute_trial, task): index for index, task in enumerate(tasks)}
                for future in as_completed(slots):
                    results[slots[future]] = future.result()
        return pd.DataFrame(results, columns=COLUMNS[self.config.kind])

    def summarize(self, rows: pd.DataFrame) -> Dict[str, Any]:
        """Per-point statistics, computed only from the emitted rows"""
        points = []
        for point, parameters in enumerate(self.config.points):
            group = rows[rows["point"] == point]
            entry = {"point": point, "parameters": parameters.model_dump(), "trials": int(len(group))}
            entry.update(getattr(self, f"_summarize_{self.config.kind}")(group, parameters))
            points.append(entry)

        summary = {
            "schema_version": SCHEMA_VERSION,
            "kind": self.config.kind,
            "seed": self.config.seed,
            "trials": self.config.trials,
            "points": points,
        }
        if self.config.kind == "radio" and len({p["N"] for p in points}) >= 2:
            table = pd.DataFrame(points)
            summary["scaling_fit"] = {
                "coding": fit_throughput_scaling(table, "mean_coding"),
                "forwarding": fit_throughput_scaling(table, "mean_forwarding"),
            }
        return summary

    @staticmethod
    def _summarize_storage(group: pd.DataFrame, parameters) -> Dict[str, Any]:
        trials = len(group)
        successes = int(group["success"].sum())
        return {
            "successes": successes,
            "rate": successes / trials,
            "mean_rank_deficit": int(group["rank_deficit"].sum()) / trials,
            "flow_decodable_rate": int(group["flow_decodable"].sum()) / trials,
            "prerouting_degree": parameters.to_spec(0).prerouting_degree(),
        }

    @staticmethod
    def _summarize_fountain(group: pd.DataFrame, parameters) -> Dict[str, Any]:
        trials = len(group)
        return {
            "mean_fraction": float(group["fraction"].sum()) / trials,
            "rate_meeting_target": int(group["met_target"].sum()) / trials,
            "mean_prerouting_degree": float(group["prerouting_degree"].sum()) / trials,
            "expected_prerouting_degree": parameters.to_spec(0).expected_prerouting_degree(),
        }

    @staticmethod
    def _summarize_radio(group: pd.DataFrame, parameters) -> Dict[str, Any]:
        spec = parameters.to_spec(0)
        stats = {"N": spec.N, "H": spec.H, "M": spec.M}
        stats.update(summarize_radio(spec.N, group["coding"].tolist(), group["forwarding"].tolist()))
        stats["mean_min_cut"] = float(group["min_cut"].sum()) / len(group)
        return stats

    def output_path(self) -> Path:
        if not self.config.output_path:
            raise ConfigError([Diagnostic("output_path", "is required (set it in the config or pass --out)")])
        return Path(self.config.output_path)

    def write(self, rows: pd.DataFrame, summary: Dict[str, Any]) -> List[Path]:
        path = self.output_path()
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        if self.config.format == "csv":
            rows.to_csv(path, index=False, lineterminator="\n")
            sidecar = summary_path(path)
            _write_json(summary, sidecar)
            return [path, sidecar]

        config = self.config.to_document()
        config.pop("output_path")
        document = {
            "schema_version": SCHEMA_VERSION,
            "config": config,
            "rows": [
                {column: _plain(value) for column, value in zip(rows.columns, record)}
                for record in rows.itertuples(index=False, name=None)
            ],
            "summary": summary,
        }
        _write_json(document, path)
        return [path]

    def run(self) -> Dict[str, Any]:
        logger.info(
            "running %s experiment: %d point(s) x %d trial(s), %d worker(s)",
            self.config.kind, len(self.config.points), self.config.trials, self.workers,
        )
        self.output_path()
        rows = self.run_trials()
        summary = self.summarize(rows)
        for entry in summary["points"]:
            logger.info("point %d: %s", entry["point"], _headline(self.config.kind, entry))
        written = self.write(rows, summary)
        logger.info("wrote %s", ", ".join(str(p) for p in written))
        return summary


def _headline(kind: str, entry: Dict[str, Any]) -> str:
    if kind == "storage":
        return f"success rate {entry['rate']:.4f} ({entry['successes']}/{entry['trials']})"
    if kind == "fountain":
        return f"target met {entry['rate_meeting_target']:.4f}, mean fraction {entry['mean_fraction']:.4f}"
    return (f"N={entry['N']} coding {entry['mean_coding']:.2f}, forwarding {entry['mean_forwarding']:.2f}, "
            f"coding/N {entry['coding_over_N']:.4f} ± {entry['coding_over_N_stderr']:.4f}")


def summary_path(path: Path) -> Path:
    return path.with_name(path.stem + ".summary.json")


def _write_json(document: Dict[str, Any], path: Path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, sort_keys=True, ensure_ascii=False, default=_plain)
        f.write("\n")


def run(config: ExperimentConfig, workers: int = 1, timing: bool = True) -> Dict[str, Any]:
    return ExperimentRunner(config, workers=workers, timing=timing).run()


def dump_trial(config: ExperimentConfig, trial_index: int, directory: Union[str, os.PathLike]) -> Path:
    """Write the network or dissemination graph of one trial (first point) as a JSON fixture"""
    spec = config.points[0].to_spec(config.seed)
    rng = make_rng(derive_seed(config.seed, trial_index))
    if config.kind == "radio":
        document = fixtures.dump_network(build_network(spec, rng))
    elif config.kind == "storage":
        data = random_payloads(rng, spec.k, spec.payload_len)
        _, graph = disseminate(spec, data, rng)
        document = fixtures.dump_graph(graph)
    else:
        data = random_payloads(rng, spec.k, spec.payload_len)
        storage = build_fountain(spec, data, rng)
        edges = [(i, p.node) for p in storage for i in p.neighbors]
        document = fixtures.dump_graph(DisseminationGraph(k=spec.k, n=spec.n, edges=sorted(edges)))
    path = Path(directory) / f"{config.kind}.trial{trial_index}.json"
    fixtures.write_dump(document, path)
    return path
