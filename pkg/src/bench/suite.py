"""Suites of experiments: grid expansion, serial or process-parallel execution in submission order."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Sequence

from tqdm import tqdm

from src.bench.experiment import ExperimentConfig, ResultRow, run_experiment
from src.config import load_suite

logger = logging.getLogger(__name__)


def suite_configs(suite_path: str | Path, base: dict[str, Any]) -> tuple[dict[str, Any], list[ExperimentConfig]]:
    """Suite metadata and the validated experiments of every grid variant."""
    meta, mappings = load_suite(suite_path, base)
    return meta, [ExperimentConfig.from_mapping(m) for m in mappings]


def _run_one(cfg: ExperimentConfig) -> list[ResultRow]:
    return run_experiment(cfg)


def run_suite(configs: Sequence[ExperimentConfig], jobs: int = 1, progress: bool = True) -> list[ResultRow]:
    """Rows of every experiment, ordered by config then level regardless of completion order."""
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    logger.info("Suite: %d experiments, jobs=%d", len(configs), jobs)
    rows: list[ResultRow] = []
    if jobs == 1:
        for cfg in tqdm(configs, desc="suite", disable=not progress):
            rows.extend(_run_one(cfg))
        return rows
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_one, cfg) for cfg in configs]
        for fut in tqdm(futures, desc="suite", disable=not progress):
            rows.extend(fut.result())
    return rows
