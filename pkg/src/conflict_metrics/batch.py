"""Run catalog scenarios over several seeds and evaluate every interaction."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence

from .attribution import (
    InteractionReport,
    ShareDistribution,
    aggregate_distributions,
    evaluate_all,
    reports_involving_role,
)
from .errors import ConfigError, EmptyDistributionError
from .kinematics import MetricsConfig
from .scenarios import build_crowd, reseed
from .sim import ScenarioConfig, SimulationResult, run_scenario

THREADS_ENV = "CONFLICT_METRICS_THREADS"


@dataclass
class SeedRun:
    seed: int
    result: SimulationResult
    reports: List[InteractionReport]


def worker_count(requested: Optional[int] = None) -> int:
    """Parallel workers: ``requested``, else ``$CONFLICT_METRICS_THREADS``, else the CPU count."""
    if requested is None:
        raw = os.environ.get(THREADS_ENV)
        if raw:
            try:
                requested = int(raw)
            except ValueError:
                raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}", [THREADS_ENV])
        else:
            requested = os.cpu_count() or 1
    if requested < 1:
        raise ConfigError(f"worker count must be positive, got {requested}", [THREADS_ENV])
    return requested


def run_and_evaluate(cfg: ScenarioConfig) -> SeedRun:
    result = run_scenario(cfg)
    return SeedRun(cfg.seed, result, evaluate_all(result.trajectories, cfg.metrics))


def run_seeds(base: ScenarioConfig, seeds: Sequence[int], workers: Optional[int] = None) -> List[SeedRun]:
    """Run ``base`` once per seed; results come back in seed order."""
    configs = [reseed(base, s) for s in seeds]
    n = min(worker_count(workers), len(configs))
    if n <= 1:
        return [run_and_evaluate(c) for c in configs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(run_and_evaluate, configs))


def is_crowd(cfg: ScenarioConfig) -> bool:
    return cfg.name.startswith("crowd/")


def relevant_reports(cfg: ScenarioConfig, runs: Sequence[SeedRun]) -> List[InteractionReport]:
    """Reports that enter the aggregate: in a crowd only the robot's interactions."""
    reports = [rep for run in runs for rep in run.reports]
    if is_crowd(cfg):
        reports = reports_involving_role(reports, cfg.role_map, "robot")
    return reports


def distributions(cfg: ScenarioConfig, runs: Sequence[SeedRun],
                  weighted: bool = False) -> Optional[Dict[str, Dict[str, ShareDistribution]]]:
    """Per-source R and E distributions, or ``None`` when nothing was resolved."""
    try:
        return aggregate_distributions(relevant_reports(cfg, runs), cfg.role_map, weighted)
    except EmptyDistributionError:
        return None


def crowd_study(robot_type: str, seeds: Sequence[int], metrics: MetricsConfig = MetricsConfig(),
                workers: Optional[int] = None, weighted: bool = False):
    """Distributions of the robot's interactions in the crowd over ``seeds``."""
    base = replace(build_crowd(robot_type), metrics=metrics)
    runs = run_seeds(base, seeds, workers)
    return distributions(base, runs, weighted), runs
