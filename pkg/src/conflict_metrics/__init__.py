"""Responsibility and Engagement conflict-attribution metrics for moving agents."""

from .attribution import (
    ContributionSample,
    InteractionReport,
    InteractionSegment,
    ShareDistribution,
    aggregate_distributions,
    evaluate_all,
    evaluate_interaction,
    evaluate_pair,
    segment_interactions,
)
from .kinematics import AgentState, MetricsConfig, RelKin, Trajectory, conflict_series
from .sim import ScenarioConfig, SimulationResult, run_scenario

__version__ = "0.1.0"
