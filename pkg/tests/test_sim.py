import math
from collections import Counter
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conflict_metrics.errors import ConfigError
from conflict_metrics.kinematics import AgentState
from conflict_metrics.scenarios import CROWD_ARENA, build, build_crowd, build_personal_space, crowd_humans
from conflict_metrics.sim import (
    AgentSpec,
    GoalSpec,
    PolicySpec,
    ScenarioConfig,
    agent_rng,
    run_scenario,
    sample_edge_point,
    step_world,
)


def on_edge(p, arena, tol=1e-9):
    x0, y0, x1, y1 = arena
    inside = x0 - tol <= p[0] <= x1 + tol and y0 - tol <= p[1] <= y1 + tol
    return inside and min(abs(p[0] - x0), abs(p[0] - x1), abs(p[1] - y0), abs(p[1] - y1)) < tol


def results_equal(r1, r2):
    if r1.events != r2.events or list(r1.trajectories) != list(r2.trajectories):
        return False
    return all(
        np.array_equal(r1.trajectories[k].positions, r2.trajectories[k].positions)
        and np.array_equal(r1.trajectories[k].velocities, r2.trajectories[k].velocities)
        for k in r1.trajectories
    )


# -- stepping ------------------------------------------------------------------------------


def test_single_ballistic_step():
    (nxt,) = step_world([AgentState(0.0, (0, 0), (1, 0))], [PolicySpec()], [(5, 0)], 0.1)
    assert nxt.position == pytest.approx((0.1, 0.0)) and nxt.t == pytest.approx(0.1)


def test_ballistic_agents_move_in_straight_lines():
    states = [AgentState(0.0, (0, 0), (1, 0)), AgentState(0.0, (3, 0.1), (-1, 0.2))]
    start = [np.array(s.position) for s in states]
    for k in range(1, 40):
        states = step_world(states, [PolicySpec(), PolicySpec()], [(0, 0), (0, 0)], 0.1)
        for s0, s in zip(start, states):
            assert np.allclose(s.position, s0 + np.array(s.velocity) * 0.1 * k)


def test_step_world_is_synchronous():
    # each Social Force agent reacts to the other's pre-step state, so the pair stays mirrored
    states = [AgentState(0.0, (-2, 0.05), (1, 0)), AgentState(0.0, (2, -0.05), (-1, 0))]
    sf = PolicySpec("social_force")
    for _ in range(20):
        states = step_world(states, [sf, sf], [(50, 0.05), (-50, -0.05)], 0.1)
        assert np.allclose(np.add(states[0].position, states[1].position), 0.0, atol=1e-12)


def test_run_records_position_then_command():
    res = run_scenario(build("dyadic/crossing/4"))
    for traj in res.trajectories.values():
        step = np.diff(traj.positions, axis=0)
        assert np.allclose(step, traj.velocities[:-1] * traj.dt, atol=1e-12)
        assert len(traj) == 301


# -- determinism and seeds ---------------------------------------------------------------------


@pytest.mark.parametrize("name", ["crowd/sf", "crowd/dwa", "catch", "group/middle"])
def test_seed_determinism(name):
    cfg = replace(build(name), duration=15.0)
    assert results_equal(run_scenario(cfg), run_scenario(cfg))


def test_different_seeds_differ():
    a = run_scenario(replace(build_crowd("sf", 1), duration=5.0))
    b = run_scenario(replace(build_crowd("sf", 2), duration=5.0))
    assert not np.array_equal(a.trajectories["h00"].positions, b.trajectories["h00"].positions)


@pytest.mark.parametrize("seed", [0, 7, 123])
def test_humans_identical_across_robot_types(seed):
    configs = [build_crowd(kind, seed) for kind in ("ballistic", "dwa", "social_force")]
    first = configs[0]
    for cfg in configs[1:]:
        for a, b in zip(first.agents[1:], cfg.agents[1:]):
            assert a == b


def test_agent_streams_are_independent():
    a = agent_rng(5, 3).uniform(size=4)
    assert np.array_equal(a, agent_rng(5, 3).uniform(size=4))
    assert not np.array_equal(a, agent_rng(5, 4).uniform(size=4))
    assert not np.array_equal(a, agent_rng(6, 3).uniform(size=4))


# -- arena, goals and collisions ----------------------------------------------------------------


@given(st.integers(0, 2**32))
def test_edge_samples_lie_on_the_boundary(seed):
    rng = np.random.default_rng(seed)
    for _ in range(20):
        assert on_edge(sample_edge_point(rng, CROWD_ARENA), CROWD_ARENA)


@settings(max_examples=10)
@given(st.integers(0, 10_000))
def test_initial_crowd_goals_on_edge(seed):
    positions, goals = crowd_humans(seed)
    assert len(positions) == 20
    assert all(on_edge(g, CROWD_ARENA) for g in goals)


def test_goal_resampling_matches_arrivals():
    cfg = build_crowd("sf", 3)
    res = run_scenario(cfg)
    reached = Counter(e["agents"][0] for e in res.events if e["kind"] == "goal_reached")
    resampled = Counter(e["agents"][0] for e in res.events if e["kind"] == "goal_resampled")
    humans = {a.id for a in cfg.agents if a.goal.type == "edge"}
    assert sum(resampled.values()) > 0
    assert {k: v for k, v in reached.items() if k in humans} == dict(resampled)
    assert "robot" not in resampled and reached["robot"] >= 1


def test_collision_events_match_distances():
    cfg = build_crowd("ballistic", 4)
    res = run_scenario(cfg)
    logged = {frozenset(e["agents"]) for e in res.events if e["kind"] == "collision"}
    ids = cfg.agent_ids
    touching = set()
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            ta, tb = res.trajectories[a], res.trajectories[b]
            d = np.hypot(*(ta.positions - tb.positions).T)
            if (d < ta.radius + tb.radius).any():
                touching.add(frozenset((a, b)))
    assert logged == touching and logged


def test_head_on_ballistic_collision_is_logged_once():
    res = run_scenario(build("dyadic/oncoming/1"))
    assert [e["kind"] for e in res.events] == ["collision"]


def test_relaunch_on_leaving_the_arena():
    robot = AgentSpec("robot", AgentState(0, (0, 5), (1, 1)), PolicySpec(), GoalSpec("relaunch", (10, 5)))
    cfg = ScenarioConfig("t", 12.0, 0.1, [robot], arena=(0, 0, 10, 10))
    res = run_scenario(cfg)
    pos = res.trajectories["robot"].positions
    assert (pos[:, 1] <= 10 + 0.1 + 1e-9).all()
    assert sum(e["kind"] == "goal_reached" for e in res.events) >= 2


def test_personal_space_keeps_trajectories():
    base = build("dyadic/overtaking/3")
    ps = build_personal_space(base)
    assert ps.metrics.combined_radius_override == 2.0
    assert results_equal(run_scenario(base), run_scenario(ps))


# -- validation ------------------------------------------------------------------------------


def test_config_validation_lists_fields():
    a = AgentSpec("a", AgentState(0, (0, 0), (1, 0)))
    with pytest.raises(ConfigError) as err:
        ScenarioConfig("bad", -1.0, 0.0, [a, a])
    assert {"duration", "dt", "agents.id (duplicate)"} <= set(err.value.fields)


def test_edge_goal_needs_arena():
    a = AgentSpec("a", AgentState(0, (0, 0), (1, 0)), goal=GoalSpec("edge", (1, 0)))
    with pytest.raises(ConfigError):
        ScenarioConfig("bad", 1.0, 0.1, [a])


def test_chaser_needs_existing_target():
    with pytest.raises(ConfigError):
        PolicySpec("chaser")
    a = AgentSpec("a", AgentState(0, (0, 0), (1, 0)), PolicySpec("chaser", target="ghost"))
    with pytest.raises(ConfigError):
        ScenarioConfig("bad", 1.0, 0.1, [a])


def test_unknown_policy_and_goal_types():
    with pytest.raises(ConfigError):
        PolicySpec("teleport")
    with pytest.raises(ConfigError):
        GoalSpec("moving")
