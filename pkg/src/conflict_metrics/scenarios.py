"""Scenario catalog for the dyadic, group, crowd, catch and personal-space runs.

Geometry constants not fixed by the experiment descriptions (start
separations, lateral offsets, start corners) are module-level constants.
Catalog names: ``dyadic/<geometry>/<case>``, ``group/<variant>``,
``crowd/<robot type>``, ``catch``, ``personal_space/<geometry>/<case>`` and
``lock``.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .errors import ConfigError
from .kinematics import AgentState, MetricsConfig
from .policies import ChaserParams, DwaParams, SocialForceParams, predicted_intercept
from .sim import AgentSpec, GoalSpec, PolicySpec, ScenarioConfig, agent_rng, sample_edge_point

DT = 0.1
RADIUS = 0.5
DYADIC_DURATION = 30.0
GROUP_DURATION = 30.0
CROWD_DURATION = 60.0
CATCH_DURATION = 30.0

DYADIC_SEPARATION = 30.0  # oncoming and crossing start distance; the full window fits
ONCOMING_LATERAL_OFFSET = 0.1  # breaks the exact head-on symmetry
CROSSING_DELAY = 0.3  # Alice starts this much farther from the crossing point
OVERTAKING_GAP = 10.0
OVERTAKING_LATERAL_OFFSET = 0.2
GOAL_DISTANCE = 100.0  # fixed goals lie this far along the initial heading

GROUP_DISTANCE = 25.0
ALICE_OFFSET = (0.0, 0.6)  # relative to the group centre, x towards the robot
BOB_OFFSET = (1.0, -0.6)

CROWD_SIZE = 20
CROWD_ARENA = (0.0, 0.0, 10.0, 10.0)
CROWD_SPEED = 1.0
CROWD_MIN_SPACING = 1.2

LOCK_DURATION = 20.0
LOCK_HALF_GAP = 0.75  # lateral offset of each agent from the shared centre line

CATCH_ROBOT_START = (10.0, 0.0)
CATCH_ROBOT_GOAL = (-40.0, 50.0)
CATCH_ALICE_START = (0.0, 0.0)

DYADIC_GEOMETRIES = ("oncoming", "crossing", "overtaking")
GROUP_VARIANTS = ("left", "middle", "right")
CROWD_ROBOTS = ("ballistic", "dwa", "social_force")
CROWD_ALIASES = {"sf": "social_force", "ballistic": "ballistic", "dwa": "dwa", "social_force": "social_force"}


def _sf(speed=1.0):
    return PolicySpec("social_force", social_force=SocialForceParams(desired_speed=speed))


def _agent(aid, pos, vel, policy, goal=None):
    vel = np.asarray(vel, dtype=float)
    if goal is None:
        speed = float(np.hypot(*vel))
        goal = np.asarray(pos) + GOAL_DISTANCE * vel / speed
    return AgentSpec(aid, AgentState(0.0, pos, vel, RADIUS), policy, GoalSpec("fixed", tuple(goal)))


def build_dyadic(geometry: str, case: int) -> ScenarioConfig:
    """Robot and Alice; case 1 both ballistic, 2 only Alice reacts, 3 only the robot, 4 both."""
    if geometry not in DYADIC_GEOMETRIES:
        raise ConfigError(f"unknown dyadic geometry {geometry!r}", ["geometry"])
    if case not in (1, 2, 3, 4):
        raise ConfigError(f"dyadic case must be 1-4, got {case}", ["case"])
    robot_reacts = case in (3, 4)
    alice_reacts = case in (2, 4)

    if geometry == "oncoming":
        half = DYADIC_SEPARATION / 2
        off = ONCOMING_LATERAL_OFFSET / 2
        robot = ((-half, -off), (1.0, 0.0), 1.0)
        alice = ((half, off), (-1.0, 0.0), 1.0)
    elif geometry == "crossing":
        leg = DYADIC_SEPARATION / math.sqrt(2)
        robot = ((-leg, 0.0), (1.0, 0.0), 1.0)
        alice = ((0.0, leg + CROSSING_DELAY), (0.0, -1.0), 1.0)
    else:
        off = OVERTAKING_LATERAL_OFFSET / 2
        robot = ((-OVERTAKING_GAP, -off), (1.0, 0.0), 1.0)
        alice = ((0.0, off), (0.5, 0.0), 0.5)

    agents = []
    for aid, (pos, vel, speed), reacts in (("robot", robot, robot_reacts), ("alice", alice, alice_reacts)):
        policy = _sf(speed) if reacts else PolicySpec("ballistic")
        agents.append(_agent(aid, pos, vel, policy))
    return ScenarioConfig(
        f"dyadic/{geometry}/{case}", DYADIC_DURATION, DT, agents,
        role_map={"robot": "robot", "alice": "human"},
    )


def build_group_splitting(variant: str) -> ScenarioConfig:
    """Robot meets Alice and Bob walking towards it; the robot goal sits behind Alice, between them, or behind Bob."""
    if variant not in GROUP_VARIANTS:
        raise ConfigError(f"unknown group variant {variant!r}", ["variant"])
    alice = np.array([GROUP_DISTANCE + ALICE_OFFSET[0], ALICE_OFFSET[1]])
    bob = np.array([GROUP_DISTANCE + BOB_OFFSET[0], BOB_OFFSET[1]])
    goal_y = {"left": alice[1], "middle": 0.5 * (alice[1] + bob[1]), "right": bob[1]}[variant]
    robot_goal = (GROUP_DISTANCE + GOAL_DISTANCE, goal_y)
    heading = np.array(robot_goal) / np.hypot(*robot_goal)
    agents = [
        _agent("robot", (0.0, 0.0), heading, _sf(), robot_goal),
        _agent("alice", tuple(alice), (-1.0, 0.0), _sf()),
        _agent("bob", tuple(bob), (-1.0, 0.0), _sf()),
    ]
    return ScenarioConfig(
        f"group/{variant}", GROUP_DURATION, DT, agents,
        role_map={"robot": "robot", "alice": "human", "bob": "human"},
    )


def crowd_humans(seed: int):
    """Initial positions and first goals of the crowd, drawn from the seed alone."""
    rng = agent_rng(seed, 0, stream=0)
    x0, y0, x1, y1 = CROWD_ARENA
    robot_lane = 0.5 * (y0 + y1)
    positions = []
    while len(positions) < CROWD_SIZE:
        p = rng.uniform((x0 + RADIUS, y0 + RADIUS), (x1 - RADIUS, y1 - RADIUS))
        if all(math.dist(p, q) >= CROWD_MIN_SPACING for q in positions) and (
            p[0] > x0 + 1.5 or abs(p[1] - robot_lane) > 1.5
        ):
            positions.append(p)
    goals = [sample_edge_point(rng, CROWD_ARENA) for _ in positions]
    return positions, goals


def build_crowd(robot_type: str, seed: int = 0) -> ScenarioConfig:
    """Robot crossing a 10 m x 10 m area among 20 Social Force humans with edge goals."""
    robot_type = CROWD_ALIASES.get(robot_type, robot_type)
    if robot_type not in CROWD_ROBOTS:
        raise ConfigError(f"unknown crowd robot type {robot_type!r}", ["robot_type"])
    x0, y0, x1, y1 = CROWD_ARENA
    lane = 0.5 * (y0 + y1)
    policy = {
        "ballistic": PolicySpec("ballistic"),
        "dwa": PolicySpec("dwa", dwa=DwaParams(max_speed=CROWD_SPEED)),
        "social_force": _sf(CROWD_SPEED),
    }[robot_type]
    robot = AgentSpec(
        "robot", AgentState(0.0, (x0, lane), (CROWD_SPEED, 0.0), RADIUS), policy,
        GoalSpec("relaunch", (x1, lane)),
    )
    agents = [robot]
    positions, goals = crowd_humans(seed)
    for i, (p, g) in enumerate(zip(positions, goals)):
        d = np.subtract(g, p)
        v = CROWD_SPEED * d / np.hypot(*d)
        agents.append(AgentSpec(f"h{i:02d}", AgentState(0.0, p, v, RADIUS), _sf(CROWD_SPEED), GoalSpec("edge", g)))
    role_map = {a.id: "human" for a in agents}
    role_map["robot"] = "robot"
    return ScenarioConfig(f"crowd/{robot_type}", CROWD_DURATION, DT, agents, CROWD_ARENA, seed,
                          role_map=role_map)


def reseed(cfg: ScenarioConfig, seed: int) -> ScenarioConfig:
    """``cfg`` under another seed; a crowd also redraws its humans' start states and goals."""
    cfg = replace(cfg, seed=int(seed))
    if not cfg.name.startswith("crowd/"):
        return cfg
    positions, goals = crowd_humans(seed)
    humans = [k for k, a in enumerate(cfg.agents) if a.goal.type == "edge"]
    if len(humans) != len(positions):
        raise ConfigError(f"crowd scenario needs {len(positions)} edge-goal humans, got {len(humans)}", ["agents"])
    agents = list(cfg.agents)
    for k, p, g in zip(humans, positions, goals):
        a = agents[k]
        d = np.subtract(g, p)
        state = AgentState(a.state.t, p, CROWD_SPEED * d / np.hypot(*d), a.state.radius)
        agents[k] = replace(a, state=state, goal=GoalSpec("edge", g))
    return replace(cfg, agents=agents)


def build_catch() -> ScenarioConfig:
    """Social Force robot running diagonally; Alice chases it with a predicting DWA."""
    direction = np.subtract(CATCH_ROBOT_GOAL, CATCH_ROBOT_START)
    v_robot = direction / np.hypot(*direction)
    chaser = ChaserParams()
    robot_state = AgentState(0.0, CATCH_ROBOT_START, v_robot, RADIUS)
    alice_state = AgentState(0.0, CATCH_ALICE_START, (0.0, 0.0), RADIUS)
    # Alice starts already heading for her first intercept point
    aim = predicted_intercept(alice_state, robot_state, chaser.prediction_speed_divisor) - CATCH_ALICE_START
    v_alice = chaser.dwa.max_speed * aim / np.hypot(*aim)
    agents = [
        _agent("robot", CATCH_ROBOT_START, v_robot, _sf(), CATCH_ROBOT_GOAL),
        _agent("alice", CATCH_ALICE_START, v_alice,
               PolicySpec("chaser", chaser=chaser, target="robot"), CATCH_ROBOT_START),
    ]
    return ScenarioConfig("catch", CATCH_DURATION, DT, agents,
                          role_map={"robot": "robot", "alice": "human"})


def build_symmetric_lock() -> ScenarioConfig:
    """Two Social Force agents walking abreast, each with its goal straight through the other.

    The pair is mirror-symmetric about the direction of travel: both turn
    into each other, stall side by side and their forward speed decays while
    the repulsion keeps flipping their lateral velocities.
    """
    far = GOAL_DISTANCE * 10
    agents = [
        _agent("robot", (0.0, -LOCK_HALF_GAP), (1.0, 0.0), _sf(), (0.0, far)),
        _agent("alice", (0.0, LOCK_HALF_GAP), (1.0, 0.0), _sf(), (0.0, -far)),
    ]
    return ScenarioConfig("lock", LOCK_DURATION, DT, agents,
                          role_map={"robot": "robot", "alice": "human"})


def build_personal_space(base: ScenarioConfig, combined_radius: float = 2.0) -> ScenarioConfig:
    """Same scenario, metric radii enlarged (only the metric configuration changes)."""
    if len(base.agents) != 2:
        raise ConfigError("personal-space evaluation needs a dyadic base scenario", ["base"])
    name = base.name.replace("dyadic/", "personal_space/", 1)
    return replace(base, name=name, metrics=replace(base.metrics, combined_radius_override=combined_radius))


def catalog_names():
    names = [f"dyadic/{g}/{c}" for g in DYADIC_GEOMETRIES for c in (1, 2, 3, 4)]
    names += [f"group/{v}" for v in GROUP_VARIANTS]
    names += ["crowd/ballistic", "crowd/dwa", "crowd/sf"]
    names += ["catch"]
    names += [f"personal_space/{g}/{c}" for g in DYADIC_GEOMETRIES for c in (1, 2, 3, 4)]
    names += ["lock"]
    return names


def build(name: str, seed: int = 0) -> ScenarioConfig:
    """Look a scenario up by catalog name."""
    parts = name.strip("/").split("/")
    try:
        if parts[0] in ("dyadic", "personal_space") and len(parts) == 3:
            cfg = build_dyadic(parts[1], int(parts[2]))
            return build_personal_space(cfg) if parts[0] == "personal_space" else cfg
        if parts[0] == "group" and len(parts) == 2:
            return build_group_splitting(parts[1])
        if parts[0] == "crowd" and len(parts) == 2:
            return build_crowd(parts[1], seed)
        if parts == ["catch"]:
            return build_catch()
        if parts == ["lock"]:
            return build_symmetric_lock()
    except (ConfigError, ValueError):
        pass
    raise KeyError(name)
