"""Deterministic fixed-step multi-agent simulator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError
from .kinematics import AgentState, MetricsConfig, Trajectory
from .policies import (
    ChaserParams,
    DwaParams,
    PolicyInput,
    SocialForceParams,
    cap_speed,
    chaser_step,
    dwa_step,
    social_force_accelerations,
)

POLICY_TYPES = ("ballistic", "social_force", "dwa", "chaser")
GOAL_TYPES = ("fixed", "edge", "relaunch")
GOAL_TOLERANCE = 0.3


@dataclass(frozen=True)
class PolicySpec:
    type: str = "ballistic"
    social_force: Optional[SocialForceParams] = None
    dwa: Optional[DwaParams] = None
    chaser: Optional[ChaserParams] = None
    target: Optional[str] = None

    def __post_init__(self):
        if self.type not in POLICY_TYPES:
            raise ConfigError(f"unknown policy type {self.type!r}", ["policy.type"])
        if self.type == "social_force" and self.social_force is None:
            object.__setattr__(self, "social_force", SocialForceParams())
        if self.type == "dwa" and self.dwa is None:
            object.__setattr__(self, "dwa", DwaParams())
        if self.type == "chaser":
            if self.chaser is None:
                object.__setattr__(self, "chaser", ChaserParams())
            if self.target is None:
                raise ConfigError("chaser policy needs a target agent id", ["policy.target"])


@dataclass(frozen=True)
class GoalSpec:
    """Where an agent is heading.

    ``fixed``: a constant point. ``edge``: a point on the arena boundary,
    resampled uniformly on the boundary whenever the agent gets within
    ``GOAL_TOLERANCE``. ``relaunch``: a constant point; on arrival, or on
    leaving the arena, the agent is put back to its initial state.
    """

    type: str = "fixed"
    position: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.type not in GOAL_TYPES:
            raise ConfigError(f"unknown goal type {self.type!r}", ["goal.type"])
        object.__setattr__(self, "position", tuple(float(x) for x in self.position))


@dataclass(frozen=True)
class AgentSpec:
    id: str
    state: AgentState
    policy: PolicySpec = PolicySpec()
    goal: GoalSpec = GoalSpec()


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    duration: float
    dt: float
    agents: Tuple[AgentSpec, ...]
    arena: Optional[Tuple[float, float, float, float]] = None  # xmin, ymin, xmax, ymax
    seed: int = 0
    metrics: MetricsConfig = MetricsConfig()
    role_map: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        self.validate()

    def validate(self):
        bad = []
        if not self.duration > 0:
            bad.append("duration")
        if not self.dt > 0:
            bad.append("dt")
        ids = [a.id for a in self.agents]
        if len(set(ids)) != len(ids):
            bad.append("agents.id (duplicate)")
        if not ids:
            bad.append("agents (empty)")
        for a in self.agents:
            if a.policy.type == "chaser" and a.policy.target not in ids:
                bad.append(f"agents.{a.id}.policy.target")
            if a.goal.type == "edge" and self.arena is None:
                bad.append(f"agents.{a.id}.goal (edge goal needs an arena)")
        if self.arena is not None:
            x0, y0, x1, y1 = self.arena
            if not (x1 > x0 and y1 > y0):
                bad.append("arena")
        for aid, role in self.role_map.items():
            if role not in ("robot", "human"):
                bad.append(f"role_map.{aid}")
        if not 0 <= int(self.seed) < 2**64:
            bad.append("seed")
        if bad:
            raise ConfigError(f"invalid scenario {self.name!r}: {', '.join(bad)}", bad)

    @property
    def agent_ids(self):
        return [a.id for a in self.agents]

    def with_metrics(self, **changes) -> "ScenarioConfig":
        return replace(self, metrics=replace(self.metrics, **changes))


@dataclass
class SimulationResult:
    trajectories: Dict[str, Trajectory]
    events: List[dict]
    config: Optional[ScenarioConfig] = None


def agent_rng(seed: int, index: int, stream: int = 1) -> np.random.Generator:
    """Independent generator for one agent.

    Streams are keyed by ``(seed, stream, index)`` through NumPy's
    ``SeedSequence``, so an agent's random draws depend only on the seed and
    its position in the agent list, never on the other agents' policies.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(stream, index))))


def sample_edge_point(rng: np.random.Generator, arena) -> Tuple[float, float]:
    """Uniform point on the boundary of the rectangle ``arena``."""
    x0, y0, x1, y1 = arena
    w, h = x1 - x0, y1 - y0
    s = rng.uniform(0.0, 2 * (w + h))
    if s < w:
        return (x0 + s, y0)
    s -= w
    if s < h:
        return (x1, y0 + s)
    s -= h
    if s < w:
        return (x1 - s, y1)
    return (x0, y1 - (s - w))


def _inside(p, arena) -> bool:
    x0, y0, x1, y1 = arena
    return x0 <= p[0] <= x1 and y0 <= p[1] <= y1


def compute_commands(pos, vel, radii, goals, specs: Sequence[AgentSpec], ids, dt, t=0.0):
    """Velocity commands of all agents from one synchronous snapshot."""
    n = len(specs)
    cmds = np.empty_like(vel)
    sf = [i for i, s in enumerate(specs) if s.policy.type == "social_force"]
    if sf:
        params = [specs[i].policy.social_force for i in sf]
        accel = social_force_accelerations(pos, vel, goals[sf], sf, params)
        caps = np.array([p.max_speed for p in params])
        cmds[sf] = cap_speed(vel[sf] + dt * accel, caps)
    states = None
    for i, spec in enumerate(specs):
        kind = spec.policy.type
        if kind == "social_force":
            continue
        if kind == "ballistic":
            cmds[i] = vel[i]
            continue
        if states is None:
            states = [AgentState(t, pos[j], vel[j], radii[j]) for j in range(n)]
        inp = PolicyInput(states[i], tuple(goals[i]), [states[j] for j in range(n) if j != i], dt)
        if kind == "dwa":
            cmds[i] = dwa_step(inp, spec.policy.dwa)
        else:
            target = states[ids.index(spec.policy.target)]
            cmds[i] = chaser_step(inp, target, spec.policy.chaser)
    return cmds


def step_world(states: Sequence[AgentState], policies: Sequence[PolicySpec], goals, dt: float,
               ids: Optional[Sequence[str]] = None):
    """Advance every agent by one Euler step.

    Each agent's new velocity is its policy's command computed from the
    common pre-step snapshot; the position then moves by ``velocity * dt``.
    ``ids`` name the agents for chaser targets (default ``"0"``, ``"1"``, ...).
    """
    ids = [str(i) for i in range(len(states))] if ids is None else list(ids)
    specs = [AgentSpec(aid, s, p) for aid, s, p in zip(ids, states, policies)]
    pos = np.array([s.position for s in states], dtype=float)
    vel = np.array([s.velocity for s in states], dtype=float)
    radii = np.array([s.radius for s in states])
    t = states[0].t if states else 0.0
    cmds = compute_commands(pos, vel, radii, np.asarray(goals, dtype=float).reshape(-1, 2),
                            specs, ids, dt, t)
    new_pos = pos + cmds * dt
    return [AgentState(s.t + dt, p, v, s.radius) for s, p, v in zip(states, new_pos, cmds)]


def run_scenario(cfg: ScenarioConfig) -> SimulationResult:
    """Simulate ``cfg`` for ``duration`` seconds.

    Sample ``k`` of each trajectory holds the position at ``k * dt`` and the
    velocity commanded at that time, i.e. the one carrying the agent to
    sample ``k + 1``.
    """
    cfg.validate()
    specs = list(cfg.agents)
    ids = [a.id for a in specs]
    n = len(specs)
    steps = int(round(cfg.duration / cfg.dt))
    dt = cfg.dt
    pos = np.array([a.state.position for a in specs], dtype=float)
    vel = np.array([a.state.velocity for a in specs], dtype=float)
    radii = np.array([a.state.radius for a in specs])
    goals = np.array([a.goal.position for a in specs], dtype=float)
    rngs = {i: agent_rng(cfg.seed, i) for i, a in enumerate(specs) if a.goal.type == "edge"}
    start_pos, start_vel = pos.copy(), vel.copy()

    rec_pos = np.empty((steps + 1, n, 2))
    rec_vel = np.empty((steps + 1, n, 2))
    events: List[dict] = []
    overlapping = np.zeros((n, n), dtype=bool)
    iu = np.triu_indices(n, 1)
    contact = radii[:, None] + radii[None, :]

    for k in range(steps + 1):
        t = k * dt
        for i, spec in enumerate(specs):
            kind = spec.goal.type
            arrived = math.dist(pos[i], goals[i]) < GOAL_TOLERANCE
            if kind == "relaunch" and cfg.arena is not None:
                arrived = arrived or not _inside(pos[i], cfg.arena)
            if kind == "fixed" or not arrived:
                continue
            events.append({"t": t, "kind": "goal_reached", "agents": [ids[i]]})
            if kind == "edge":
                goals[i] = sample_edge_point(rngs[i], cfg.arena)
                events.append({"t": t, "kind": "goal_resampled", "agents": [ids[i]]})
            else:
                pos[i], vel[i] = start_pos[i], start_vel[i]

        if n > 1:
            diff = pos[:, None, :] - pos[None, :, :]
            touching = np.hypot(diff[..., 0], diff[..., 1]) < contact
            for i, j in zip(*iu):
                if touching[i, j] and not overlapping[i, j]:
                    events.append({"t": t, "kind": "collision", "agents": [ids[i], ids[j]]})
            overlapping = touching

        cmds = compute_commands(pos, vel, radii, goals, specs, ids, dt, t)
        rec_pos[k] = pos
        rec_vel[k] = cmds
        pos = pos + cmds * dt
        vel = cmds

    trajectories = {
        ids[i]: Trajectory(ids[i], 0.0, dt, rec_pos[:, i], rec_vel[:, i], float(radii[i]))
        for i in range(n)
    }
    return SimulationResult(trajectories, events, cfg)
