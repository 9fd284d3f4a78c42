"""Motion policies: ballistic, Social Force, range-limited DWA and a chaser.

Every policy maps a :class:`PolicyInput` to the velocity command held over
the next step. Policies keep no state between calls.

Social Force
------------
The anisotropic interaction force of agent ``i`` caused by agent ``j`` is::

    e     = (p_i - p_j) / |p_i - p_j|          unit vector away from j
    D     = lambda * (v_j - v_i) + e            interaction vector
    t     = D / |D|,   B = gamma * |D|
    theta = angle from e to t, wrapped to (-pi, pi]
    w     = rear_weight + (1 - rear_weight) * (1 + cos(phi)) / 2
    f_ij  = w * A * ( exp(-d/B - (n' B theta)^2) * t
                    - sign(theta) * exp(-d/B - (n B theta)^2) * leftnormal(t) )

where ``phi`` is the angle between ``i``'s heading and the direction to
``j``; the perception weight ``w`` is 1 straight ahead and ``rear_weight``
straight behind (``rear_weight = 1`` gives the isotropic force).

and the goal term is ``(desired_speed * e_goal - v) / relaxation_time``
(``-v / relaxation_time`` once within ``goal_threshold`` of the goal). The
new velocity ``v + dt * (goal + sum_j f_ij)`` is capped at ``max_speed``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError
from .kinematics import AgentState


@dataclass(frozen=True)
class PolicyInput:
    self: AgentState
    goal: tuple
    neighbors: Sequence[AgentState] = ()
    dt: float = 0.1


def _check_positive(obj, names):
    bad = [name for name in names if not getattr(obj, name) > 0]
    if bad:
        raise ConfigError(f"{type(obj).__name__}: fields must be positive: {', '.join(bad)}", bad)


@dataclass(frozen=True)
class SocialForceParams:
    A: float = 5.1
    lam: float = 3.0
    gamma: float = 0.35
    n: float = 1.0
    n_prime: float = 3.0
    desired_speed: float = 1.0
    relaxation_time: float = 1.0
    max_speed: Optional[float] = None
    goal_threshold: float = 0.2
    rear_weight: float = 0.5

    def __post_init__(self):
        if self.max_speed is None:
            object.__setattr__(self, "max_speed", 1.3 * self.desired_speed)
        _check_positive(self, ["A", "lam", "gamma", "n", "n_prime", "desired_speed",
                               "relaxation_time", "max_speed", "goal_threshold"])
        if not 0 <= self.rear_weight <= 1:
            raise ConfigError("rear_weight must lie in [0, 1]", ["rear_weight"])


@dataclass(frozen=True)
class DwaWeights:
    heading: float = 0.8
    clearance: float = 0.1
    velocity: float = 0.1

    def __post_init__(self):
        vals = (self.heading, self.clearance, self.velocity)
        if min(vals) < 0 or sum(vals) <= 0:
            raise ConfigError("DWA weights must be non-negative and not all zero", ["weights"])


@dataclass(frozen=True)
class DwaParams:
    sensor_range: float = 1.0
    velocity_samples: int = 11
    heading_samples: int = 21
    max_speed: float = 1.0
    max_accel: float = 1.0
    max_yaw_rate: float = 1.0
    horizon: float = 2.0
    weights: DwaWeights = field(default_factory=DwaWeights)

    def __post_init__(self):
        if isinstance(self.weights, dict):
            object.__setattr__(self, "weights", DwaWeights(**self.weights))
        _check_positive(self, ["sensor_range", "velocity_samples", "heading_samples",
                               "max_speed", "max_accel", "max_yaw_rate", "horizon"])


@dataclass(frozen=True)
class ChaserParams:
    dwa: DwaParams = field(default_factory=lambda: DwaParams(max_speed=1.2))
    prediction_speed_divisor: float = 1.2

    def __post_init__(self):
        if isinstance(self.dwa, dict):
            object.__setattr__(self, "dwa", DwaParams(**self.dwa))
        _check_positive(self, ["prediction_speed_divisor"])


def wrap_angle(a):
    """Wrap angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - a, 2 * np.pi)


def cap_speed(v: np.ndarray, max_speed) -> np.ndarray:
    speed = np.hypot(v[..., 0], v[..., 1])
    factor = np.where(speed > max_speed, max_speed / np.where(speed > 0, speed, 1.0), 1.0)
    return v * factor[..., None]


def ballistic_step(inp: PolicyInput) -> np.ndarray:
    return np.array(inp.self.velocity, dtype=float)


def social_force_accelerations(pos, vel, goals, subjects, params: Sequence[SocialForceParams]):
    """Social Force accelerations for agents ``subjects`` among all agents.

    ``pos``, ``vel`` have shape ``(N, 2)``; ``goals`` and ``params`` are
    aligned with ``subjects``. Every agent in ``pos`` repels every subject.
    """
    subjects = np.asarray(subjects, dtype=int)
    m, total = len(subjects), len(pos)
    A = np.array([p.A for p in params])[:, None]
    lam = np.array([p.lam for p in params])[:, None, None]
    gamma = np.array([p.gamma for p in params])[:, None]
    n = np.array([p.n for p in params])[:, None]
    n_prime = np.array([p.n_prime for p in params])[:, None]
    speed0 = np.array([p.desired_speed for p in params])[:, None]
    tau = np.array([p.relaxation_time for p in params])[:, None]
    threshold = np.array([p.goal_threshold for p in params])
    rear = np.array([p.rear_weight for p in params])[:, None]

    p_self, v_self = pos[subjects], vel[subjects]
    to_goal = np.asarray(goals, dtype=float).reshape(m, 2) - p_self
    goal_dist = np.hypot(to_goal[:, 0], to_goal[:, 1])
    far = goal_dist > threshold
    direction = to_goal / np.where(far, goal_dist, 1.0)[:, None]
    desired = np.where(far[:, None], speed0 * direction, 0.0)
    accel = (desired - v_self) / tau

    if total > 1:
        others = np.ones((m, total), dtype=bool)
        others[np.arange(m), subjects] = False
        diff = p_self[:, None, :] - pos[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        others &= dist > 0
        safe_dist = np.where(others, dist, 1.0)
        e = diff / safe_dist[..., None]
        D = lam * (vel[None, :, :] - v_self[:, None, :]) + e
        d_len = np.hypot(D[..., 0], D[..., 1])
        d_len = np.where(d_len > 0, d_len, 1e-12)
        t = D / d_len[..., None]
        theta = wrap_angle(np.arctan2(t[..., 1], t[..., 0]) - np.arctan2(e[..., 1], e[..., 0]))
        B = gamma * d_len
        base = -safe_dist / B
        f_vel = np.exp(base - (n_prime * B * theta) ** 2)
        f_ang = -np.sign(theta) * np.exp(base - (n * B * theta) ** 2)
        normal = np.stack((-t[..., 1], t[..., 0]), axis=-1)
        force = f_vel[..., None] * t + f_ang[..., None] * normal
        # heading: own velocity, or the goal direction when at rest
        speed = np.hypot(v_self[:, 0], v_self[:, 1])
        moving = speed > 1e-9
        heading = np.where(moving[:, None], v_self / np.where(moving, speed, 1.0)[:, None], direction)
        cos_phi = -np.einsum("mi,mki->mk", heading, e)
        weight = rear + (1.0 - rear) * 0.5 * (1.0 + cos_phi)
        force = np.where(others[..., None], weight[..., None] * force, 0.0)
        accel = accel + A * force.sum(axis=1)
    return accel


def social_force_step(inp: PolicyInput, p: SocialForceParams = SocialForceParams()) -> np.ndarray:
    states = [inp.self, *inp.neighbors]
    pos = np.array([s.position for s in states], dtype=float)
    vel = np.array([s.velocity for s in states], dtype=float)
    accel = social_force_accelerations(pos, vel, [inp.goal], [0], [p])[0]
    return cap_speed(vel[0] + inp.dt * accel, p.max_speed)


def _candidate_commands(speed, dt, p: DwaParams):
    """Speeds and yaw rates of the dynamic window."""
    lo = max(0.0, speed - p.max_accel * dt)
    hi = min(p.max_speed, speed + p.max_accel * dt)
    speeds = np.linspace(lo, max(lo, hi), p.velocity_samples)
    rates = np.linspace(-p.max_yaw_rate, p.max_yaw_rate, p.heading_samples)
    s, w = np.meshgrid(speeds, rates, indexing="ij")
    return s.ravel(), w.ravel()


def _arc_rollout(pos, heading, speeds, rates, dt, steps):
    """Positions along constant (speed, yaw rate) arcs, shape ``(K, steps, 2)``.

    The first step already turns by ``rate * dt``; the command for the next
    step is the velocity of that first segment.
    """
    k = np.arange(1, steps + 1)
    angles = heading + rates[:, None] * dt * k[None, :]
    step = speeds[:, None, None] * dt * np.stack((np.cos(angles), np.sin(angles)), axis=-1)
    return pos + np.cumsum(step, axis=1), angles[:, 0]


def dwa_step(inp: PolicyInput, p: DwaParams = DwaParams()) -> np.ndarray:
    """Range-limited Dynamic Window Approach.

    Samples (speed, yaw rate) pairs reachable within one step, rolls each out
    as a circular arc over ``horizon`` seconds against the perceived
    neighbours (extrapolated at constant velocity) and returns the first-step
    velocity of the best-scoring arc. An arc is admissible when its first
    contact lies no sooner than the time the agent needs to stop; its
    clearance is the distance travelled up to that contact, capped at
    ``sensor_range``.
    Neighbours are perceived when the gap between the two discs is at most
    ``sensor_range``. An agent at rest may start in any direction.
    """
    me = inp.self
    pos = np.array(me.position, dtype=float)
    vel = np.array(me.velocity, dtype=float)
    speed = math.hypot(*vel)
    to_goal = np.asarray(inp.goal, dtype=float) - pos
    goal_heading = math.atan2(to_goal[1], to_goal[0])
    steps = max(1, int(round(p.horizon / inp.dt)))

    speeds, rates = _candidate_commands(speed, inp.dt, p)
    if speed < 1e-6:
        # at rest: straight lines in any direction, centred on the goal
        offsets = (np.arange(p.heading_samples) - p.heading_samples // 2) * (2 * np.pi / p.heading_samples)
        headings = goal_heading + offsets[(np.arange(len(speeds)) % p.heading_samples)]
        rates = np.zeros_like(speeds)
        paths = pos + speeds[:, None, None] * inp.dt * np.arange(1, steps + 1)[None, :, None] * \
            np.stack((np.cos(headings), np.sin(headings)), axis=-1)[:, None, :]
    else:
        paths, headings = _arc_rollout(pos, math.atan2(vel[1], vel[0]), speeds, rates, inp.dt, steps)
    cmds = np.stack((speeds * np.cos(headings), speeds * np.sin(headings)), axis=-1)

    near = [
        nb for nb in inp.neighbors
        if math.dist(nb.position, me.position) - me.radius - nb.radius <= p.sensor_range
    ]
    # time of the first contact along each rollout
    hit_time = np.full(len(cmds), np.inf)
    if near:
        tau = inp.dt * np.arange(1, steps + 1)
        nb_pos = np.array([nb.position for nb in near], dtype=float)
        nb_vel = np.array([nb.velocity for nb in near], dtype=float)
        limit = me.radius + np.array([nb.radius for nb in near])
        theirs = nb_pos[None, :, :] + nb_vel[None, :, :] * tau[:, None, None]  # (steps, M, 2)
        diff = paths[:, :, None, :] - theirs[None]
        hit = (np.hypot(diff[..., 0], diff[..., 1]) <= limit).any(axis=2)  # (K, steps)
        first = np.where(hit.any(axis=1), hit.argmax(axis=1), steps)
        hit_time = np.where(first < steps, inp.dt * first, np.inf)
    # admissible: the contact is no closer than the time needed to stop
    ok = hit_time >= speeds / p.max_accel
    travelled = speeds * np.where(np.isfinite(hit_time), hit_time, 0.0)
    clearance = np.where(np.isfinite(hit_time), np.clip(travelled / p.sensor_range, 0.0, 1.0), 1.0)
    if not ok.any():
        scale = max(0.0, speed - p.max_accel * inp.dt) / speed if speed > 0 else 0.0
        return vel * scale

    heading_score = 1.0 - np.abs(wrap_angle(headings - goal_heading)) / np.pi
    w = p.weights
    score = w.heading * heading_score + w.clearance * clearance + w.velocity * speeds / p.max_speed
    score = np.where(ok, score, -np.inf)
    return cmds[int(np.argmax(score))]


def chaser_step(inp: PolicyInput, target: AgentState, p: ChaserParams = ChaserParams()) -> np.ndarray:
    """Head for where ``target`` will be after ``distance / prediction_speed_divisor`` seconds."""
    goal = predicted_intercept(inp.self, target, p.prediction_speed_divisor)
    return dwa_step(PolicyInput(inp.self, tuple(goal), inp.neighbors, inp.dt), p.dwa)


def predicted_intercept(me: AgentState, target: AgentState, divisor: float) -> np.ndarray:
    d = math.dist(me.position, target.position)
    return np.asarray(target.position) + np.asarray(target.velocity) * (d / divisor)
