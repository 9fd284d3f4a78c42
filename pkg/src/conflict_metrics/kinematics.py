"""Pairwise conflict kinematics.

Relative motion of two circular agents, the predicted distance at closest
encounter (pDCE), the conflict potential derived from it, the linear
time normalization in front of the time of closest encounter (TCE) and the
resulting conflict time series ``C(t) = CP(t) * N(t)``.

Every scalar operation has a vectorised ``*_array`` twin working on stacks
of 2-D vectors with shape ``(n, 2)``; the series code only uses those.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import ConfigError, EmptyInteractionError, PreconditionError

DEFAULT_WINDOW = 12.0
DEFAULT_RADIUS = 0.5
DEFAULT_EPSILON_SPEED = 1e-6
TIME_TOL = 1e-9


@dataclass(frozen=True)
class AgentState:
    t: float
    position: tuple
    velocity: tuple
    radius: float = DEFAULT_RADIUS

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(x) for x in self.position))
        object.__setattr__(self, "velocity", tuple(float(x) for x in self.velocity))
        if len(self.position) != 2 or len(self.velocity) != 2:
            raise PreconditionError("position and velocity must be 2-D")
        if not self.radius > 0:
            raise PreconditionError(f"radius must be positive, got {self.radius}")
        values = (self.t, self.radius, *self.position, *self.velocity)
        if not all(math.isfinite(v) for v in values):
            raise PreconditionError("agent state contains non-finite values")


@dataclass(frozen=True)
class RelKin:
    """Relative position ``r`` and relative velocity ``v`` (b minus a)."""

    r: np.ndarray
    v: np.ndarray

    def swapped(self) -> "RelKin":
        return RelKin(-self.r, -self.v)


@dataclass(frozen=True)
class MetricsConfig:
    """Parameters of the conflict metric.

    ``combined_radius_override`` replaces ``r1 + r2`` in the conflict
    potential, e.g. 2.0 m to evaluate personal-space rather than collision
    conflicts.
    """

    window: float = DEFAULT_WINDOW
    combined_radius_override: Optional[float] = None
    epsilon_speed: float = DEFAULT_EPSILON_SPEED

    def __post_init__(self):
        bad = []
        if not (self.window > 0 and math.isfinite(self.window)):
            bad.append("window")
        if not self.epsilon_speed > 0:
            bad.append("epsilon_speed")
        if self.combined_radius_override is not None and not self.combined_radius_override > 0:
            bad.append("combined_radius_override")
        if bad:
            raise ConfigError(f"invalid metrics config fields: {', '.join(bad)}", bad)

    def combined_radius(self, r1: float, r2: float) -> float:
        if self.combined_radius_override is not None:
            return float(self.combined_radius_override)
        return float(r1 + r2)


@dataclass(frozen=True)
class ConflictSample:
    t: float
    pdce: float
    tce_pred: float
    cp: float
    n: float
    c: float


@dataclass(eq=False)
class Trajectory:
    """Uniformly sampled motion of one agent.

    Stored as arrays: ``positions`` and ``velocities`` have shape ``(n, 2)``
    and sample ``k`` is taken at ``t0 + k * dt``. The velocity of a sample is
    the one held over the following step, so for simulated data
    ``positions[k + 1] == positions[k] + velocities[k] * dt``.
    """

    agent_id: str
    t0: float
    dt: float
    positions: np.ndarray
    velocities: np.ndarray = None
    radius: float = DEFAULT_RADIUS
    _times: np.ndarray = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.agent_id = str(self.agent_id)
        self.positions = np.array(self.positions, dtype=float).reshape(-1, 2)
        if self.velocities is None:
            self.velocities = finite_difference_velocities(self.positions, self.dt)
        else:
            self.velocities = np.array(self.velocities, dtype=float).reshape(-1, 2)
        if not self.dt > 0:
            raise PreconditionError(f"dt must be positive, got {self.dt}")
        if not self.radius > 0:
            raise PreconditionError(f"radius must be positive, got {self.radius}")
        if len(self.positions) == 0:
            raise PreconditionError(f"trajectory {self.agent_id!r} has no samples")
        if self.positions.shape != self.velocities.shape:
            raise PreconditionError("positions and velocities differ in length")
        if not (np.isfinite(self.positions).all() and np.isfinite(self.velocities).all()):
            raise PreconditionError(f"trajectory {self.agent_id!r} contains non-finite values")

    @classmethod
    def from_states(cls, agent_id, samples: Sequence[AgentState]) -> "Trajectory":
        if not samples:
            raise PreconditionError("no samples")
        times = np.array([s.t for s in samples])
        dt = float(times[1] - times[0]) if len(times) > 1 else 1.0
        if len(times) > 1 and np.max(np.abs(np.diff(times) - dt)) > TIME_TOL:
            raise PreconditionError("timestamps are not uniformly spaced")
        if len({s.radius for s in samples}) != 1:
            raise PreconditionError("radius varies along the trajectory")
        return cls(
            agent_id,
            float(times[0]),
            dt,
            [s.position for s in samples],
            [s.velocity for s in samples],
            samples[0].radius,
        )

    def __len__(self):
        return len(self.positions)

    def __getitem__(self, k) -> AgentState:
        return AgentState(self.times[k], self.positions[k], self.velocities[k], self.radius)

    def __iter__(self) -> Iterator[AgentState]:
        return (self[k] for k in range(len(self)))

    @property
    def samples(self):
        return list(self)

    @property
    def times(self) -> np.ndarray:
        if self._times is None:
            self._times = self.t0 + self.dt * np.arange(len(self.positions))
        return self._times

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (len(self) - 1)

    def slice(self, start: int, stop: int) -> "Trajectory":
        """Sub-trajectory of samples ``start:stop`` (same id and radius)."""
        return Trajectory(
            self.agent_id,
            self.t0 + start * self.dt,
            self.dt,
            self.positions[start:stop],
            self.velocities[start:stop],
            self.radius,
        )


def finite_difference_velocities(positions: np.ndarray, dt: float) -> np.ndarray:
    """Central differences inside, one-sided at the two ends."""
    positions = np.asarray(positions, dtype=float)
    if len(positions) < 2:
        return np.zeros_like(positions)
    return np.gradient(positions, dt, axis=0, edge_order=1)


def cross2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def relative_kinematics(a: AgentState, b: AgentState) -> RelKin:
    if abs(a.t - b.t) > TIME_TOL:
        raise PreconditionError(f"states are taken at different times ({a.t} vs {b.t})")
    return RelKin(
        np.subtract(b.position, a.position),
        np.subtract(b.velocity, a.velocity),
    )


def predicted_tce_array(r: np.ndarray, v: np.ndarray, epsilon_speed=DEFAULT_EPSILON_SPEED):
    """Time offset of the closest encounter under constant relative velocity.

    Zero where the relative speed is below ``epsilon_speed``.
    """
    r = np.asarray(r, dtype=float)
    v = np.asarray(v, dtype=float)
    v2 = np.einsum("...i,...i->...", v, v)
    moving = v2 >= epsilon_speed**2
    safe = np.where(moving, v2, 1.0)
    return np.where(moving, -np.einsum("...i,...i->...", r, v) / safe, 0.0)


def pdce_array(r: np.ndarray, v: np.ndarray, epsilon_speed=DEFAULT_EPSILON_SPEED):
    """Predicted distance at closest encounter, |r x v| / |v|.

    Falls back to the current distance |r| when the encounter lies in the past
    or the agents are at relative rest.
    """
    r = np.asarray(r, dtype=float)
    v = np.asarray(v, dtype=float)
    speed = np.hypot(v[..., 0], v[..., 1])
    dist = np.hypot(r[..., 0], r[..., 1])
    approaching = (speed >= epsilon_speed) & (predicted_tce_array(r, v, epsilon_speed) >= 0)
    safe = np.where(approaching, speed, 1.0)
    return np.where(approaching, np.abs(cross2(r, v)) / safe, dist)


def conflict_potential_array(pdce, combined_radius):
    if not combined_radius > 0:
        raise ConfigError(f"combined radius must be positive, got {combined_radius}")
    return np.clip(1.0 - np.asarray(pdce, dtype=float) / combined_radius, 0.0, 1.0)


def normalization_array(offset, window):
    """Linear ramp over ``offset = t - tce_anchor`` in ``[-window, 0]``."""
    if not window > 0:
        raise ConfigError(f"window must be positive, got {window}")
    offset = np.asarray(offset, dtype=float)
    inside = (offset >= -window - TIME_TOL) & (offset <= TIME_TOL)
    return np.where(inside, np.clip(1.0 + offset / window, 0.0, 1.0), 0.0)


def predicted_tce(k: RelKin, epsilon_speed=DEFAULT_EPSILON_SPEED) -> float:
    return float(predicted_tce_array(k.r, k.v, epsilon_speed))


def pdce(k: RelKin, epsilon_speed=DEFAULT_EPSILON_SPEED) -> float:
    return float(pdce_array(k.r, k.v, epsilon_speed))


def conflict_potential(pdce: float, combined_radius: float) -> float:
    return float(conflict_potential_array(pdce, combined_radius))


def normalization(t: float, tce_anchor: float, window: float) -> float:
    return float(normalization_array(t - tce_anchor, window))


def overlap(traj_a: Trajectory, traj_b: Trajectory):
    """Index ranges of the common timesteps of two trajectories.

    Returns ``(start_a, start_b, length)``; raises if there is no overlap.
    """
    if abs(traj_a.dt - traj_b.dt) > TIME_TOL:
        raise PreconditionError(f"trajectories have different dt ({traj_a.dt} vs {traj_b.dt})")
    shift = (traj_b.t0 - traj_a.t0) / traj_a.dt
    k = round(shift)
    if abs(shift - k) * traj_a.dt > 1e-6:
        raise PreconditionError("trajectory time grids are not aligned")
    start_a, start_b = max(k, 0), max(-k, 0)
    length = min(len(traj_a) - start_a, len(traj_b) - start_b)
    if length <= 0:
        raise EmptyInteractionError(
            f"trajectories {traj_a.agent_id!r} and {traj_b.agent_id!r} do not overlap in time"
        )
    return start_a, start_b, length


@dataclass
class PairArrays:
    """Both agents' samples on their common time grid."""

    times: np.ndarray
    pos_a: np.ndarray
    vel_a: np.ndarray
    pos_b: np.ndarray
    vel_b: np.ndarray
    radius_a: float
    radius_b: float
    dt: float

    @classmethod
    def from_trajectories(cls, traj_a: Trajectory, traj_b: Trajectory) -> "PairArrays":
        sa, sb, n = overlap(traj_a, traj_b)
        return cls(
            traj_a.times[sa:sa + n],
            traj_a.positions[sa:sa + n],
            traj_a.velocities[sa:sa + n],
            traj_b.positions[sb:sb + n],
            traj_b.velocities[sb:sb + n],
            traj_a.radius,
            traj_b.radius,
            traj_a.dt,
        )

    def __len__(self):
        return len(self.times)

    def distance(self) -> np.ndarray:
        d = self.pos_b - self.pos_a
        return np.hypot(d[:, 0], d[:, 1])

    def conflict_potential(self, cfg: MetricsConfig) -> np.ndarray:
        p = pdce_array(self.pos_b - self.pos_a, self.vel_b - self.vel_a, cfg.epsilon_speed)
        return conflict_potential_array(p, cfg.combined_radius(self.radius_a, self.radius_b))


def window_indices(pair: PairArrays, anchor_index: int, window: float):
    """Indices of the samples in ``[anchor - window, anchor]``."""
    steps = int(math.floor(window / pair.dt + 1e-9))
    return max(anchor_index - steps, 0), anchor_index + 1


def conflict_series(
    traj_a: Trajectory,
    traj_b: Trajectory,
    tce_anchor: float,
    cfg: MetricsConfig = MetricsConfig(),
) -> list:
    """Conflict samples on every common timestep in ``[tce_anchor - window, tce_anchor]``.

    The window is truncated to the available overlap. ``tce_anchor`` is
    snapped to the nearest common timestep.
    """
    pair = PairArrays.from_trajectories(traj_a, traj_b)
    anchor = int(round((tce_anchor - pair.times[0]) / pair.dt))
    if anchor < 0 or anchor >= len(pair):
        raise PreconditionError(f"tce_anchor {tce_anchor} lies outside the common time range")
    lo, hi = window_indices(pair, anchor, cfg.window)
    r = pair.pos_b[lo:hi] - pair.pos_a[lo:hi]
    v = pair.vel_b[lo:hi] - pair.vel_a[lo:hi]
    p = pdce_array(r, v, cfg.epsilon_speed)
    tce = predicted_tce_array(r, v, cfg.epsilon_speed)
    cp = conflict_potential_array(p, cfg.combined_radius(pair.radius_a, pair.radius_b))
    n = normalization_array((np.arange(lo, hi) - anchor) * pair.dt, cfg.window)
    c = cp * n
    return [
        ConflictSample(float(t), float(a), float(b), float(x), float(y), float(z))
        for t, a, b, x, y, z in zip(pair.times[lo:hi], p, tce, cp, n, c)
    ]
