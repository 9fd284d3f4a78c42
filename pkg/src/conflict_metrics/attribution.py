"""Responsibility and Engagement attribution.

For one interaction window every step's conflict change is split into the
parts caused by each agent's velocity change (frozen-velocity
counterfactuals) and a residual attributed to time. Diminishing parts
integrate to Responsibility shares, escalating parts to Engagement shares.

All per-step quantities in :class:`ContributionSample` are rates, i.e.
conflict change per step divided by ``dt``; integrals are left Riemann sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import EmptyDistributionError, EmptyInteractionError, PreconditionError
from .kinematics import (
    AgentState,
    MetricsConfig,
    PairArrays,
    Trajectory,
    conflict_potential_array,
    normalization_array,
    pdce_array,
    window_indices,
)

DEGENERACY_THRESHOLD = 1e-6
JUMP_TOLERANCE = 0.5  # metres of unexplained displacement per step
SOURCES = ("agent1", "agent2", "time")

RESOLVED = "resolved"
DEGENERATE = "degenerate_no_conflict"


@dataclass(frozen=True)
class ContributionSample:
    t: float
    cc_agent1: float
    cc_agent2: float
    cc1_plus: float
    cc1_minus: float
    cc2_plus: float
    cc2_minus: float
    cc_time_plus: float
    cc_time_minus: float
    dC: float


@dataclass(frozen=True)
class InteractionSegment:
    agent_ids: Tuple[str, str]
    start_t: float
    end_t: float
    tce_anchor: float
    min_distance: float


@dataclass
class InteractionReport:
    agent_ids: Tuple[str, str]
    tce_anchor: float
    c_total: float
    r_shares: Dict[str, float]
    e_shares: Dict[str, float]
    status: str
    segment: Optional[InteractionSegment] = None
    residual: float = 0.0
    diminishing_total: float = 0.0

    @property
    def resolved(self) -> bool:
        return self.status == RESOLVED

    def _key(self, who: str) -> str:
        if who in SOURCES:
            return who
        if who == self.agent_ids[0]:
            return "agent1"
        if who == self.agent_ids[1]:
            return "agent2"
        raise KeyError(who)

    def r(self, who: str) -> float:
        """Responsibility of ``who`` (agent id, ``agent1``/``agent2`` or ``time``)."""
        return self.r_shares[self._key(who)]

    def e(self, who: str) -> float:
        return self.e_shares[self._key(who)]


@dataclass
class ShareDistribution:
    source: str
    values: np.ndarray
    median: float
    quartiles: Tuple[float, float]
    n: int
    weights: Optional[np.ndarray] = field(default=None, repr=False)


# -- scalar building blocks ---------------------------------------------------


def counterfactual_conflict(
    pair_states_prev: Tuple[AgentState, AgentState],
    pair_states_now: Tuple[AgentState, AgentState],
    frozen_agent: int,
    tce_anchor: float,
    cfg: MetricsConfig = MetricsConfig(),
) -> float:
    """Conflict at the current step had agent ``frozen_agent`` (0 or 1) kept its previous velocity.

    Positions are the actual current ones; only the frozen agent's velocity
    is replaced by its velocity at the previous step.
    """
    if frozen_agent not in (0, 1):
        raise PreconditionError(f"frozen_agent must be 0 or 1, got {frozen_agent}")
    a, b = pair_states_now
    va = np.asarray(pair_states_prev[0].velocity if frozen_agent == 0 else a.velocity)
    vb = np.asarray(pair_states_prev[1].velocity if frozen_agent == 1 else b.velocity)
    r = np.subtract(b.position, a.position)
    p = pdce_array(r, vb - va, cfg.epsilon_speed)
    cp = conflict_potential_array(p, cfg.combined_radius(a.radius, b.radius))
    return float(cp * normalization_array(a.t - tce_anchor, cfg.window))


def conflict_contribution(actual_c: float, counterfactual_c: float) -> float:
    return actual_c - counterfactual_c


def split_signed(cc):
    """Escalating and diminishing parts of a signed contribution."""
    plus = np.maximum(cc, 0.0)
    minus = -np.minimum(cc, 0.0)
    if np.ndim(cc) == 0:
        return float(plus), float(minus)
    return plus, minus


def time_contributions(dC, sum_cc_plus, sum_cc_minus):
    """Escalating and diminishing parts of the conflict change not explained by the agents.

    The residual ``dC - (sum_cc_plus - sum_cc_minus)`` is what remains of the
    change once both agents' net contributions are removed; it is split by
    sign like an agent contribution.
    """
    return split_signed(dC - (sum_cc_plus - sum_cc_minus))


def total_conflict(samples: Sequence[ContributionSample], dt: float) -> float:
    return float(sum((s.cc1_plus + s.cc2_plus) + s.cc_time_plus for s in samples) * dt)


def _shares(integrals: Dict[str, float], c_total: float):
    if not c_total > DEGENERACY_THRESHOLD:
        return None, 0.0
    raw = {k: v / c_total for k, v in integrals.items()}
    total = (raw["agent1"] + raw["agent2"]) + raw["time"]
    shares = {k: min(max(v / total, 0.0), 1.0) for k, v in raw.items()}
    return shares, total - 1.0


def responsibility_shares(samples: Sequence[ContributionSample], c_total: float, dt: float):
    """Diminishing integrals over ``c_total``, renormalized to sum to one.

    Returns ``None`` for a degenerate (conflict-free) interaction.
    """
    integrals = {
        "agent1": sum(s.cc1_minus for s in samples) * dt,
        "agent2": sum(s.cc2_minus for s in samples) * dt,
        "time": sum(s.cc_time_minus for s in samples) * dt,
    }
    return _shares(integrals, c_total)[0]


def engagement_shares(samples: Sequence[ContributionSample], c_total: float, dt: float):
    integrals = {
        "agent1": sum(s.cc1_plus for s in samples) * dt,
        "agent2": sum(s.cc2_plus for s in samples) * dt,
        "time": sum(s.cc_time_plus for s in samples) * dt,
    }
    return _shares(integrals, c_total)[0]


# -- vectorised pipeline ----------------------------------------------------------


@dataclass
class ContributionArrays:
    """Column form of a contribution series (rates per second)."""

    t: np.ndarray
    c: np.ndarray
    cc1: np.ndarray
    cc2: np.ndarray
    time_plus: np.ndarray
    time_minus: np.ndarray
    dC: np.ndarray
    dt: float

    def samples(self) -> List[ContributionSample]:
        p1, m1 = split_signed(self.cc1)
        p2, m2 = split_signed(self.cc2)
        return [
            ContributionSample(*map(float, row))
            for row in zip(self.t, self.cc1, self.cc2, p1, m1, p2, m2,
                           self.time_plus, self.time_minus, self.dC)
        ]

    def integrals(self):
        p1, m1 = split_signed(self.cc1)
        p2, m2 = split_signed(self.cc2)
        dt = self.dt
        escalating = {"agent1": p1.sum() * dt, "agent2": p2.sum() * dt, "time": self.time_plus.sum() * dt}
        diminishing = {"agent1": m1.sum() * dt, "agent2": m2.sum() * dt, "time": self.time_minus.sum() * dt}
        return escalating, diminishing


def contribution_arrays(pair: PairArrays, anchor_index: int, cfg: MetricsConfig) -> ContributionArrays:
    """Per-step conflict contributions over the window ending at ``anchor_index``.

    Conflict is taken as zero before the first and after the last sample of
    the window, so the series closes with a step that returns the conflict
    remaining at the anchor to zero. Agent contributions of the first sample
    (no previous velocity in the window) and of the closing step are zero.
    """
    lo, hi = window_indices(pair, anchor_index, cfg.window)
    radius = cfg.combined_radius(pair.radius_a, pair.radius_b)
    eps = cfg.epsilon_speed
    pa, va = pair.pos_a[lo:hi], pair.vel_a[lo:hi]
    pb, vb = pair.pos_b[lo:hi], pair.vel_b[lo:hi]
    r = pb - pa
    n = normalization_array((np.arange(lo, hi) - anchor_index) * pair.dt, cfg.window)
    c = conflict_potential_array(pdce_array(r, vb - va, eps), radius) * n

    cc1 = np.zeros(hi - lo + 1)
    cc2 = np.zeros(hi - lo + 1)
    if hi - lo > 1:
        # counterfactuals: one agent keeps its velocity from the previous step
        c1_frozen = conflict_potential_array(pdce_array(r[1:], vb[1:] - va[:-1], eps), radius) * n[1:]
        c2_frozen = conflict_potential_array(pdce_array(r[1:], vb[:-1] - va[1:], eps), radius) * n[1:]
        cc1[1:-1] = c[1:] - c1_frozen
        cc2[1:-1] = c[1:] - c2_frozen

    c_ext = np.concatenate(([0.0], c, [0.0]))
    dC = np.diff(c_ext)
    time_plus, time_minus = time_contributions(dC, *_net(cc1, cc2))
    times = np.concatenate((pair.times[lo:hi], [pair.times[hi - 1] + pair.dt]))
    dt = pair.dt
    return ContributionArrays(times, np.append(c, 0.0), cc1 / dt, cc2 / dt,
                              time_plus / dt, time_minus / dt, dC / dt, dt)


def _net(cc1, cc2):
    p1, m1 = split_signed(cc1)
    p2, m2 = split_signed(cc2)
    return p1 + p2, m1 + m2


def report_from_contributions(contrib: ContributionArrays, agent_ids, tce_anchor,
                              segment=None) -> InteractionReport:
    escalating, diminishing = contrib.integrals()
    c_total = float((escalating["agent1"] + escalating["agent2"]) + escalating["time"])
    r_shares, residual = _shares(diminishing, c_total)
    e_shares, _ = _shares(escalating, c_total)
    dim_total = float((diminishing["agent1"] + diminishing["agent2"]) + diminishing["time"])
    if r_shares is None:
        return InteractionReport(tuple(agent_ids), float(tce_anchor), c_total, {}, {},
                                 DEGENERATE, segment, 0.0, dim_total)
    return InteractionReport(tuple(agent_ids), float(tce_anchor), c_total, r_shares, e_shares,
                             RESOLVED, segment, float(residual), dim_total)


# -- segmentation and evaluation -------------------------------------------------


def _runs(mask: np.ndarray):
    """Inclusive ``(start, end)`` index pairs of the True runs in ``mask``."""
    padded = np.concatenate(([False], mask, [False])).astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    return [(int(s), int(e) - 1) for s, e in zip(edges[::2], edges[1::2])]


def segment_pair(pair: PairArrays, cfg: MetricsConfig, agent_ids=("a", "b")):
    """Interaction segments of one pair as ``(segment, anchor_index)`` tuples."""
    cp = pair.conflict_potential(cfg)
    dist = pair.distance()
    runs = _runs(cp > 0)
    if not runs:
        return []
    min_gap = cfg.window / 4
    merged = [list(runs[0])]
    for s, e in runs[1:]:
        if (s - merged[-1][1] - 1) * pair.dt < min_gap - 1e-9:
            merged[-1][1] = e
        else:
            merged.append([s, e])
    out = []
    for i, (s, e) in enumerate(merged):
        limit = merged[i + 1][0] - 1 if i + 1 < len(merged) else len(pair) - 1
        # follow the approach until the distance stops shrinking
        while e < limit and dist[e + 1] <= dist[e]:
            e += 1
        anchor = s + int(np.argmin(dist[s:e + 1]))
        seg = InteractionSegment(
            tuple(agent_ids), float(pair.times[s]), float(pair.times[e]),
            float(pair.times[anchor]), float(dist[anchor]),
        )
        out.append((seg, anchor))
    return out


def segment_interactions(traj_a: Trajectory, traj_b: Trajectory, cfg: MetricsConfig = MetricsConfig()):
    pair = PairArrays.from_trajectories(traj_a, traj_b)
    return [seg for seg, _ in segment_pair(pair, cfg, (traj_a.agent_id, traj_b.agent_id))]


def evaluate_interaction(traj_a: Trajectory, traj_b: Trajectory, segment: InteractionSegment,
                         cfg: MetricsConfig = MetricsConfig()) -> InteractionReport:
    pair = PairArrays.from_trajectories(traj_a, traj_b)
    anchor = int(round((segment.tce_anchor - pair.times[0]) / pair.dt))
    if not 0 <= anchor < len(pair):
        raise PreconditionError("segment anchor lies outside the trajectories' common time range")
    contrib = contribution_arrays(pair, anchor, cfg)
    return report_from_contributions(contrib, (traj_a.agent_id, traj_b.agent_id),
                                     pair.times[anchor], segment)


def evaluate_pair(traj_a: Trajectory, traj_b: Trajectory, cfg: MetricsConfig = MetricsConfig()):
    """Reports for every interaction segment of two trajectories."""
    try:
        pair = PairArrays.from_trajectories(traj_a, traj_b)
    except EmptyInteractionError:
        return []
    reports = []
    for seg, anchor in segment_pair(pair, cfg, (traj_a.agent_id, traj_b.agent_id)):
        contrib = contribution_arrays(pair, anchor, cfg)
        reports.append(report_from_contributions(contrib, seg.agent_ids, seg.tce_anchor, seg))
    return reports


def split_at_jumps(traj: Trajectory, tol: float = JUMP_TOLERANCE) -> List[Trajectory]:
    """Split a trajectory where the position jumps (e.g. an agent is re-spawned).

    A jump is a step whose displacement differs from the displacement
    predicted by the neighbouring velocities by more than ``tol`` metres.
    """
    if len(traj) < 2:
        return [traj]
    step = np.diff(traj.positions, axis=0)
    predicted = 0.5 * (traj.velocities[:-1] + traj.velocities[1:]) * traj.dt
    err = np.hypot(*(step - predicted).T)
    cuts = np.flatnonzero(err > tol) + 1
    if len(cuts) == 0:
        return [traj]
    bounds = [0, *cuts.tolist(), len(traj)]
    return [traj.slice(s, e) for s, e in zip(bounds[:-1], bounds[1:])]


def evaluate_all(trajectories: Mapping[str, Trajectory], cfg: MetricsConfig = MetricsConfig(),
                 pairs: Optional[Iterable[Tuple[str, str]]] = None) -> List[InteractionReport]:
    """Evaluate every agent pair (or the given ``pairs``) independently.

    Trajectories are split at position jumps first; each continuous piece is
    paired with the overlapping pieces of the other agent.
    """
    ids = list(trajectories)
    if pairs is None:
        pairs = [(a, b) for i, a in enumerate(ids) for b in ids[i + 1:]]
    pieces = {aid: split_at_jumps(trajectories[aid]) for aid in ids}
    reports = []
    for a, b in pairs:
        for ta in pieces[a]:
            for tb in pieces[b]:
                if ta.t0 > tb.t_end + 1e-9 or tb.t0 > ta.t_end + 1e-9:
                    continue
                reports.extend(evaluate_pair(ta, tb, cfg))
    return reports


# -- aggregation --------------------------------------------------------------------


def _weighted_quantile(values, weights, q):
    order = np.argsort(values, kind="stable")
    v, w = values[order], weights[order]
    cdf = (np.cumsum(w) - 0.5 * w) / w.sum()
    return float(np.interp(q, cdf, v))


def make_distribution(source: str, values, weights=None) -> ShareDistribution:
    values = np.asarray(values, dtype=float)
    if len(values) == 0:
        raise EmptyDistributionError(f"no values for source {source!r}")
    if weights is None:
        q1, med, q3 = np.percentile(values, [25, 50, 75])
    else:
        weights = np.asarray(weights, dtype=float)
        q1, med, q3 = (_weighted_quantile(values, weights, q) for q in (0.25, 0.5, 0.75))
    return ShareDistribution(source, values, float(med), (float(q1), float(q3)), len(values), weights)


def reports_involving_role(reports: Sequence[InteractionReport], role_map: Mapping[str, str],
                           role: str = "robot") -> List[InteractionReport]:
    """Reports in which at least one agent has ``role`` (agents missing from ``role_map`` are humans)."""
    return [rep for rep in reports if any(role_map.get(a, "human") == role for a in rep.agent_ids)]


def aggregate_distributions(reports: Sequence[InteractionReport], role_map: Mapping[str, str],
                            weighted: bool = False) -> Dict[str, Dict[str, ShareDistribution]]:
    """Group R and E shares by the role of their source.

    ``role_map`` maps agent ids to ``"robot"`` or ``"human"``; agents missing
    from it count as humans. Returns ``{"R": {...}, "E": {...}}`` keyed by
    ``robot``, ``humans`` and ``time``. Degenerate reports are skipped. With
    ``weighted`` the statistics weight each interaction by its total conflict.
    """
    resolved = [rep for rep in reports if rep.resolved]
    if not resolved:
        raise EmptyDistributionError("no resolved interactions to aggregate")
    out = {}
    for metric in ("R", "E"):
        values: Dict[str, list] = {"robot": [], "humans": [], "time": []}
        weights: Dict[str, list] = {"robot": [], "humans": [], "time": []}
        for rep in resolved:
            shares = rep.r_shares if metric == "R" else rep.e_shares
            for key, aid in zip(("agent1", "agent2"), rep.agent_ids):
                source = "robot" if role_map.get(aid, "human") == "robot" else "humans"
                values[source].append(shares[key])
                weights[source].append(rep.c_total)
            values["time"].append(shares["time"])
            weights["time"].append(rep.c_total)
        out[metric] = {
            src: make_distribution(src, vals, weights[src] if weighted else None)
            for src, vals in values.items() if vals
        }
    return out
