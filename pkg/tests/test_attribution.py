import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conflict_metrics.attribution import (
    DEGENERATE,
    RESOLVED,
    InteractionReport,
    aggregate_distributions,
    conflict_contribution,
    contribution_arrays,
    counterfactual_conflict,
    engagement_shares,
    evaluate_all,
    evaluate_interaction,
    evaluate_pair,
    reports_involving_role,
    responsibility_shares,
    segment_interactions,
    split_at_jumps,
    split_signed,
    time_contributions,
    total_conflict,
)
from conflict_metrics.errors import EmptyDistributionError, PreconditionError
from conflict_metrics.kinematics import AgentState, MetricsConfig, PairArrays, Trajectory

import oracles


def straight(agent_id, start, velocity, n=301, dt=0.1, t0=0.0, radius=0.5):
    k = np.arange(n)[:, None]
    pos = np.asarray(start, float) + k * dt * np.asarray(velocity, float)
    return Trajectory(agent_id, t0, dt, pos, np.tile(velocity, (n, 1)), radius)


def integrate(velocities, start, dt=0.1, agent_id="x", radius=0.5):
    velocities = np.asarray(velocities, float)
    pos = np.asarray(start, float) + np.vstack(([0, 0], np.cumsum(velocities[:-1] * dt, axis=0)))
    return Trajectory(agent_id, 0.0, dt, pos, velocities, radius)


def swerving(seed, n=300):
    """A smooth random walker heading roughly along +x."""
    rng = np.random.default_rng(seed)
    heading = np.cumsum(rng.normal(0, 0.02, n))
    speed = 1.0 + 0.2 * np.sin(np.cumsum(rng.normal(0, 0.1, n)))
    vel = np.stack((speed * np.cos(heading), speed * np.sin(heading)), axis=1)
    return vel


# -- scalar building blocks ------------------------------------------------------------


def test_counterfactual_equals_actual_for_ballistic_agents():
    prev = (AgentState(0.0, (0, 0), (1, 0)), AgentState(0.0, (10, 0.3), (-1, 0)))
    now = (AgentState(0.1, (0.1, 0), (1, 0)), AgentState(0.1, (9.9, 0.3), (-1, 0)))
    actual = counterfactual_conflict(now, now, 0, 5.0)
    for frozen in (0, 1):
        assert counterfactual_conflict(prev, now, frozen, 5.0) == actual


def test_counterfactual_after_turning_away():
    # agent 1 turns 20 degrees away between the two steps; agent 2 holds course
    turned = (math.cos(math.radians(20)), math.sin(math.radians(20)))
    prev = (AgentState(0.0, (0, 0), (1, 0)), AgentState(0.0, (10, 0), (-1, 0)))
    now = (AgentState(0.1, (0.1, 0), turned), AgentState(0.1, (9.9, 0), (-1, 0)))
    actual = counterfactual_conflict(now, now, 0, 5.0)
    frozen1 = counterfactual_conflict(prev, now, 0, 5.0)
    frozen2 = counterfactual_conflict(prev, now, 1, 5.0)
    assert frozen1 > actual
    assert frozen2 == actual
    # frozen oracle values: head-on course keeps cp = 1, the turn leaves pDCE = |r x v| / |v|
    n = 1 + (0.1 - 5.0) / 12.0
    assert frozen1 == pytest.approx(n, abs=1e-12)
    r, v = (9.8, 0.0), (-1 - turned[0], -turned[1])
    assert actual == pytest.approx(oracles.conflict(r, v, 1.0, 0.1 - 5.0, 12.0), abs=1e-6)


def test_counterfactual_rejects_bad_index():
    s = (AgentState(0, (0, 0), (1, 0)), AgentState(0, (1, 1), (0, 0)))
    with pytest.raises(PreconditionError):
        counterfactual_conflict(s, s, 2, 1.0)


@pytest.mark.parametrize("actual, cf, expected", [(0.8, 0.8, 0.0), (0.5, 0.9, -0.4), (0.9, 0.5, 0.4)])
def test_conflict_contribution(actual, cf, expected):
    assert conflict_contribution(actual, cf) == pytest.approx(expected)


@pytest.mark.parametrize("cc, expected", [(-0.4, (0.0, 0.4)), (0.4, (0.4, 0.0)), (0.0, (0.0, 0.0))])
def test_split_signed(cc, expected):
    assert split_signed(cc) == expected


@given(st.floats(-10, 10))
def test_split_signed_reconstructs(cc):
    plus, minus = split_signed(cc)
    assert plus >= 0 and minus >= 0 and plus * minus == 0 and plus - minus == cc


@pytest.mark.parametrize("dC, plus, minus, expected", [
    (0.02, 0.0, 0.0, (0.02, 0.0)),   # ballistic closing: all of the change is time
    (0.0, 0.0, 0.0, (0.0, 0.0)),
    (-0.05, 0.0, 0.0, (0.0, 0.05)),  # residual decay with no agent action
    (0.0, 0.0, 0.03, (0.03, 0.0)),   # agents diminished while conflict held steady
    (-0.05, 0.0, 0.03, (0.0, 0.02)),
])
def test_time_contributions(dC, plus, minus, expected):
    assert time_contributions(dC, plus, minus) == pytest.approx(expected)


def test_total_conflict_of_zero_samples():
    a = straight("a", (0, 0), (1, 0))
    b = straight("b", (0, 5), (1, 0))
    contrib = contribution_arrays(PairArrays.from_trajectories(a, b), 200, MetricsConfig())
    assert total_conflict(contrib.samples(), 0.1) == 0.0


def test_head_on_ballistic_total_is_the_peak():
    # analytic integral of the ramp's derivative: the peak conflict, 1.0
    a = straight("a", (0, 0.0), (1, 0))
    b = straight("b", (30, 0.0), (-1, 0))
    contrib = contribution_arrays(PairArrays.from_trajectories(a, b), 150, MetricsConfig())
    samples = contrib.samples()
    assert total_conflict(samples, 0.1) == pytest.approx(1.0, abs=1e-9)
    assert responsibility_shares(samples, 1.0, 0.1) == pytest.approx({"agent1": 0, "agent2": 0, "time": 1})
    assert engagement_shares(samples, 1.0, 0.1) == pytest.approx({"agent1": 0, "agent2": 0, "time": 1})
    for s in samples[1:-1]:
        assert s.cc_time_plus == pytest.approx(s.dC) and s.cc_time_minus == 0.0
    assert responsibility_shares(samples, 0.0, 0.1) is None


# -- full evaluation against the loop oracle ----------------------------------------------


@pytest.mark.parametrize("seed", range(6))
def test_evaluation_matches_loop_oracle(seed):
    va = swerving(seed)
    vb = -swerving(seed + 100)
    a = integrate(va, (0, 0), agent_id="a")
    b = integrate(vb, (28, 0.5), agent_id="b")
    pair = PairArrays.from_trajectories(a, b)
    anchor = int(np.argmin(pair.distance()))
    seg_t = pair.times[anchor]
    from conflict_metrics.attribution import InteractionSegment

    seg = InteractionSegment(("a", "b"), 0.0, seg_t, seg_t, float(pair.distance()[anchor]))
    rep = evaluate_interaction(a, b, seg)
    c_total, d_total, r_raw, e_raw = oracles.attribution(
        a.positions, a.velocities, b.positions, b.velocities, anchor, 0.1)
    if c_total < 1e-6:
        assert rep.status == DEGENERATE
        return
    assert rep.c_total == pytest.approx(c_total, abs=1e-5)
    for key in ("agent1", "agent2", "time"):
        assert rep.r_shares[key] == pytest.approx(r_raw[key], abs=1e-5)
        assert rep.e_shares[key] == pytest.approx(e_raw[key], abs=1e-5)


@pytest.mark.parametrize("seed", range(1, 5))
def test_conservation_of_conflict(seed):
    a = integrate(swerving(seed), (0, 0), agent_id="a")
    b = integrate(-swerving(seed + 100), (28, 0.5), agent_id="b")
    reports = [r for r in evaluate_pair(a, b) if r.resolved]
    assert reports
    for rep in reports:
        assert abs(rep.c_total - rep.diminishing_total) <= 2 * 0.1
        assert rep.residual == pytest.approx(rep.diminishing_total / rep.c_total - 1.0)


def test_ballistic_agent_has_no_shares():
    a = straight("a", (0, 0), (1, 0))
    b = integrate(-swerving(11), (28, 0.2), agent_id="b")
    reports = [r for r in evaluate_pair(a, b) if r.resolved]
    assert reports
    for rep in reports:
        assert rep.r("a") == 0.0 and rep.e("a") == 0.0


def test_report_accessors():
    rep = InteractionReport(("r", "h"), 1.0, 1.0, {"agent1": 0.2, "agent2": 0.3, "time": 0.5},
                            {"agent1": 0.0, "agent2": 0.0, "time": 1.0}, RESOLVED)
    assert rep.r("r") == 0.2 and rep.r("h") == 0.3 and rep.r("time") == 0.5
    with pytest.raises(KeyError):
        rep.r("nobody")


# -- segmentation -----------------------------------------------------------------------------


def test_single_head_on_pass_gives_one_segment():
    a = straight("a", (0, 0), (1, 0))
    b = straight("b", (30, 0.2), (-1, 0))
    (seg,) = segment_interactions(a, b)
    assert seg.tce_anchor == pytest.approx(15.0)
    assert seg.start_t <= seg.tce_anchor <= seg.end_t
    assert seg.min_distance == pytest.approx(0.2, abs=1e-9)


def test_parallel_walkers_give_no_segment():
    a = straight("a", (0, 0), (1, 0))
    b = straight("b", (0, 5), (1, 0))
    assert segment_interactions(a, b) == []
    assert evaluate_pair(a, b) == []


def test_two_approaches_give_two_segments():
    # b walks past a standing agent, turns round and walks past again
    n = 401
    t = np.arange(n) * 0.1
    vx = np.where(t < 20, 1.0, -1.0)
    b = integrate(np.stack((vx, np.zeros(n)), axis=1), (-10, 0.3), agent_id="b")
    a = Trajectory("a", 0.0, 0.1, np.zeros((n, 2)), np.zeros((n, 2)))
    segs = segment_interactions(a, b)
    assert [round(s.tce_anchor, 6) for s in segs] == [10.0, 30.0]
    reports = evaluate_pair(a, b)
    assert len(reports) == 2 and all(r.resolved for r in reports)


def test_gaps_shorter_than_a_quarter_window_are_merged():
    n = 301
    t = np.arange(n) * 0.1
    # pass, turn after 1 s, pass again: the conflict-free gap is only 2 s
    vx = np.where(t < 11, 1.0, -1.0)
    b = integrate(np.stack((vx, np.zeros(n)), axis=1), (-10, 0.3), agent_id="b")
    a = Trajectory("a", 0.0, 0.1, np.zeros((n, 2)), np.zeros((n, 2)))
    assert len(segment_interactions(a, b)) == 1


def test_split_at_jumps():
    a = straight("a", (0, 0), (1, 0), n=100)
    pos = a.positions.copy()
    pos[60:] -= (20, 0)  # teleport back
    jumped = Trajectory("a", 0.0, 0.1, pos, a.velocities)
    pieces = split_at_jumps(jumped)
    assert [len(p) for p in pieces] == [60, 40]
    assert pieces[1].t0 == pytest.approx(6.0)
    assert len(split_at_jumps(a)) == 1


def test_evaluate_all_pairs_every_agent():
    trajs = {
        "a": straight("a", (0, 0), (1, 0)),
        "b": straight("b", (30, 0.2), (-1, 0)),
        "c": straight("c", (15, -15), (0, 1)),
    }
    reports = evaluate_all(trajs)
    pairs = sorted(r.agent_ids for r in reports)
    assert ("a", "b") in pairs
    assert all(r.resolved for r in reports)
    only = evaluate_all(trajs, pairs=[("a", "b")])
    assert [r.agent_ids for r in only] == [("a", "b")]


# -- aggregation --------------------------------------------------------------------------


def report(ids, r, e, c_total=1.0):
    keys = ("agent1", "agent2", "time")
    return InteractionReport(tuple(ids), 0.0, c_total, dict(zip(keys, r)), dict(zip(keys, e)), RESOLVED)


def test_singleton_distribution():
    dists = aggregate_distributions([report(("robot", "h1"), (0.4, 0.6, 0.0), (0, 0, 1))],
                                    {"robot": "robot"})
    r = dists["R"]
    assert r["robot"].median == 0.4 and r["humans"].median == 0.6 and r["time"].median == 0.0
    assert r["robot"].n == 1 and r["robot"].quartiles == (0.4, 0.4)


def test_distribution_statistics_and_weighting():
    reps = [report(("robot", f"h{i}"), (x, 1 - x, 0), (0, 0, 1), c_total=w)
            for i, (x, w) in enumerate([(0.1, 1.0), (0.2, 1.0), (0.9, 10.0)])]
    plain = aggregate_distributions(reps, {"robot": "robot"})
    assert plain["R"]["robot"].median == pytest.approx(0.2)
    assert plain["R"]["robot"].quartiles == pytest.approx((0.15, 0.55))
    weighted = aggregate_distributions(reps, {"robot": "robot"}, weighted=True)
    assert weighted["R"]["robot"].median > 0.5


def test_human_pairs_pool_both_agents():
    dists = aggregate_distributions([report(("h1", "h2"), (0.3, 0.5, 0.2), (0, 0, 1))], {})
    assert dists["R"]["humans"].n == 2 and "robot" not in dists["R"]


def test_aggregation_rejects_empty_input():
    with pytest.raises(EmptyDistributionError):
        aggregate_distributions([], {})
    degenerate = InteractionReport(("a", "b"), 0.0, 0.0, {}, {}, DEGENERATE)
    with pytest.raises(EmptyDistributionError):
        aggregate_distributions([degenerate], {})


def test_reports_involving_role():
    reps = [report(("robot", "h1"), (0, 1, 0), (0, 0, 1)), report(("h1", "h2"), (0, 1, 0), (0, 0, 1))]
    assert reports_involving_role(reps, {"robot": "robot"}) == reps[:1]


def test_aggregation_is_order_independent():
    rng = np.random.default_rng(0)
    reps = []
    for i in range(30):
        r = rng.dirichlet((1, 1, 1))
        reps.append(report(("robot", f"h{i}"), r, r[::-1], c_total=rng.uniform(0.1, 1)))
    a = aggregate_distributions(reps, {"robot": "robot"}, weighted=True)
    b = aggregate_distributions(reps[::-1], {"robot": "robot"}, weighted=True)
    for m in ("R", "E"):
        for src in a[m]:
            assert a[m][src].median == b[m][src].median
            assert a[m][src].quartiles == b[m][src].quartiles
