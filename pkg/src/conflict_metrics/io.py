"""File formats: trajectory CSV, JSON reports and YAML scenario configs.

Trajectory files are plain CSV with the header ``t,agent_id,x,y[,vx,vy][,radius]``.
Rows are grouped by agent with increasing ``t`` and a uniform step per
agent. Without ``vx``/``vy`` velocities come from finite differences; without
``radius`` every agent gets 0.5 m. Floats are written with ``repr`` so a dump
reads back bit-identically.

Reports are JSON documents with a ``schema_version`` field. Floats are
rounded to 9 significant digits and keys keep a fixed order, so identical
inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import asdict
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, TextIO, Union

import numpy as np
import yaml

from .attribution import InteractionReport, ShareDistribution
from .errors import ConfigError, TrajectoryFormatError
from .kinematics import DEFAULT_RADIUS, AgentState, MetricsConfig, Trajectory
from .policies import ChaserParams, DwaParams, SocialForceParams
from .sim import AgentSpec, GoalSpec, PolicySpec, ScenarioConfig

SCHEMA_VERSION = 1
REQUIRED_COLUMNS = ("t", "agent_id", "x", "y")
OPTIONAL_COLUMNS = ("vx", "vy", "radius")
DT_TOLERANCE = 1e-6

PathLike = Union[str, Path]


# -- trajectories ----------------------------------------------------------------


def _float(text: str, column: str, line: int) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise TrajectoryFormatError(f"column {column!r}: not a number: {text!r}", line)
    if not math.isfinite(value):
        raise TrajectoryFormatError(f"column {column!r}: non-finite value {text!r}", line)
    return value


def read_trajectories(source: Union[PathLike, TextIO]) -> Dict[str, Trajectory]:
    """Parse a trajectory CSV into ``{agent_id: Trajectory}`` (file order of first appearance)."""
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return read_trajectories(fh)
    reader = csv.reader(source)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise TrajectoryFormatError("empty file", 1)
    missing = [c for c in REQUIRED_COLUMNS if c not in header]
    if missing:
        raise TrajectoryFormatError(f"missing required columns: {', '.join(missing)}", 1)
    if ("vx" in header) != ("vy" in header):
        raise TrajectoryFormatError("columns vx and vy must appear together", 1)
    unknown = [h for h in header if h not in REQUIRED_COLUMNS + OPTIONAL_COLUMNS]
    if unknown:
        warnings.warn(f"ignoring unknown trajectory columns: {', '.join(unknown)}", stacklevel=2)
    col = {name: header.index(name) for name in REQUIRED_COLUMNS + OPTIONAL_COLUMNS if name in header}
    has_vel = "vx" in col
    has_radius = "radius" in col

    rows: Dict[str, list] = {}
    for line, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise TrajectoryFormatError(f"expected {len(header)} fields, got {len(row)}", line)
        aid = row[col["agent_id"]].strip()
        if not aid:
            raise TrajectoryFormatError("empty agent_id", line)
        values = [_float(row[col[c]], c, line) for c in ("t", "x", "y")]
        values += [_float(row[col[c]], c, line) for c in ("vx", "vy")] if has_vel else [0.0, 0.0]
        values.append(_float(row[col["radius"]], "radius", line) if has_radius else DEFAULT_RADIUS)
        if values[-1] <= 0:
            raise TrajectoryFormatError(f"radius must be positive, got {values[-1]}", line)
        rows.setdefault(aid, []).append((line, values))

    trajectories = {}
    for aid, entries in rows.items():
        lines = [ln for ln, _ in entries]
        data = np.array([v for _, v in entries])
        t = data[:, 0]
        if len(t) < 2:
            raise TrajectoryFormatError(f"agent {aid!r} has a single sample", lines[0])
        steps = np.diff(t)
        bad = np.flatnonzero(steps <= 0)
        if len(bad):
            raise TrajectoryFormatError(f"agent {aid!r}: time does not increase", lines[bad[0] + 1])
        # the first step sets the grid; the first row off it is reported
        bad = np.flatnonzero(np.abs(steps - steps[0]) > DT_TOLERANCE * max(steps[0], 1.0))
        if len(bad):
            raise TrajectoryFormatError(f"agent {aid!r}: non-uniform time step", lines[bad[0] + 1])
        radii = data[:, 5]
        if np.any(radii != radii[0]):
            idx = int(np.flatnonzero(radii != radii[0])[0])
            raise TrajectoryFormatError(f"agent {aid!r}: radius changes along the trajectory", lines[idx])
        dt = (t[-1] - t[0]) / (len(t) - 1)
        trajectories[aid] = Trajectory(
            aid, float(t[0]), float(dt), data[:, 1:3],
            data[:, 3:5] if has_vel else None, float(radii[0]),
        )
    return trajectories


def write_trajectories(trajectories: Mapping[str, Trajectory], target: Union[PathLike, TextIO]) -> None:
    """Write ``trajectories`` sorted by (agent_id, t) with velocity and radius columns."""
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="") as fh:
            write_trajectories(trajectories, fh)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(REQUIRED_COLUMNS + OPTIONAL_COLUMNS)
    for aid in sorted(trajectories):
        traj = trajectories[aid]
        for t, p, v in zip(traj.times, traj.positions, traj.velocities):
            writer.writerow([repr(float(t)), aid, repr(float(p[0])), repr(float(p[1])),
                             repr(float(v[0])), repr(float(v[1])), repr(float(traj.radius))])


# -- reports ---------------------------------------------------------------------


def fixed(x: Optional[float]) -> Optional[float]:
    """Round to 9 significant digits."""
    if x is None:
        return None
    return float(f"{float(x):.9g}")


def _share_dict(shares: Mapping[str, float], ids: Sequence[str]) -> Dict[str, float]:
    return {ids[0]: fixed(shares["agent1"]), ids[1]: fixed(shares["agent2"]), "time": fixed(shares["time"])}


def _percent(shares: Dict[str, float]) -> Dict[str, int]:
    return {k: int(round(100 * v)) for k, v in shares.items()}


def report_record(rep: InteractionReport, seed: Optional[int] = None) -> dict:
    ids = list(rep.agent_ids)
    record = {"pair": ids}
    if seed is not None:
        record["seed"] = int(seed)
    seg = rep.segment
    record["segment"] = None if seg is None else {
        "start_t": fixed(seg.start_t), "end_t": fixed(seg.end_t), "min_distance": fixed(seg.min_distance),
    }
    record["tce_anchor"] = fixed(rep.tce_anchor)
    record["c_total"] = fixed(rep.c_total)
    record["status"] = rep.status
    record["residual"] = fixed(rep.residual)
    if rep.resolved:
        r = _share_dict(rep.r_shares, ids)
        e = _share_dict(rep.e_shares, ids)
        record.update(r_shares=r, e_shares=e, r_percent=_percent(r), e_percent=_percent(e))
    else:
        record.update(r_shares=None, e_shares=None, r_percent=None, e_percent=None)
    return record


def distribution_record(dists: Optional[Mapping[str, Mapping[str, ShareDistribution]]]) -> Optional[dict]:
    if dists is None:
        return None
    return {
        metric: {
            src: {"median": fixed(d.median), "q1": fixed(d.quartiles[0]), "q3": fixed(d.quartiles[1]), "n": d.n}
            for src, d in by_source.items()
        }
        for metric, by_source in dists.items()
    }


def metrics_record(cfg: MetricsConfig) -> dict:
    return {
        "window": fixed(cfg.window),
        "combined_radius_override": fixed(cfg.combined_radius_override),
        "epsilon_speed": fixed(cfg.epsilon_speed),
    }


def event_record(event: Mapping, seed: Optional[int] = None) -> dict:
    out = {"t": fixed(event["t"]), "kind": event["kind"], "agents": list(event["agents"])}
    if seed is not None:
        out["seed"] = int(seed)
    return out


def build_report(source: str, metrics: MetricsConfig, records: List[dict],
                 distributions: Optional[dict] = None, events: Iterable[dict] = (),
                 **config) -> dict:
    """Assemble a report document; ``config`` entries are echoed under ``config``."""
    echo = {"source": source, "metrics": metrics_record(metrics)}
    echo.update(config)
    return {
        "schema_version": SCHEMA_VERSION,
        "config": echo,
        "interactions": records,
        "distributions": distributions,
        "events": list(events),
    }


def dumps_report(doc: Mapping) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_report(doc: Mapping, target: Union[PathLike, TextIO]) -> None:
    text = dumps_report(doc)
    if isinstance(target, (str, Path)):
        Path(target).write_text(text)
    else:
        target.write(text)


def read_report(path: PathLike) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not a JSON report ({exc})", ["report"])
    if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"{path}: unsupported or missing schema_version", ["schema_version"])
    return doc


# -- scenario configs ------------------------------------------------------------


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    agents = []
    for a in cfg.agents:
        policy = {"type": a.policy.type}
        for key in ("social_force", "dwa", "chaser"):
            params = getattr(a.policy, key)
            if params is not None:
                policy[key] = asdict(params)
        if a.policy.target is not None:
            policy["target"] = a.policy.target
        agents.append({
            "id": a.id,
            "position": list(a.state.position),
            "velocity": list(a.state.velocity),
            "radius": a.state.radius,
            "policy": policy,
            "goal": {"type": a.goal.type, "position": list(a.goal.position)},
        })
    return {
        "name": cfg.name,
        "duration": cfg.duration,
        "dt": cfg.dt,
        "seed": int(cfg.seed),
        "arena": None if cfg.arena is None else list(cfg.arena),
        "metrics": asdict(cfg.metrics),
        "role_map": dict(cfg.role_map),
        "agents": agents,
    }


def _policy_from_dict(d: Mapping, where: str) -> PolicySpec:
    d = dict(d)
    try:
        kind = d.pop("type", "ballistic")
        sf = d.pop("social_force", None)
        dwa = d.pop("dwa", None)
        chaser = d.pop("chaser", None)
        target = d.pop("target", None)
        if d:
            raise ConfigError(f"{where}: unknown policy fields {sorted(d)}", [where])
        return PolicySpec(
            kind,
            SocialForceParams(**sf) if sf is not None else None,
            DwaParams(**dwa) if dwa is not None else None,
            ChaserParams(**chaser) if chaser is not None else None,
            target,
        )
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}", [where])


def scenario_from_dict(d: Mapping) -> ScenarioConfig:
    try:
        agents = []
        for i, a in enumerate(d["agents"]):
            where = f"agents.{a.get('id', i)}"
            state = AgentState(0.0, a["position"], a.get("velocity", (0.0, 0.0)),
                               a.get("radius", DEFAULT_RADIUS))
            goal = a.get("goal", {})
            agents.append(AgentSpec(
                str(a["id"]), state, _policy_from_dict(a.get("policy", {}), where + ".policy"),
                GoalSpec(goal.get("type", "fixed"), goal.get("position", (0.0, 0.0))),
            ))
        arena = d.get("arena")
        return ScenarioConfig(
            str(d.get("name", "custom")), float(d["duration"]), float(d["dt"]), agents,
            None if arena is None else tuple(float(x) for x in arena),
            int(d.get("seed", 0)), MetricsConfig(**d.get("metrics", {})), dict(d.get("role_map", {})),
        )
    except KeyError as exc:
        raise ConfigError(f"scenario config lacks field {exc}", [str(exc)])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid scenario config: {exc}", ["scenario"])


def dump_scenario(cfg: ScenarioConfig, target: Union[PathLike, TextIO, None] = None) -> Optional[str]:
    """YAML text of ``cfg``; written to ``target`` when given."""
    text = yaml.safe_dump(scenario_to_dict(cfg), sort_keys=False)
    if target is None:
        return text
    if isinstance(target, (str, Path)):
        Path(target).write_text(text)
    else:
        target.write(text)
    return None


def load_scenario(source: Union[PathLike, TextIO]) -> ScenarioConfig:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.read()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"unreadable scenario config: {exc}", ["scenario"])
    if not isinstance(data, dict):
        raise ConfigError("scenario config must be a mapping", ["scenario"])
    return scenario_from_dict(data)
