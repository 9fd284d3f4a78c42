"""Command-line interface: ``conflict-metrics {run,eval,plotdata,list-scenarios}``.

Exit codes: 0 success, 2 usage or input error, 1 internal error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence

from . import io
from .attribution import aggregate_distributions, evaluate_all, split_at_jumps
from .batch import distributions, relevant_reports, run_seeds
from .errors import ConflictMetricsError, EmptyDistributionError
from .kinematics import MetricsConfig, conflict_series
from .scenarios import build, catalog_names


class UsageError(Exception):
    """Bad command-line input; reported with exit code 2."""


def _metrics(args, base: MetricsConfig = MetricsConfig()) -> MetricsConfig:
    changes = {}
    if args.window is not None:
        changes["window"] = args.window
    if args.metric_radius is not None:
        changes["combined_radius_override"] = 2.0 * args.metric_radius
    return replace(base, **changes)


def _emit(text: str, out: Optional[str]):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _load_scenario(name: str):
    path = Path(name)
    if path.suffix in (".yaml", ".yml"):
        if not path.exists():
            raise UsageError(f"scenario file not found: {name}")
        return io.load_scenario(path)
    try:
        return build(name)
    except KeyError:
        raise UsageError(f"unknown scenario {name!r}; available:\n  " + "\n  ".join(catalog_names()))


def _dump_paths(args, seeds: Sequence[int]) -> List[Path]:
    if args.dump_trajectories is None:
        return []
    if args.dump_trajectories:
        base = Path(args.dump_trajectories)
    elif args.out:
        base = Path(args.out).with_suffix(".trajectories.csv")
    else:
        base = Path("trajectories.csv")
    if len(seeds) == 1:
        return [base]
    return [base.with_name(f"{base.stem}.seed{s}{base.suffix}") for s in seeds]


def cmd_run(args) -> int:
    cfg = _load_scenario(args.scenario)
    changes = {"metrics": _metrics(args, cfg.metrics)}
    if args.dt is not None:
        changes["dt"] = args.dt
    if args.seed is not None:
        changes["seed"] = args.seed
    cfg = replace(cfg, **changes)
    if args.seeds is not None and args.seeds < 1:
        raise UsageError("--seeds must be at least 1")
    seeds = [cfg.seed + i for i in range(args.seeds or 1)]
    runs = run_seeds(cfg, seeds)

    dumps = _dump_paths(args, seeds)
    for path, run in zip(dumps, runs):
        io.write_trajectories(run.result.trajectories, path)

    multi = len(seeds) > 1
    kept = {id(rep) for rep in relevant_reports(cfg, runs)}
    records = [io.report_record(rep, run.seed if multi else None)
               for run in runs for rep in run.reports if id(rep) in kept]
    events = [io.event_record(e, run.seed if multi else None) for run in runs for e in run.result.events]
    doc = io.build_report(
        f"scenario:{cfg.name}", cfg.metrics, records,
        io.distribution_record(distributions(cfg, runs, args.weighted_aggregation)), events,
        scenario=cfg.name, seeds=seeds, dt=io.fixed(cfg.dt), duration=io.fixed(cfg.duration),
        weighted_aggregation=bool(args.weighted_aggregation),
        trajectory_files={str(s): str(p) for s, p in zip(seeds, dumps)} or None,
    )
    _emit(io.dumps_report(doc), args.out)
    return 0


def cmd_eval(args) -> int:
    path = Path(args.trajectories)
    if not path.exists():
        raise UsageError(f"trajectory file not found: {path}")
    trajectories = io.read_trajectories(path)
    if len(trajectories) < 2:
        raise UsageError(f"{path}: need at least two agents, found {len(trajectories)}")
    metrics = _metrics(args)
    reports = evaluate_all(trajectories, metrics)
    try:
        dists = aggregate_distributions(reports, {}, args.weighted_aggregation)
    except EmptyDistributionError:
        dists = None
    doc = io.build_report(
        f"file:{path}", metrics, [io.report_record(r) for r in reports], io.distribution_record(dists),
        agents=list(trajectories), weighted_aggregation=bool(args.weighted_aggregation),
        trajectory_files={"0": str(path)},
    )
    if not reports:
        doc["config"]["note"] = "no interactions: the conflict potential is zero throughout"
    _emit(io.dumps_report(doc), args.out)
    return 0


def _num(x) -> str:
    return "" if x is None else f"{x:.9g}"


def _plot_conflict_series(doc, args, writer):
    files = doc["config"].get("trajectory_files") or {}
    if args.trajectories:
        files = {k: args.trajectories for k in files} or {"0": args.trajectories}
    if not files:
        raise UsageError("conflict_series needs a trajectory dump (run with --dump-trajectories "
                         "or pass --trajectories)")
    m = doc["config"]["metrics"]
    metrics = MetricsConfig(m["window"], m["combined_radius_override"], m["epsilon_speed"])
    loaded = {}
    writer.writerow(["seed", "agent1", "agent2", "tce_anchor", "t", "pdce", "cp", "n", "c"])
    for rec in doc["interactions"]:
        seed = str(rec.get("seed", next(iter(files))))
        if seed not in files:
            raise UsageError(f"no trajectory dump for seed {seed}")
        if seed not in loaded:
            p = Path(files[seed])
            if not p.exists():
                raise UsageError(f"trajectory dump not found: {p}")
            loaded[seed] = io.read_trajectories(p)
        trajs = loaded[seed]
        anchor = rec["tce_anchor"]
        pieces = []
        for aid in rec["pair"]:
            match = [tr for tr in split_at_jumps(trajs[aid]) if tr.t0 - 1e-9 <= anchor <= tr.t_end + 1e-9]
            if not match:
                raise UsageError(f"trajectory dump does not cover {aid!r} at t={anchor}")
            pieces.append(match[0])
        for s in conflict_series(pieces[0], pieces[1], anchor, metrics):
            writer.writerow([seed, *rec["pair"], _num(anchor), _num(s.t), _num(s.pdce), _num(s.cp),
                             _num(s.n), _num(s.c)])


def _plot_shares(doc, writer):
    writer.writerow(["seed", "agent1", "agent2", "tce_anchor", "c_total", "status",
                     "R_agent1", "R_agent2", "R_time", "E_agent1", "E_agent2", "E_time"])
    for rec in doc["interactions"]:
        a, b = rec["pair"]
        r = rec["r_shares"] or {}
        e = rec["e_shares"] or {}
        writer.writerow([rec.get("seed", ""), a, b, _num(rec["tce_anchor"]), _num(rec["c_total"]), rec["status"],
                         *(_num(r.get(k)) for k in (a, b, "time")), *(_num(e.get(k)) for k in (a, b, "time"))])


def _plot_distributions(doc, writer):
    dists = doc.get("distributions")
    if not dists:
        raise UsageError("report holds no aggregate distributions")
    writer.writerow(["metric", "source", "n", "q1", "median", "q3"])
    for metric, by_source in dists.items():
        for src, d in by_source.items():
            writer.writerow([metric, src, d["n"], _num(d["q1"]), _num(d["median"]), _num(d["q3"])])


def cmd_plotdata(args) -> int:
    path = Path(args.report)
    if not path.exists():
        raise UsageError(f"report not found: {path}")
    doc = io.read_report(path)
    buf = []

    class _Lines:
        def write(self, s):
            buf.append(s)

    writer = csv.writer(_Lines(), lineterminator="\n")
    if args.kind == "conflict_series":
        _plot_conflict_series(doc, args, writer)
    elif args.kind == "shares":
        _plot_shares(doc, writer)
    else:
        _plot_distributions(doc, writer)
    _emit("".join(buf), args.out)
    return 0


def cmd_list(args) -> int:
    sys.stdout.write("\n".join(catalog_names()) + "\n")
    return 0


def _positive(kind):
    def parse(text):
        value = kind(text)
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conflict-metrics",
        description="Responsibility and Engagement attribution for agent interactions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def metric_flags(p):
        p.add_argument("--window", type=_positive(float), help="normalization window N_W in seconds (default 12)")
        p.add_argument("--metric-radius", type=_positive(float),
                       help="metric radius per agent in metres; the combined radius becomes twice this")
        p.add_argument("--weighted-aggregation", action="store_true",
                       help="weight distribution statistics by each interaction's total conflict")
        p.add_argument("--out", help="output path (default: stdout)")

    run = sub.add_parser("run", help="simulate a catalog scenario (or a YAML config) and report")
    run.add_argument("scenario", help="catalog name such as dyadic/oncoming/4, or a .yaml file")
    run.add_argument("--seed", type=int, help="random seed (first seed with --seeds)")
    run.add_argument("--seeds", type=int, help="number of consecutive seeds to run")
    run.add_argument("--dt", type=_positive(float), help="simulation time step in seconds")
    run.add_argument("--dump-trajectories", nargs="?", const="", metavar="PATH",
                     help="also write the simulated trajectories as CSV")
    metric_flags(run)
    run.set_defaults(func=cmd_run)

    ev = sub.add_parser("eval", help="evaluate a trajectory CSV")
    ev.add_argument("trajectories", help="CSV with columns t,agent_id,x,y[,vx,vy][,radius]")
    metric_flags(ev)
    ev.set_defaults(func=cmd_eval)

    pd = sub.add_parser("plotdata", help="tabular data for plots from a report")
    pd.add_argument("report")
    pd.add_argument("kind", choices=("conflict_series", "shares", "distributions"))
    pd.add_argument("--trajectories", help="trajectory CSV to use instead of the report's dump")
    pd.add_argument("--out", help="output path (default: stdout)")
    pd.set_defaults(func=cmd_plotdata)

    ls = sub.add_parser("list-scenarios", help="print the scenario catalog")
    ls.set_defaults(func=cmd_list)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, ConflictMetricsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - reported, not hidden
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
