"""Robot meets Alice head-on, crossing and overtaking, with four reaction patterns.

Case 1: both ballistic. Case 2: only Alice reacts. Case 3: only the robot.
Case 4: both walk with the Social Force model.
"""

from _common import show

from conflict_metrics import evaluate_all, run_scenario
from conflict_metrics.scenarios import DYADIC_GEOMETRIES, build

for geometry in DYADIC_GEOMETRIES:
    for case in (1, 2, 3, 4):
        cfg = build(f"dyadic/{geometry}/{case}")
        res = run_scenario(cfg)
        collided = any(e["kind"] == "collision" for e in res.events)
        for rep in evaluate_all(res.trajectories, cfg.metrics):
            show(rep, f"{cfg.name:22s} {'collision ' if collided else ''}")
