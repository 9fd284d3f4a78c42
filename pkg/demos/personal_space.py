"""Same overtaking motion, judged against collisions and against personal space.

Only the metric radius changes. With a 1 m radius per agent the robot's
late evasion no longer removes all conflict and time takes a share.
"""

from _common import show

from conflict_metrics import evaluate_all, run_scenario
from conflict_metrics.scenarios import build

for name in ("dyadic/overtaking/3", "personal_space/overtaking/3"):
    cfg = build(name)
    for rep in evaluate_all(run_scenario(cfg).trajectories, cfg.metrics):
        show(rep, f"{name:28s} ")
