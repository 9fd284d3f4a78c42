"""A robot splitting Alice and Bob, or passing either of them.

The robot's goal sits behind Alice (left), between the two (middle) or behind
Bob (right). Passing around the group takes most responsibility and engages
nobody; cutting through the middle engages Bob.
"""

import numpy as np
from _common import show

from conflict_metrics import evaluate_all, run_scenario
from conflict_metrics.scenarios import build

for variant in ("left", "middle", "right"):
    cfg = build(f"group/{variant}")
    reports = evaluate_all(run_scenario(cfg).trajectories, cfg.metrics)
    print(f"-- {variant}")
    for rep in reports:
        show(rep, "  ")
    mine = [r.r("robot") for r in reports if "robot" in r.agent_ids and r.resolved]
    print(f"  mean robot R: {100 * np.mean(mine):.1f}%")
