"""Alice chases the robot; both plan with DWA, the robot keeps relaunching.

Alice aims at where the robot will be, so she is the one engaging.
"""

from _common import show

from conflict_metrics import evaluate_all, run_scenario
from conflict_metrics.scenarios import build

cfg = build("catch")
res = run_scenario(cfg)
for rep in sorted(evaluate_all(res.trajectories, cfg.metrics), key=lambda r: r.tce_anchor):
    show(rep)
for e in res.events:
    print(f"  {e['t']:5.1f} s {e['kind']}: {', '.join(e['agents'])}")
