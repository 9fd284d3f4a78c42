"""Two agents blocking each other side by side.

Both keep diminishing the conflict while it barely moves over a pair of
steps: each counterfactual assumes the other agent kept going.
"""

from conflict_metrics import run_scenario
from conflict_metrics.attribution import PairArrays, contribution_arrays, segment_pair, split_signed
from conflict_metrics.scenarios import build

cfg = build("lock")
res = run_scenario(cfg)
pair = PairArrays.from_trajectories(res.trajectories["robot"], res.trajectories["alice"])
(_, anchor), = segment_pair(pair, cfg.metrics)
ca = contribution_arrays(pair, anchor, cfg.metrics)
_, m1 = split_signed(ca.cc1)
_, m2 = split_signed(ca.cc2)
print("   t      C   dC/s  robot-/s  alice-/s")
for k in range(len(ca.c) - 12, len(ca.c) - 1):
    print(f"{ca.t[k]:5.1f} {ca.c[k]:6.3f} {ca.dC[k]:6.2f} {m1[k] + 0.0:9.2f} {m2[k] + 0.0:9.2f}")
