"""Robot crossing a crowd of 20 Social Force pedestrians, for three robot policies.

Usage: python demos/crowd.py [n_seeds]
"""

import sys

from conflict_metrics.batch import crowd_study

n = int(sys.argv[1]) if len(sys.argv) > 1 else 10
for kind in ("ballistic", "dwa", "social_force"):
    dists, runs = crowd_study(kind, range(n))
    collisions = sum(e["kind"] == "collision" and "robot" in e["agents"] for run in runs for e in run.result.events)
    r, e = dists["R"]["robot"], dists["E"]["robot"]
    print(f"{kind:13s} interactions {r.n:4d}  robot collisions {collisions:3d}  "
          f"median R {100 * r.median:5.1f}% (IQR {100 * r.quartiles[0]:.0f}-{100 * r.quartiles[1]:.0f})  "
          f"median E {100 * e.median:5.1f}%")
