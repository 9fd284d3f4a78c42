"""Small printing helpers shared by the demo scripts."""


def pct(x):
    return "   n/a" if x is None else f"{100 * x:5.1f}%"


def show(rep, label=""):
    a, b = rep.agent_ids
    if not rep.resolved:
        print(f"{label}{a}/{b}: {rep.status}")
        return
    print(f"{label}{a}/{b} at TCE {rep.tce_anchor:5.1f} s  C={rep.c_total:.3f}")
    for metric, get in (("R", rep.r), ("E", rep.e)):
        print(f"    {metric}: {a} {pct(get(a))}  {b} {pct(get(b))}  time {pct(get('time'))}")
