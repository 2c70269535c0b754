"""Necessary conditions and measure-free obstructions on a few small hypergraphs.

Run with:  python3 demos/02_obstructions.py
"""

from hypermatch import hypergraph as hg
from hypermatch import stability as sb
from hypermatch.measures import make_measure, uniform

cases = {
    "fano": hg.generate("fano"),
    "fano minus {4,5,7}": hg.generate("fano_minus", H=[4, 5, 7]),
    "cycle(12,3,2)": hg.generate("cycle", q=12, r=3, l=2),
    "star on 5 nodes": hg.generate("star", q=5, E=[[1, 2, 3], [1, 4, 5]]),
    "complete(5,3)": hg.generate("complete", q=5, r=3),
}

# Structure first: transversal number and any partition the detector finds.
for name, h in cases.items():
    p = hg.profile(h)
    part = hg.detect_partitions(h)
    print(f"{name:20s} q={h.q:2d} m={h.m:2d} tau={p.transversal_number} partition={part.kind}")

# Obstructions that rule out stability whatever the measure and the policy.
print()
for name, h in cases.items():
    rules = [t.rule for t in sb.classify_nonstabilizable(h)]
    print(f"{name:20s} {rules or 'none'}")

# Measure-dependent conditions for the uniform measure.  Every verdict is
# computed with exact fractions, and failures come with a witness.
print()
for name in ("fano", "cycle(12,3,2)"):
    h = cases[name]
    m = uniform(h.q)
    for v in (*sb.check_N1(h, m), sb.check_N2(h, m), *sb.check_N3(h, m)):
        wit = "" if v.member else f"  witness {v.to_dict()['witness']}"
        print(f"{name:14s} {v.condition:14s} {'member' if v.member else 'fails'}{wit}")

# On the complete 3-uniform hypergraph the stability region is exactly
# "every class below 1/3".
h = cases["complete(5,3)"]
for w in ([1, 1, 1, 1, 1], [5, 2, 3, 3, 2], [4, 2, 3, 3, 2]):
    m = make_measure(w, exact=True)
    print("complete(5,3)", [str(p) for p in m.probs], "->", sb.complete3_region(h, m))
