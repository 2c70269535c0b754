"""Walk through a short FCFM run on the complete 3-uniform hypergraph of order 4.

Run with:  python3 demos/01_trace.py
"""

from hypermatch.dynamics import PolicySpec, replay
from hypermatch.hypergraph import generate

h = generate("complete", q=4, r=3)
print("hyperedges:", h.hyperedges)

# Eleven arrivals.  A hyperedge is matched as soon as the buffer plus the
# arrival holds one item of each of its classes.
arrivals = [2, 3, 4, 1, 1, 2, 3, 3, 4, 2, 2]
outs = replay(h, PolicySpec("fcfm"), arrivals)

for n, (a, o) in enumerate(zip(arrivals, outs), 1):
    word = " ".join(map(str, o.new_state.buffer_word)) or "(empty)"
    note = f"  matched {set(o.matched)}, took buffer positions {o.removed_positions}" if o.matched else ""
    print(f"step {n:2d}  arrival {a}  buffer: {word:<12}{note}")

# The buffer never contains a whole hyperedge, so at most two classes
# are ever present at once.
print("final counts:", outs[-1].new_state.counts)

# LCFM on the same arrivals takes the youngest items instead.
lcfm = replay(h, PolicySpec("lcfm"), arrivals)
print("LCFM final buffer:", lcfm[-1].new_state.buffer_word)
