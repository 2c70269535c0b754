"""Monte Carlo runs set against the truncated stationary law.

Takes about half a minute on one core.

Run with:  python3 demos/04_simulation.py
"""

import numpy as np

from hypermatch.dynamics import PolicySpec
from hypermatch.hypergraph import generate
from hypermatch.measures import make_measure, spawn_seeds, uniform
from hypermatch.oracle import truncated_stationary
from hypermatch.sim import replicate_and_classify, run, summarize

h = generate("complete", q=4, r=3)
ml = PolicySpec("ml")

# The capped chain: the mean barely moves between K=30 and K=60.
for K in (10, 30, 60):
    res = truncated_stationary(h, uniform(4), ml, K)
    print(f"K={K:2d}: {res.state_count:5d} states, mean total {res.mean_total_count:.6f}, "
          f"empty mass {res.empty_state_mass:.4f}, dropped {res.dropped_rate:.1e}")

# Eight long runs from the empty buffer.
means = []
for ss in spawn_seeds(0, 8):
    traj = run(h, uniform(4, exact=False), ml, 200_000, ss)
    means.append(traj.totals[2000:].mean())
print(f"simulated mean total {np.mean(means):.3f} +- {np.std(means) / np.sqrt(len(means)):.3f}")

# A skewed measure pushes class 1 above 1/3 and the buffer grows linearly.
traj = run(h, make_measure([0.4, 0.2, 0.2, 0.2]), ml, 200_000, seed=1)
r = summarize(traj)
print(f"mu=(0.4,0.2,0.2,0.2): slope {r.slope:.3f}, final window mean {r.final_mean:.0f}, verdict {r.verdict}")

# Replicated classification for a complete-minus hypergraph.
cm = generate("complete_minus", q=6, r=3, J=[[1, 2, 3], [4, 5, 6]])
st = replicate_and_classify(cm, uniform(6, exact=False), ml, 50_000, reps=8, workers=1)
print(f"complete_minus(6): {st.verdict}, stable share {st.stable_fraction:.0%}, "
      f"mean return time {st.mean_return_time:.1f}")
