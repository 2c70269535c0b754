"""Exact drift of the quadratic Lyapunov function on a complete-minus hypergraph.

The oracle enumerates every arrival word and every tie, so all numbers
below are exact fractions.

Run with:  python3 demos/03_drift.py
"""

from fractions import Fraction

from hypermatch import stability as sb
from hypermatch.hypergraph import generate
from hypermatch.measures import make_measure, uniform
from hypermatch.oracle import drift_slopes

h = generate("complete_minus", q=6, r=3, J=[[1, 2, 3]])
m = make_measure([3, 1, 2, 5, 4, 2], exact=True)
dc = sb.drift_coefficients(h, m)

# Single-class rates: closed form against the four-step enumeration.
print("node  closed form        four-step slope")
for i in h.nodes:
    closed = dc.lambda_i_closed.get(i, dc.nu_i_closed.get(i))
    slope = dc.lambda_i.get(i, dc.nu_i.get(i))
    print(f"{i:4d}  {str(closed):>16s}  {str(slope):>16s}")

# Two-class rates are one-step quantities; the four-step chain multiplies
# them by four.
print()
for i, j in [(1, 2), (1, 4), (4, 5)]:
    one = drift_slopes(h, m, (i, j), steps=1).slopes[i]
    four = drift_slopes(h, m, (i, j), steps=4).slopes[i]
    closed = dc.nu_ij.get((i, j), dc.lambda_ij.get((i, j)))
    print(f"pair ({i},{j}): closed {closed}, one-step {one}, four-step {four} = {four / closed} x closed")

# Three classes of a removed triple: the smallest coordinate carries the
# positive rate 2 mu(k).
pt = {1: 20, 2: 24, 3: 8}
one = drift_slopes(h, m, (1, 2, 3), steps=1, base=pt, start=pt).slopes
print("\ntriple, x3 smallest:", {k: str(v) for k, v in one.items()}, "closed:",
      [str(a) for a in dc.alpha_triple[((1, 2, 3), 3)]])

# The sufficient set S1 needs a spread bound, N2 and N3-.  Uniform measures
# pass on every size tried here.
print()
for q in range(5, 11):
    J = [list(range(3 * t + 1, 3 * t + 4)) for t in range(q // 3)]
    g = generate("complete_minus", q=q, r=3, J=J)
    res = sb.check_S_S1(g, uniform(q), with_S=False)
    print(f"q={q:2d} removed {J}: S1 {'member' if res['S1'].member else 'fails'}, "
          f"(max/min)^4 bound {float(sb.a_bound(q)):.2f}")

# The sign of the planar witness from the complete case, for one alpha.
wt = sb.lyapunov_witness(Fraction(1, 5))
print("\nplanar witness at alpha=1/5:", wt.to_dict())
