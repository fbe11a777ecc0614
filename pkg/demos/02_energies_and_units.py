"""Energies E_{p,q} at T = 1e4 against their predicted size ln^{q-p} T.

At desk heights ln T is about 9, so the ratios are close to 1 but not
converging in any visible way; the unit energies (p = q) sit near 1.
"""

from ladderlab import build_ladder, energy_pq
from ladderlab.segments import window_requirement

T, k = 1e4, 3
table = build_ladder(*window_requirement(T, k))

print(f"{'p':>2} {'q':>2} {'value':>14} {'predicted':>12} {'ratio':>8}")
for p in range(1, k + 1):
    for q in range(1, k + 1):
        rec = energy_pq(table, T, p, q)
        print(f"{p:>2} {q:>2} {rec.value:>14.6e} {rec.predicted:>12.6e} {rec.ratio:>8.4f}")
