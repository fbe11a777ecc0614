"""Build a ladder near T = 1e4 and walk a segment down its rungs.

Each reverse iterate of [T, T + 1/ln T] sits roughly (1 - c) T / ln T to
the right of the previous one, and phi_1 maps it back exactly.
"""

import math

import numpy as np

from ladderlab import build_ladder, phi1_iter, segment
from ladderlab.segments import gap_scale, window_requirement

T, k = 1e4, 3
lo, hi = window_requirement(T, k)
table = build_ladder(lo, hi)
print(f"ladder on [{lo:.1f}, {hi:.1f}] with {len(table.knots_t)} knots")

seg = segment(table, T, p=1, q=k)
print(f"base segment [{T:g}, {T + 1 / math.log(T):.6f}]")
for j in range(k + 1):
    a, b = seg.level(j)
    print(f"  level {j}: [{a:.6f}, {b:.6f}]  width {b - a:.3e}")

g = gap_scale(T)
print(f"expected spacing (1-c)T/lnT = {g:.2f}")
for j in range(1, k + 1):
    a, _ = seg.level(j)
    _, prev_hi = seg.level(j - 1)
    print(f"  gap to level {j}: {a - prev_hi:.2f} ({(a - prev_hi) / g:.3f} x)")

back = phi1_iter(table, np.array([seg.lo, seg.hi]), k)
print(f"phi_1^{k} of the top segment: {back}")
