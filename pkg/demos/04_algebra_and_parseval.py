"""Generator, product and inverse laws, plus the spectral recovery of an energy."""

import math

from ladderlab import build_ladder, energy_pq
from ladderlab.algebra import law_reports, symbolic_inverse
from ladderlab.energy import spectral_energy
from ladderlab.segments import window_requirement

T, k = 1e4, 3
table = build_ladder(*window_requirement(T, k))
records = {(p, q): energy_pq(table, T, p, q) for p in range(1, k + 1) for q in range(1, k + 1)}

for rep in law_reports(records, k, k0=8):
    if rep.law == "product" and not rep.closure_ok:
        tag = "outside k, inside k0" if rep.closure_ok_k0 else "outside k0"
    else:
        tag = ""
    ins = " ".join(f"({r['p']},{r['q']})" for r in rep.inputs)
    print(f"{rep.law:<12} {ins:<24} ratio {rep.ratio:.4f} {tag}")

print("symbolic (1,257) pair:", symbolic_inverse(1, 257))

rec = records[(1, 1)]
L = rec.segment.length
for m in (50, 100, 200):
    s = spectral_energy(table, rec, m * 2 * math.pi / L)
    print(f"omega_max = {m:>3} * 2pi/L: spectral {s:.8e}  time domain {rec.value:.8e}  err {abs(s / rec.value - 1):.1e}")
