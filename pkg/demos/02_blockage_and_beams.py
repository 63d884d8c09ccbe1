"""Directional links with random blockage.

With narrow beams, an interferer matters only when its beam points at the
receiver, the receiver looks back at it, and no obstacle blocks the path.
The expected number of such interferers beyond a distance R is finite, so a
modest interference ball already captures nearly all of them.
"""
from __future__ import annotations

import math

from imsindex import analytic as an

LAMBDA_T = 1 / 30.0**2
BLOCKAGE = 0.008  # product of obstacle density and mean obstacle size, per metre

print("chance that at least one aligned line-of-sight interferer lies beyond R")
print(f"{'R':>5}" + "".join(f"{f'beam {t:g} deg':>14}" for t in (10, 20, 40)))
for R in (0.0, 50.0, 100.0, 200.0, 400.0):
    cells = [1 - an.far_field(math.radians(t), LAMBDA_T, BLOCKAGE, R)[1] for t in (10, 20, 40)]
    print(f"{R:5g}" + "".join(f"{c:14.4f}" for c in cells))

p = an.Scenario2Params.defaults()
print("\naccuracy of the interference ball and protocol model, 20 degree beams, d_t = 30 m")
for r in (20.0, 40.0, 80.0, 160.0):
    ibm = an.s2_index("ibm", p.with_(r_ibm=r)).result.value
    prm = an.s2_index("prm", p.with_(r_prm=r)).result.value
    print(f"  r = {r:5g} m   ball {ibm:.4f}   protocol {prm:.4f}")
