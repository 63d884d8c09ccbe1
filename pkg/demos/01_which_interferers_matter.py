"""Which interferers does a receiver need to track?

An omnidirectional receiver sits 20 m from its transmitter in a Poisson field
of other transmitters with Rayleigh fading. We compare two shortcuts against
the full sum of interference:

* the interference ball: only transmitters within ``r`` count;
* the protocol model: any transmitter within ``r`` causes an outage.

Closed forms and a paired Monte Carlo run give the same accuracy index.
"""
from __future__ import annotations

from imsindex import analytic as an
from imsindex.interference import ModelSpec
from imsindex.montecarlo import preset, run_models

RADII = (10.0, 20.0, 40.0, 60.0, 100.0)

for d_t in (30.0, 80.0):
    print(f"\nmean spacing between transmitters d_t = {d_t:g} m")
    print(f"{'radius':>7} {'ball (exact)':>13} {'ball (MC)':>10} {'protocol (exact)':>17} {'protocol (MC)':>14}")
    cfg = preset("s1", d_t=d_t, trials=40_000, seed=1)
    models = [ModelSpec.ibm(r) for r in RADII] + [ModelSpec.prm(r) for r in RADII]
    reps = dict(zip([m.label() for m in models], run_models(cfg, models)))
    base = an.Scenario1Params.defaults(d_t=d_t)
    for r in RADII:
        ibm = an.s1_index("ibm", base.with_(r_ibm=r)).result.value
        prm = an.s1_index("prm", base.with_(r_prm=r)).result.value
        print(f"{r:7g} {ibm:13.4f} {reps[f'ibm:{r:g}'].index.value:10.4f} "
              f"{prm:17.4f} {reps[f'prm:{r:g}'].index.value:14.4f}")

print("\nThe ball only ever under-counts interference, so it never predicts an outage the")
print("full model does not; its accuracy climbs towards 1 as the radius grows. The protocol")
print("model trades misses for false alarms and peaks at an intermediate radius.")
