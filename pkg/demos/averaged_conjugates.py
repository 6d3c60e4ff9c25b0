"""Geometric-mean conjugates of a smooth map drift toward its rotation.

For a map smoothly conjugate to an irrational rotation, conjugating by the
n-th geometric-mean conjugator leaves var(log D) equal to var(log Df^n) / n,
which stays bounded, so the conjugates approach the rotation.
"""

import numpy as np

from circdist.catalog import conjugated_rotation
from circdist.conjugation import mean_conjugator
from circdist.distortion import Schedule, rotation_proximity
from circdist.maps import GOLDEN, conjugate

f = conjugated_rotation(GOLDEN)
sched = Schedule(8, 14, 1e-8)
print(f"{'n':>4} {'c0':>12} {'sup|log Dg|':>12} {'var(log Dg)':>12}")
base = rotation_proximity(f, GOLDEN, sched)
print(f"{0:>4} {base.c0:12.3e} {base.dlog:12.3e} {base.var:12.3e}")
for n in (2, 8, 32, 128):
    g = conjugate(mean_conjugator(f, n), f)
    p = rotation_proximity(g, GOLDEN, sched)
    print(f"{n:>4} {p.c0:12.3e} {p.dlog:12.3e} {p.var:12.3e}")
print("ratio var_0 / var_128 =", np.round(base.var / p.var, 1))
