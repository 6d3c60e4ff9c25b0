"""A local bump on a parabolic interval map.

The unmodified map fhat has var(log D fhat^n) / n tending to zero. Changing
its derivative at a single point of a fundamental domain leaves a defect
that every orbit crosses once, so the modified map keeps var_n / n bounded
below by the size of that defect.
"""

from circdist.conjugation import parabolic_patch_build
from circdist.distortion import Schedule, var_log_deriv_series_partition

ex = parabolic_patch_build()
print(f"log-derivative defect at b = {ex.b:.4f}: {ex.delta:.4f}")
sched = Schedule(8, 13, 1e-5)
ns = (1, 5, 25, 100)
for name, g in (("fhat", ex.fhat), ("f", ex.f)):
    est, _ = var_log_deriv_series_partition(g, ns, sched)
    print(name, " ".join(f"n={n}: {e.value / n:.4f}" for n, e in zip(ns, est)))
