"""Exact distortion of piecewise affine circle maps.

var(log Df^n) is computed in rational arithmetic. When break points lie
on distinct orbits the jumps accumulate and var_n / n stays away from zero;
when the jumps along an orbit cancel, the distortion stays bounded.
"""

import warnings

from circdist.errors import UncertifiedHorizonWarning
from circdist.pa import balance_predicate, balanced_map, pa_class_sum, pa_var_sequence, two_interval_map

warnings.simplefilter("ignore", UncertifiedHorizonWarning)
for name, f in (("two_interval", two_interval_map()), ("balanced", balanced_map())):
    s = pa_var_sequence(f, 60, keep=(1, 5, 15, 30, 60))
    per_n = ", ".join(f"{n}: {v:.4f}" for n, v in zip(s.n_values, s.per_n))
    total, certified = pa_class_sum(f, 200)
    rep = balance_predicate(f, 200)
    print(f"{name}: var_n/n = {{{per_n}}}")
    print(f"  orbit-class sum {total:.4f} (certified {certified}), balanced {rep.balanced}")
