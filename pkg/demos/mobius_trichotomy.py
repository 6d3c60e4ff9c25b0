"""Asymptotic distortion of Mobius circle maps by conjugacy class.

Elliptic maps have bounded var(log Df^n), parabolic maps grow like log n
and hyperbolic maps linearly, so only the hyperbolic class keeps a positive
asymptotic distortion.
"""

import numpy as np

from circdist.mobius import MobiusMap, classify, mobius_asymptotic_distortion, var_log_deriv_power

maps = {
    "elliptic": MobiusMap.from_disk(0.4 * np.exp(1j), 2.4),
    "parabolic": MobiusMap([[1.0, 0.3], [0.0, 1.0]]),
    "hyperbolic": MobiusMap([[2.0, 0.0], [0.0, 0.5]]),
}
ns = (1, 10, 100, 1000)
print(f"{'class':>10} " + " ".join(f"{'var_' + str(n):>10}" for n in ns) + f" {'limit':>10}")
for name, m in maps.items():
    assert classify(m).kind == name, classify(m)
    row = " ".join(f"{var_log_deriv_power(m, n):10.4f}" for n in ns)
    print(f"{name:>10} {row} {mobius_asymptotic_distortion(m):10.4f}")
print("8 log 2 =", round(8 * np.log(2), 4))
