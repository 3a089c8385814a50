"""
Convergence of the Monte-Carlo delta
====================================

For three categories the probability of the good output set can be integrated
numerically, which gives an exact delta to compare the Monte-Carlo estimate
against. The average relative error falls like one over the square root of the
sample count.
"""

# %%
import numpy as np

from simplexdp import (
    MechanismConfig,
    RngSeed,
    delta_bound,
    extreme_points,
    omega1_probability_quadrature,
)

cfg = MechanismConfig(k=15.0, eta=0.1, gamma=0.01, N=30, n=3)
exact = 1.0 - min(omega1_probability_quadrature(p, cfg) for p in extreme_points(cfg))
print(f"quadrature delta = {exact:.8f}")

# %%
print(f"{'M':>9} {'mean rel. error':>16} {'predicted':>10}")
for M in (10**3, 10**4, 10**5, 10**6):
    errs = [abs(delta_bound(cfg, M, RngSeed(s)).delta - exact) / exact for s in range(20)]
    # mean absolute deviation of a normal estimate: sqrt(2 / pi) standard errors
    predicted = np.sqrt(2 / np.pi) * np.sqrt(exact * (1 - exact) / M) / exact
    print(f"{M:9d} {np.mean(errs):16.4%} {predicted:10.4%}")
