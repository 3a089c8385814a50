"""
Private Markov chain model
==========================

Transition counts from a simulated four-state process are privatized row by
row. We compare the stationary distribution and the ergodicity coefficient of
the private model with the sensitive one, and with their analytic bounds, as
the per-row concentration grows.
"""

# %%
import numpy as np

from simplexdp import (
    CategorySet,
    DirichletParams,
    EventLog,
    RngSeed,
    chain_configs,
    epsilon_bound,
    perturbation_bounds,
    privatize_chain,
    sample_batch,
    stationary_distribution,
    tau_inf,
    transition_counts,
    tv_distance,
)

rng = np.random.default_rng(0)
states = ("home", "work", "shop", "gym")
P_true = np.array(
    [
        [0.55, 0.25, 0.12, 0.08],
        [0.35, 0.45, 0.12, 0.08],
        [0.50, 0.20, 0.20, 0.10],
        [0.60, 0.15, 0.10, 0.15],
    ]
)
walk = [0]
for _ in range(4000):
    walk.append(rng.choice(4, p=P_true[walk[-1]]))
parts = tuple(tuple(states[b] for a, b in zip(walk, walk[1:]) if a == i) for i in range(4))
tc = transition_counts(EventLog(parts, states), CategorySet(states))
P = tc.matrix
pi = stationary_distribution(P)
print("records per row:", tc.Ns)
print("sensitive stationary distribution:", np.round(pi, 4))

# %%
# One private release at twice the smallest admissible concentration.
cfgs = chain_configs(tc, 1e-3, k_scale=2.0)
model, budget = privatize_chain(tc, cfgs, 10**5, RngSeed(1))
print(f"budget: epsilon = {budget.epsilon:.3f}, delta = {budget.delta:.2e}")
print("private stationary distribution:", np.round(model.pi, 4))
print(f"TV distance {tv_distance(pi, model.pi):.4f}; tau_inf {tau_inf(P):.4f} -> {model.tau_inf:.4f}")

# %%
# Mean TV and mean |tau difference| over 300 releases, against their bounds.
print(f"{'scale':>5} {'epsilon':>8} {'mean TV':>8} {'TV bound':>9} {'mean dtau':>9} {'tau bound':>9}")
t0 = tau_inf(P)
for scale in (1.0, 1.5, 2.0, 3.0):
    cfgs = chain_configs(tc, 1e-3, k_scale=scale)
    ks = [c.k for c in cfgs]
    b = perturbation_bounds(P, pi, tc.Ns, ks)
    draws = [sample_batch(DirichletParams(P[i], ks[i]), 300, RngSeed(2, path=(i,))) for i in range(4)]
    tv, dt = [], []
    for r in range(300):
        Pt = np.vstack([d[r] for d in draws])
        tv.append(tv_distance(pi, stationary_distribution(Pt)))
        dt.append(abs(t0 - tau_inf(Pt)))
    eps = max(epsilon_bound(c) for c in cfgs)
    print(f"{scale:5.1f} {eps:8.3f} {np.mean(tv):8.4f} {b.tv_bound:9.4f} {np.mean(dt):9.4f} {b.tau_bound:9.4f}")
