"""
Merging sparse states
=====================

A twelve-zone trip matrix where a few zones see little traffic. The rarest
transition sets the border eta, and a small eta forces a large smallest
epsilon. Merging each quiet zone into a busy neighbour raises eta and brings
the smallest achievable epsilon down.
"""

# %%
import numpy as np

from simplexdp import CategorySet, EventLog, merge_categories, merge_partitions, transition_counts
from simplexdp.privacy import chain_configs, epsilon_bound

rng = np.random.default_rng(0)
zones = tuple(f"z{i:02d}" for i in range(12))
traffic = np.array([40, 35, 30, 30, 25, 25, 20, 20, 4, 3, 3, 2], dtype=float)
parts = []
for i in range(12):
    n_trips = int(traffic[i] * 40)
    dest = rng.choice(12, size=n_trips, p=traffic / traffic.sum())
    # every transition observed at least once
    dest = np.concatenate([dest, np.arange(12)])
    parts.append(tuple(zones[d] for d in dest))
log = EventLog(tuple(parts), zones)
cats = CategorySet(zones)


def smallest_epsilon(log, cats, gamma=1e-8):
    tc = transition_counts(log, cats)
    cfgs = chain_configs(tc, gamma, k_scale=1.0)
    return tc, max(epsilon_bound(c) for c in cfgs)


tc, eps = smallest_epsilon(log, cats)
print(f"{tc.n} zones: smallest eta {tc.etas.min():.2e}, smallest epsilon {eps:.2f}")

# %%
# Fold the four quiet zones into busy ones.
mapping = {z: z for z in zones}
mapping.update({"z08": "z00", "z09": "z01", "z10": "z02", "z11": "z03"})
merged_log = merge_partitions(log, mapping)
merged_cats = merge_categories(cats, mapping)
tc_m, eps_m = smallest_epsilon(merged_log, merged_cats)
print(f"{tc_m.n} zones: smallest eta {tc_m.etas.min():.2e}, smallest epsilon {eps_m:.2f}")
print("trips conserved:", int(tc.Ns.sum()) == int(tc_m.Ns.sum()))
