"""How good are straight-line cuts?  Compare them with exhaustive search.

Run with ``python demos/06_oracle_check.py``.
"""
# %%
import numpy as np

from mobigossip import NetworkConfig, Static, brute_force_conductance, init_population
from mobigossip import static_conductance_empirical

# %% [markdown]
# On tiny networks every subset of at most n/2 nodes can be scored.  The
# sweep-line estimate can only be an upper bound on the true minimum; the
# question is how loose it gets.

# %%
ratios = []
for seed in range(40):
    n = 8 + seed % 5
    cfg = NetworkConfig(n)
    pop = init_population(cfg, Static(), np.random.default_rng(seed))
    exact = brute_force_conductance(pop, cfg, Static())
    sweep = static_conductance_empirical(pop.pos, cfg)
    ratios.append(sweep.value / exact.value if exact.value > 0 else 1.0)
    if seed < 5:
        print(f"n={n:2d} exhaustive={exact.value:.4f} {exact.cut:<22}"
              f" sweep={sweep.value:.4f} {sweep.cut}")

ratios = np.array(ratios)
print(f"sweep/exhaustive: min {ratios.min():.3f}, median {np.median(ratios):.3f},"
      f" max {ratios.max():.3f}; within 2x on {np.mean(ratios <= 2):.0%} of instances")
