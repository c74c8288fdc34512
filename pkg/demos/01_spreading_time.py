"""How long does a single rumor take to reach everyone?

Run with ``python demos/01_spreading_time.py``.  Takes about a minute.
"""
# %%
import numpy as np

from mobigossip import FullyRandom, NetworkConfig, Static, run_spread, spreading_time
from mobigossip.harness import fit_scaling

# %% [markdown]
# Every slot, each node picks one neighbor at random and they exchange the
# rumor (push-pull).  On a static random geometric graph the rumor has to
# crawl across the square hop by hop; when nodes teleport to fresh uniform
# positions every slot, the network mixes and the time collapses.

# %%
ns = [250, 500, 1000, 2000]
rounds = 20
table = {}
for model in (Static(), FullyRandom()):
    for n in ns:
        cfg = NetworkConfig(n)
        traces = [run_spread(cfg, model, seed=s) for s in range(rounds)]
        table[model.name, n] = spreading_time(traces, epsilon=0.1)

print(f"{'n':>6} {'r':>8} {'static':>10} {'fully-random':>14}")
for n in ns:
    print(f"{n:>6} {NetworkConfig(n).r:8.4f} {table['static', n].mean:10.2f}"
          f" {table['fully-random', n].mean:14.2f}")

# %% [markdown]
# Fit the means against the two candidate growth laws.

# %%
for name, predictor in (("static", "sqrt_n_over_ln_n"), ("fully-random", "ln_n")):
    fit = fit_scaling([(n, table[name, n].mean) for n in ns], predictor)
    print(f"{name:>13} vs {predictor:<17} slope={fit.slope:6.3f} r^2={fit.r_squared:.3f}")

# %% [markdown]
# A single trace shows the S-shaped growth of the informed set.

# %%
trace = run_spread(NetworkConfig(1000), Static(), seed=0)
print("informed per slot:", np.array(trace.informed_count_per_slot))
