"""Nodes on vertical versus horizontal tracks: which split spreads fastest?

Run with ``python demos/04_one_dim_splits.py``.  Takes about a minute.
"""
# %%
import numpy as np

from mobigossip import NetworkConfig, OneDimensional, phi_one_dim, phi_static_analytic, run_spread

cfg = NetworkConfig(1000)
phis = phi_static_analytic(cfg.r)

# %% [markdown]
# V-nodes slide along their own vertical line, H-nodes along a horizontal
# one.  Two nodes on the same kind of track rarely meet anyone new, while
# a V-node and an H-node cross every slot with probability ``pi r^2``, so
# a balanced population mixes best.

# %%
print(f"{'n_v':>5} {'n_h':>5} {'closed form':>12} {'mean slots':>11}")
for nv in (100, 250, 500, 750, 900):
    model = OneDimensional(nv, cfg.n - nv)
    slots = [run_spread(cfg, model, seed=s).completion_slot for s in range(20)]
    print(f"{nv:>5} {cfg.n - nv:>5} {phi_one_dim(cfg.n, nv, cfg.n - nv, phis):12.4f}"
          f" {np.mean(slots):11.2f}")
