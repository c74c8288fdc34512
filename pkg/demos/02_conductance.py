"""Empirical cut conductance next to the closed forms, one model at a time.

Run with ``python demos/02_conductance.py``.  Takes about half a minute.
"""
# %%
import numpy as np

from mobigossip import (FullyRandom, NetworkConfig, OneDimensional, PartiallyRandom, Static,
                        TwoDimensional, VelocityConstrained, analytic_phi, init_population,
                        mobile_conductance_empirical, static_conductance_empirical)

cfg = NetworkConfig(1000)
print(f"n={cfg.n}  r={cfg.r:.4f}  P(r)={cfg.contact_probability:.5f}")

# %% [markdown]
# A cut scores ``P(r) * N_S / |S|``: neighbor pairs across it, normalized by
# the smaller side.  For a mobile network the cut is chosen before a move
# and pairs are counted after it, averaged over many independent moves.
# Both estimators scan 33 vertical and 33 horizontal straight-line cuts.

# %%
rng = np.random.default_rng(1)
models = [Static(), FullyRandom(), PartiallyRandom("0.1n"), VelocityConstrained(0.05),
          OneDimensional(500, 500), TwoDimensional(0.05)]
print(f"{'model':>18} {'empirical':>10} {'closed form':>12}  cut")
for model in models:
    if isinstance(model, Static):
        est = static_conductance_empirical(init_population(cfg, model, rng).pos, cfg)
    else:
        est = mobile_conductance_empirical(cfg, model, move_samples=50, rng=rng)
    print(f"{model.name:>18} {est.value:10.4f} {analytic_phi(model, cfg):12.4f}  {est.cut}")

# %% [markdown]
# The static estimate sits near the bisector value because a straight
# line through the middle is the bottleneck of a uniform random graph.
