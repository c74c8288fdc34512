"""Velocity-limited moves: from the static plateau toward full mixing.

Run with ``python demos/03_velocity_phases.py``.  Takes about a minute.
"""
# %%
import numpy as np

from mobigossip import (NetworkConfig, VelocityConstrained, init_population,
                        mobile_conductance_empirical, phi_velocity_closed_form,
                        phi_velocity_integral, static_conductance_empirical)
from mobigossip.mobility import Static

cfg = NetworkConfig(1000)
r = cfg.r

# %% [markdown]
# Three ways to evaluate the bisector conductance after one move of at most
# ``v_max``: the piecewise closed form, the same integral with the true
# circular contact region, and a Monte Carlo estimate on a real network.

# %%
pos = init_population(cfg, Static(), np.random.default_rng(3)).pos
print(f"static estimate on this placement: {static_conductance_empirical(pos, cfg).value:.4f}")
print(f"{'v_max':>8} {'v/r':>6} {'closed':>8} {'circle':>8} {'empirical':>10}")
for v in (r / 100, r / 10, r / 2, r, 2 * r, 0.3, 0.5):
    model = VelocityConstrained(v)
    # same seed, same uniform placement as the static estimate above
    pop = init_population(cfg, model, np.random.default_rng(3))
    est = mobile_conductance_empirical(cfg, model, move_samples=30,
                                       rng=np.random.default_rng(4), population=pop)
    print(f"{v:8.4f} {v / r:6.2f} {phi_velocity_closed_form(r, v):8.4f}"
          f" {phi_velocity_integral(r, v):8.4f} {est.value:10.4f}")

# %% [markdown]
# For ``v_max`` well below ``r`` the value barely moves; beyond it the
# conductance grows roughly linearly in ``v_max``.
