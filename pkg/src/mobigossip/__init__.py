"""Gossip broadcasting and conductance on mobile random geometric graphs."""
from .conductance import (ConductanceEstimate, Cut, Method, analytic_phi, brute_force_conductance,
                          candidate_cuts, contact_pairs, mobile_conductance_empirical,
                          one_dim_cross_contact_probability, phi_fully_random, phi_one_dim,
                          phi_partially_random, phi_static_analytic, phi_two_dim,
                          phi_velocity_closed_form, phi_velocity_integral,
                          static_conductance_empirical, sweep_cuts, velocity_contact_integral)
from .geometry import NetworkConfig, Point, SpatialIndex, transmission_radius
from .gossip import GossipConfig, Mode, SpreadTrace, run_spread, spreading_time
from .harness import (ExperimentSpec, Kind, bound_check, fit_scaling, load_config, parse_config,
                      run_experiment)
from .mobility import (FullyRandom, OneDimensional, PartiallyRandom, Static, TwoDimensional,
                       VelocityConstrained, init_population, make_model, step)

__version__ = "0.1.0"
