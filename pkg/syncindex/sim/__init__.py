"""
Simulation of the coupled agents, their consensus error and its transition matrix.
"""

from syncindex.sim.dynamics import (
    closed_loop_matrix, error_projection, lyapunov_value, alpha_at, decay_rates, gamma_matrices
)
from syncindex.sim.transition import Propagator, Stretch, state_transition, step_exponential
from syncindex.sim.trajectory import Trajectory, integrate
from syncindex.sim.gram import GramSet, gram_set, integral_form_alpha, log_decay
