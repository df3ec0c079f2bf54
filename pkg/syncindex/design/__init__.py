"""
Gain design: Riccati and neutral Lyapunov solutions, kappa2 estimation and the
gamma sweep behind the synchronization index.
"""

from syncindex.design.riccati import solve_care, care_residual, psd_sqrt
from syncindex.design.lyapunov import solve_neutral_lyapunov
from syncindex.design.kappa import Kappa2Estimate, kappa2_estimate, kappa2_over_grid
from syncindex.design.gain import GainDesign, design_explicit, check_lyapunov_matrix
from syncindex.design.search import (
    GammaSweep, SweepEntry, design_riccati, design_neutral, algorithm1_search, closest_sweep_entry
)
