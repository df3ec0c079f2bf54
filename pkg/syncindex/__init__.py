# Expose classes and functions as API.
from syncindex.exceptions import *
from syncindex.types import *
from syncindex.graph import (
    WeightProfile, Constant, Affine, Sinusoid, WeightSegment, WeightSchedule, GraphSignal, laplacian_at,
    union_weights, algebraic_connectivity, lambda2_cut_bound, check_joint_connectivity, is_jointly_connected,
    find_min_window, validate_precompactness,
)
from syncindex.lti import (
    Plant, ModeReport, controllability_matrix, is_controllable, pbh_modes, uncontrollable_modes,
    spectrum_in_closed_rhp, is_neutrally_stable, expm,
)
from syncindex.design import (
    GainDesign, GammaSweep, solve_care, solve_neutral_lyapunov, kappa2_estimate, design_explicit, design_riccati,
    design_neutral, algorithm1_search,
)
from syncindex.sim import (
    Trajectory, integrate, error_projection, lyapunov_value, alpha_at, state_transition, gram_set,
)
from syncindex.analyze import (
    GuecVerdict, Theorem4Checklist, window_alpha_integrals, fit_exponential_rate, guec_verdict, theorem4_checklist,
    uncontrollable_witness_report,
)

__version__ = "1.0.0"
