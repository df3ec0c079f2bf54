"""
Stores global constants and defaults used in syncindex
"""
import os

# Integration
DEFAULT_DT = 1e-3
ZERO_ERROR_GUARD = 1e-14
EXPONENTIAL_CACHE_SIZE = 64  # step exponentials kept per process

# Structural tests
RANK_TOL = 1e-8

# Riccati / Lyapunov solvers
NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 25
MAX_BASIS_CONDITION = 1e12
SYMMETRY_TOL = 1e-10

# Algorithm 1
DEFAULT_K_MAX = 50
KAPPA2_RTOL = 1e-4

# Topology
LIMIT_FACTOR = 10.0   # c = c_hat = LIMIT_FACTOR * w_star unless given
MIN_DWELL = 1e-3      # shortest interval between jumps that certifies by dwell time
STRIDE_FRACTION = 0.1  # stride = STRIDE_FRACTION * T unless given
WINDOW_CANDIDATES = (0.25, 0.5, 0.75, 1.0)

# GUEC classification
R2_THRESHOLD = 0.9
A_MIN = 1e-4
DECAY_RATIO = 100.0
T_SKIP_FRACTION = 0.1
FIT_FLOOR_RATIO = 1e-24
UNIFORMITY_RESTARTS = 5
UNIFORMITY_RTOL = 0.3
DECAY_CONSISTENCY_RTOL = 0.2
LOG_V_FLOOR = 1e-300


def _positive(name: str, value: str, type_):
    try:
        value = type_(value)
    except ValueError:
        value = None
    if value is None or value <= 0:
        raise ValueError(f"Invalid {name} set: '{os.environ[name]}'. Should be a positive {type_.__name__}.")
    return value


_dt = os.environ.get("SYNCINDEX_DT", "")
DT = _positive("SYNCINDEX_DT", _dt, float) if _dt else DEFAULT_DT

_jobs = os.environ.get("SYNCINDEX_JOBS", "")
JOBS = _positive("SYNCINDEX_JOBS", _jobs, int) if _jobs else 1
