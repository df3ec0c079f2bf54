"""
Time-varying undirected weighted graphs: weight schedules, Laplacians, union graphs,
joint connectivity and precompactness certificates.
"""

from syncindex.graph.profile import WeightProfile, Constant, Affine, Sinusoid
from syncindex.graph.schedule import WeightSegment, WeightSchedule, Piece, weight_at
from syncindex.graph.signal import GraphSignal, edge_key, laplacian_at, union_weights, augmented_laplacian
from syncindex.graph.spectral import algebraic_connectivity, cut_weight, lambda2_cut_bound
from syncindex.graph.connectivity import (
    WindowReport, window_report, check_joint_connectivity, is_jointly_connected, find_min_window
)
from syncindex.graph.precompact import PrecompactnessReport, validate_precompactness
