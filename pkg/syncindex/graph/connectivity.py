"""
Joint (delta, T)-connectivity scans over sliding windows.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from syncindex import constants
from syncindex.exceptions import PreconditionError
from syncindex.graph.signal import Edge, GraphSignal

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WindowReport:
    """
    Union graph over [window_start, window_start + window_len] and whether
    its delta-graph is connected.
    """
    window_start: float
    window_len: float
    union_weights: np.ndarray = field(repr=False, compare=False)
    delta: float
    delta_graph_edges: Tuple[Edge, ...]
    connected: bool

    def __str__(self) -> str:
        status = "connected" if self.connected else "disconnected"
        return f"[{self.window_start}, {self.window_start + self.window_len}] {status} ({len(self.delta_graph_edges)} edges)"

    @property
    def n_nodes(self) -> int:
        return self.union_weights.shape[0]

    def delta_graph(self) -> nx.Graph:
        """
        Graph on every node whose edges are the pairs with union weight >= delta.
        """
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n_nodes))
        graph.add_edges_from(self.delta_graph_edges)
        return graph


def window_report(g: GraphSignal, t0: float, T: float, delta: float) -> WindowReport:
    """
    Builds the delta-graph of a single window.
    """
    W = g.union_weights(t0, t0 + T)
    rows, cols = np.nonzero(np.triu(W >= delta, k=1))
    edges = tuple((int(i), int(j)) for i, j in zip(rows, cols))
    graph = nx.Graph()
    graph.add_nodes_from(range(g.n_nodes))
    graph.add_edges_from(edges)
    return WindowReport(
        window_start=t0,
        window_len=T,
        union_weights=W,
        delta=delta,
        delta_graph_edges=edges,
        connected=nx.is_connected(graph),
    )


def window_starts(T: float, horizon: float, stride: float) -> List[float]:
    """
    Window starts 0, stride, 2*stride, ... with start + T <= horizon.
    """
    count = math.floor((horizon - T) / stride + 1e-9) + 1
    return [k * stride for k in range(max(count, 0))]


def check_joint_connectivity(
    g: GraphSignal, delta: float, T: float, horizon: float, stride: float = None
) -> List[WindowReport]:
    """
    Scans windows of length T across [0, horizon] and reports the delta-graph of each.

    :param g: Graph to scan.
    :param delta: Minimum union weight for a pair to count as an edge.
    :param T: Window length.
    :param horizon: Scan span. Windows end no later than this.
    :param stride: Distance between window starts (defaults to T/10).
    :raises PreconditionError: If a parameter is non-positive or horizon < T.
    :raises OutOfDomainError: If the horizon exceeds the graph's span.
    """
    if stride is None:
        stride = constants.STRIDE_FRACTION * T
    if delta <= 0 or T <= 0 or stride <= 0:
        raise PreconditionError(f"delta, T and stride must be positive, got {delta}, {T}, {stride}")
    if horizon < T:
        raise PreconditionError(f"Horizon {horizon} is shorter than the window length {T}")
    reports = [window_report(g, start, T, delta) for start in window_starts(T, horizon, stride)]
    failing = sum(not report.connected for report in reports)
    logger.debug(f"Scanned {len(reports)} windows (delta={delta}, T={T}, stride={stride}): {failing} disconnected")
    return reports


def is_jointly_connected(reports: Sequence[WindowReport]) -> bool:
    """
    Overall verdict of a window scan.
    """
    return bool(reports) and all(report.connected for report in reports)


def find_min_window(
    g: GraphSignal, delta: float, T: float, horizon: float, stride: float = None
) -> Optional[float]:
    """
    Smallest window length among T/4, T/2, 3T/4 and T for which every window in the
    horizon passes, or None when none does.
    """
    for fraction in constants.WINDOW_CANDIDATES:
        candidate = fraction * T
        candidate_stride = stride if stride is not None else constants.STRIDE_FRACTION * candidate
        if is_jointly_connected(check_joint_connectivity(g, delta, candidate, horizon, candidate_stride)):
            logger.debug(f"Smallest passing window length: {candidate}")
            return candidate
    return None
