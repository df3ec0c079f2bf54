"""
Time-varying undirected weighted graphs.
"""
from __future__ import annotations

import itertools
import logging
import math
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple

import numpy as np

from syncindex.exceptions import PreconditionError
from syncindex.graph.schedule import WeightSchedule, _close

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


def edge_key(i: int, j: int) -> Edge:
    """
    Normalizes an unordered node pair into (min, max).

    :raises PreconditionError: For self-loops.
    """
    if i == j:
        raise PreconditionError(f"Self-loop on node {i} is not allowed.")
    return (i, j) if i < j else (j, i)


class GraphSignal:
    """
    N nodes plus one weight schedule per unordered node pair.
    Pairs without a schedule have zero weight.
    """

    def __init__(self, n_nodes: int, schedules: Mapping[Tuple[int, int], WeightSchedule] = None):
        if n_nodes < 1:
            raise PreconditionError(f"A graph needs at least one node, got {n_nodes}")
        self.n_nodes = int(n_nodes)
        self.schedules: Dict[Edge, WeightSchedule] = {}
        for (i, j), schedule in (schedules or {}).items():
            key = edge_key(i, j)
            if not (0 <= key[0] and key[1] < self.n_nodes):
                raise PreconditionError(f"Edge {key} references a node outside 0..{self.n_nodes - 1}")
            if key in self.schedules:
                raise PreconditionError(f"Edge {key} declared twice.")
            self.schedules[key] = schedule
        self.schedules = dict(sorted(self.schedules.items()))

    def __repr__(self) -> str:
        return f"<GraphSignal N={self.n_nodes}, edges={list(self.schedules)}>"

    def __eq__(self, other) -> bool:
        return isinstance(other, GraphSignal) and self.n_nodes == other.n_nodes and self.schedules == other.schedules

    @property
    def edges(self) -> List[Edge]:
        """
        Declared edges in lexicographic order.
        """
        return list(self.schedules)

    @property
    def all_pairs(self) -> List[Edge]:
        """
        Every unordered node pair in lexicographic order.
        """
        return list(itertools.combinations(range(self.n_nodes), 2))

    @property
    def w_star(self) -> float:
        return max((schedule.w_star for schedule in self.schedules.values()), default=0.0)

    @property
    def end(self) -> float:
        """
        End of the span on which every schedule is declared.
        """
        return min((schedule.end for schedule in self.schedules.values()), default=math.inf)

    @property
    def period(self) -> Optional[float]:
        """
        Common period of the graph, or None when the graph is not periodic.
        Constant edges are compatible with any period.
        """
        periods = []
        for schedule in self.schedules.values():
            if schedule.is_constant and schedule.end == math.inf:
                continue
            if schedule.period is None:
                return None
            periods.append(schedule.period)
        if not periods:
            return None
        first = periods[0]
        if all(_close(period, first) for period in periods):
            return first
        return None

    @property
    def is_piecewise_constant(self) -> bool:
        return all(schedule.is_piecewise_constant for schedule in self.schedules.values())

    def weights_at(self, t: float, anchor: float = None) -> np.ndarray:
        """
        Adjacency matrix W(t).

        :param t: Time to evaluate at.
        :param anchor: Time selecting the active segments (defaults to t). Used to
            evaluate left limits at the end of a piece.
        :raises OutOfDomainError: If t is outside any schedule span.
        """
        anchor = t if anchor is None else anchor
        W = np.zeros((self.n_nodes, self.n_nodes))
        for (i, j), schedule in self.schedules.items():
            segment, shift = schedule.segment_at(anchor)
            W[i, j] = W[j, i] = segment.value(t - shift)
        return W

    def laplacian_at(self, t: float, anchor: float = None) -> np.ndarray:
        """
        Laplacian L(t) = diag(degrees) - W(t).

        :raises OutOfDomainError: If t is outside any schedule span.
        """
        W = self.weights_at(t, anchor)
        return np.diag(W.sum(axis=1)) - W

    def augmented_laplacian_at(self, t: float, anchor: float = None) -> np.ndarray:
        return augmented_laplacian(self.laplacian_at(t, anchor))

    def breakpoints(self, t0: float, t1: float) -> List[float]:
        """
        Sorted times in (t0, t1) where any edge switches segment.

        :raises OutOfDomainError: If the window exceeds a schedule span.
        """
        points = set()
        for schedule in self.schedules.values():
            points.update(schedule.breakpoints(t0, t1))
        merged = []
        for point in sorted(points):
            if merged and _close(point, merged[-1]):
                continue
            if _close(point, t0) or _close(point, t1):
                continue
            merged.append(point)
        return merged

    def intervals(self, t0: float, t1: float) -> Iterator[Tuple[float, float, bool]]:
        """
        Iterates (start, end, constant) intervals of [t0, t1] on which every edge
        follows a single closed form. ``constant`` is True when all weights are
        constant over the interval.
        """
        points = [t0] + self.breakpoints(t0, t1) + [t1]
        for start, end in zip(points, points[1:]):
            mid = 0.5 * (start + end)
            constant = True
            for schedule in self.schedules.values():
                segment, _ = schedule.segment_at(mid)
                if not segment.profile.is_constant:
                    constant = False
                    break
            yield start, end, constant

    def union_weights(self, t0: float, t1: float) -> np.ndarray:
        """
        Adjacency matrix of the union graph over [t0, t1]: entry (i, j) is the
        exact integral of w_ij.

        :raises PreconditionError: If the window is empty.
        :raises OutOfDomainError: If the window exceeds a schedule span.
        """
        if not 0 <= t0 < t1:
            raise PreconditionError(f"Union window needs 0 <= t0 < t1, got [{t0}, {t1}]")
        W = np.zeros((self.n_nodes, self.n_nodes))
        for (i, j), schedule in self.schedules.items():
            W[i, j] = W[j, i] = schedule.integral(t0, t1)
        return W

    def perturbed(self, eps: float) -> "GraphSignal":
        """
        Returns the graph with every declared edge weight raised by eps.
        """
        return GraphSignal(self.n_nodes, {edge: schedule.shifted(eps) for edge, schedule in self.schedules.items()})

    @classmethod
    def static(cls, weights: np.ndarray) -> "GraphSignal":
        """
        Builds a time-invariant graph from a symmetric adjacency matrix.
        """
        weights = np.asarray(weights, dtype=float)
        n = weights.shape[0]
        schedules = {
            (i, j): WeightSchedule.constant(weights[i, j])
            for i, j in itertools.combinations(range(n), 2)
            if weights[i, j] != 0
        }
        return cls(n, schedules)


def laplacian_at(g: GraphSignal, t: float) -> np.ndarray:
    """
    Laplacian matrix of the graph at time t.
    """
    return g.laplacian_at(t)


def union_weights(g: GraphSignal, t0: float, t1: float) -> np.ndarray:
    """
    Union graph adjacency matrix over [t0, t1].
    """
    return g.union_weights(t0, t1)


def augmented_laplacian(L: np.ndarray) -> np.ndarray:
    """
    L + (1/N) 1 1^T. Shifts the eigenvalue of the all-ones direction from 0 to 1
    and leaves the rest of the spectrum alone.

    :raises PreconditionError: If L is not square.
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise PreconditionError(f"Laplacian must be square, got shape {L.shape}")
    n = L.shape[0]
    return L + np.full((n, n), 1.0 / n)
