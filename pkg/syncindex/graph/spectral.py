"""
Spectral facts about graph Laplacians.
"""
from typing import Iterable

import numpy as np

from syncindex.exceptions import PreconditionError


def algebraic_connectivity(L: np.ndarray) -> float:
    """
    Second smallest eigenvalue of a Laplacian.
    """
    L = np.asarray(L, dtype=float)
    if L.shape[0] < 2:
        return 0.0
    return float(np.linalg.eigvalsh(L)[1])


def cut_weight(L: np.ndarray, S1: Iterable[int]) -> float:
    """
    Total weight of the edges leaving S1.
    """
    L = np.asarray(L, dtype=float)
    inside = np.zeros(L.shape[0], dtype=bool)
    inside[list(S1)] = True
    return float(-L[np.ix_(inside, ~inside)].sum())


def lambda2_cut_bound(L: np.ndarray, S1: Iterable[int]) -> float:
    """
    Upper bound on the algebraic connectivity from a two-way partition of the nodes:
    e(S1, S2)/|S1| + e(S2, S1)/|S2| with S2 the complement of S1.

    :param L: Laplacian matrix.
    :param S1: Node indices of one side of the cut.
    :raises PreconditionError: If S1 is empty, covers every node or names an unknown node.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    S1 = set(S1)
    if not S1 or len(S1) >= n:
        raise PreconditionError(f"Cut side must be a nontrivial subset of {n} nodes, got {sorted(S1)}")
    if min(S1) < 0 or max(S1) >= n:
        raise PreconditionError(f"Cut side {sorted(S1)} references a node outside 0..{n - 1}")
    weight = cut_weight(L, S1)
    return weight / len(S1) + weight / (n - len(S1))
