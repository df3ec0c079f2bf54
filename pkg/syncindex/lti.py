"""
Agent model (A, B) and classical structural tests.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List

import numpy as np
import scipy.linalg

from syncindex import constants
from syncindex.exceptions import PreconditionError

logger = logging.getLogger(__name__)

# Eigenvalues closer than this (relative) are treated as one repeated eigenvalue.
_CLUSTER_TOL = 1e-6


def _matrix(value, name: str) -> np.ndarray:
    array = np.atleast_2d(np.asarray(value, dtype=float))
    if array.ndim != 2:
        raise PreconditionError(f"{name} must be a matrix, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise PreconditionError(f"{name} has non-finite entries")
    return array


class Plant:
    """
    Identical agent dynamics x' = A x + B u.
    """

    def __init__(self, A, B):
        A = _matrix(A, "A")
        B = np.asarray(B, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        B = _matrix(B, "B")
        if A.shape[0] != A.shape[1]:
            raise PreconditionError(f"A must be square, got shape {A.shape}")
        if B.shape[0] != A.shape[0]:
            raise PreconditionError(f"B has {B.shape[0]} rows but A is {A.shape[0]}x{A.shape[0]}")
        self.A = A
        self.B = B
        self.A.setflags(write=False)
        self.B.setflags(write=False)

    def __repr__(self) -> str:
        return f"<Plant n={self.n}, m={self.m}>"

    def __eq__(self, other) -> bool:
        return isinstance(other, Plant) and np.array_equal(self.A, other.A) and np.array_equal(self.B, other.B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def eigenvalues(self) -> np.ndarray:
        return scipy.linalg.eigvals(self.A)


@dataclass(frozen=True)
class ModeReport:
    """
    An eigenvalue of A with a unit left eigenvector v and its PBH controllability.

    When the eigenvalue is repeated, v is the direction of its left eigenspace least
    reached by B. ``degenerate`` flags a defective eigenvalue (fewer independent
    eigenvectors than its multiplicity).
    """
    eigenvalue: complex
    left_eigenvector: np.ndarray
    controllable: bool
    multiplicity: int = 1
    degenerate: bool = False

    def __str__(self) -> str:
        status = "controllable" if self.controllable else "uncontrollable"
        flag = " (defective)" if self.degenerate else ""
        return f"lambda={self.eigenvalue:.6g}: {status}{flag}"

    @property
    def is_real(self) -> bool:
        return self.eigenvalue.imag == 0


def controllability_matrix(p: Plant) -> np.ndarray:
    """
    [B, AB, ..., A^(n-1) B]
    """
    blocks = [p.B]
    for _ in range(p.n - 1):
        blocks.append(p.A @ blocks[-1])
    return np.hstack(blocks)


def observability_matrix(A, C) -> np.ndarray:
    """
    [C; CA; ...; C A^(n-1)]
    """
    A = _matrix(A, "A")
    C = _matrix(C, "C")
    if C.shape[1] != A.shape[0]:
        raise PreconditionError(f"C has {C.shape[1]} columns but A is {A.shape[0]}x{A.shape[0]}")
    blocks = [C]
    for _ in range(A.shape[0] - 1):
        blocks.append(blocks[-1] @ A)
    return np.vstack(blocks)


def numerical_rank(M: np.ndarray, tol: float = constants.RANK_TOL) -> int:
    """
    Number of singular values above tol times the largest one.
    """
    s = scipy.linalg.svdvals(M)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def is_controllable(p: Plant, tol: float = constants.RANK_TOL) -> bool:
    """
    Kalman rank test.

    :param p: Plant to test.
    :param tol: Relative singular value threshold.
    :raises PreconditionError: If tol is not positive.
    """
    if tol <= 0:
        raise PreconditionError(f"Rank tolerance must be positive, got {tol}")
    return numerical_rank(controllability_matrix(p), tol) == p.n


def is_observable(A, C, tol: float = constants.RANK_TOL) -> bool:
    """
    Kalman rank test on the pair (A, C).

    :raises PreconditionError: If tol is not positive or the shapes disagree.
    """
    if tol <= 0:
        raise PreconditionError(f"Rank tolerance must be positive, got {tol}")
    O = observability_matrix(A, C)
    return numerical_rank(O, tol) == O.shape[1]


def _clusters(eigenvalues: np.ndarray) -> List[List[complex]]:
    clusters: List[List[complex]] = []
    for value in sorted(eigenvalues, key=lambda z: (z.real, z.imag)):
        for cluster in clusters:
            center = np.mean(cluster)
            if abs(value - center) <= _CLUSTER_TOL * max(1.0, abs(center)):
                cluster.append(value)
                break
        else:
            clusters.append([value])
    return clusters


def _left_eigenspace(A: np.ndarray, eigenvalue: complex) -> np.ndarray:
    """
    Orthonormal basis (columns) of {v : v^H A = eigenvalue v^H}.
    """
    n = A.shape[0]
    shifted = A - eigenvalue * np.eye(n)
    # v^H (A - lambda I) = 0  <=>  (A - lambda I)^H v = 0, the right null space of the adjoint.
    _, s, Vh = scipy.linalg.svd(shifted.conj().T)
    null_tol = np.sqrt(np.finfo(float).eps) * max(1.0, scipy.linalg.norm(A, 2))
    rank = int(np.sum(s > null_tol))
    V = Vh.conj().T
    return V[:, rank:] if rank < n else V[:, -1:]


def pbh_modes(p: Plant, tol: float = constants.RANK_TOL) -> List[ModeReport]:
    """
    Popov-Belevitch-Hautus test per eigenvalue of A.

    A mode is uncontrollable when some left eigenvector v has |v^H B| <= tol.
    Complex modes are reported as conjugate pairs sharing one flag.

    :param p: Plant to test.
    :param tol: Threshold on |v^H B| (scaled by max(1, |B|)).
    :raises PreconditionError: If tol is not positive.
    """
    if tol <= 0:
        raise PreconditionError(f"PBH tolerance must be positive, got {tol}")
    threshold = tol * max(1.0, scipy.linalg.norm(p.B, 2))
    modes = []
    for cluster in _clusters(p.eigenvalues):
        eigenvalue = complex(np.mean(cluster))
        if eigenvalue.imag < -_CLUSTER_TOL * max(1.0, abs(eigenvalue)):
            continue  # reported with its conjugate
        real = abs(eigenvalue.imag) <= _CLUSTER_TOL * max(1.0, abs(eigenvalue))
        if real:
            eigenvalue = complex(eigenvalue.real, 0.0)
            basis = _left_eigenspace(p.A, eigenvalue.real)
        else:
            basis = _left_eigenspace(p.A, eigenvalue)

        projection = basis.conj().T @ p.B
        U, s, _ = scipy.linalg.svd(projection)
        if basis.shape[1] > p.m:
            reach, direction = 0.0, U[:, -1]
        else:
            reach, direction = s[-1], U[:, len(s) - 1]
        v = basis @ direction
        v = v / scipy.linalg.norm(v)
        if real:
            v = np.real(v * np.exp(-1j * np.angle(v[np.argmax(np.abs(v))])))
        controllable = bool(reach > threshold)
        degenerate = basis.shape[1] < len(cluster)
        if degenerate:
            logger.warning(f"Eigenvalue {eigenvalue:.6g} is defective: {basis.shape[1]} eigenvectors for multiplicity {len(cluster)}")
        modes.append(ModeReport(eigenvalue, v, controllable, len(cluster), degenerate))
        if not real:
            modes.append(ModeReport(eigenvalue.conjugate(), v.conj(), controllable, len(cluster), degenerate))
    return modes


def uncontrollable_modes(p: Plant, tol: float = constants.RANK_TOL) -> List[ModeReport]:
    return [mode for mode in pbh_modes(p, tol) if not mode.controllable]


def is_stabilizable(p: Plant, tol: float = constants.RANK_TOL) -> bool:
    """
    PBH test restricted to eigenvalues with nonnegative real part.
    """
    return all(mode.controllable or mode.eigenvalue.real < -tol for mode in pbh_modes(p, tol))


def spectrum_in_closed_rhp(A, tol: float = constants.RANK_TOL) -> bool:
    """
    Whether every eigenvalue of A has real part >= -tol.

    :raises PreconditionError: If tol is negative.
    """
    if tol < 0:
        raise PreconditionError(f"Spectrum tolerance must be nonnegative, got {tol}")
    return bool(np.all(scipy.linalg.eigvals(_matrix(A, "A")).real >= -tol))


def is_neutrally_stable(A, tol: float = constants.RANK_TOL) -> bool:
    """
    Whether every eigenvalue of A lies on the imaginary axis and is semisimple.
    """
    A = _matrix(A, "A")
    eigenvalues = scipy.linalg.eigvals(A)
    scale = max(1.0, scipy.linalg.norm(A, 2))
    if np.any(np.abs(eigenvalues.real) > np.sqrt(tol) * scale):
        return False
    for cluster in _clusters(eigenvalues):
        if len(cluster) > 1 and _left_eigenspace(A, complex(np.mean(cluster))).shape[1] < len(cluster):
            return False
    return True


def expm(A, t: float = 1.0) -> np.ndarray:
    """
    Matrix exponential e^(A t) by scaling and squaring with a Pade approximant.

    :raises PreconditionError: If A or t is not finite.
    """
    A = _matrix(A, "A")
    if not np.isfinite(t):
        raise PreconditionError(f"Time must be finite, got {t}")
    return scipy.linalg.expm(A * t)
