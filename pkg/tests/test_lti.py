
import numpy as np
import pytest

from syncindex import PreconditionError
from syncindex.lti import (
    Plant, controllability_matrix, expm, is_controllable, is_neutrally_stable, is_observable, is_stabilizable,
    numerical_rank, observability_matrix, pbh_modes, spectrum_in_closed_rhp, uncontrollable_modes,
)


EX1 = Plant([[0, 1, 0], [-2, 0, 1], [0, 1, 0]], [0, 1, 1])
EX2 = Plant([[2, 1, 0], [1, 2, 1], [0, 1, 2]], [[1, 0], [1, 1], [0, 1]])
EX3 = Plant([[0, 1, -1], [-1, 2, -1], [0, -1, 1]], [[1, 0], [1, 1], [1, 2]])


def test_plant():
    assert EX1.n == 3
    assert EX1.m == 1
    assert EX1.B.shape == (3, 1)
    assert EX2 == Plant(EX2.A.copy(), EX2.B.copy())
    assert EX1 != EX2
    with pytest.raises(ValueError):
        EX1.A[0, 0] = 1.0
    with pytest.raises(PreconditionError, match="square"):
        Plant([[0, 1]], [[1]])
    with pytest.raises(PreconditionError, match="rows"):
        Plant(np.eye(2), np.ones((3, 1)))
    with pytest.raises(PreconditionError, match="non-finite"):
        Plant([[np.nan]], [[1]])


@pytest.mark.parametrize("plant,controllable", [
    (EX1, True),
    (EX2, True),
    (EX3, False),
    (Plant(np.zeros((2, 2)), np.eye(2)), True),
    (Plant(np.diag([1.0, 2.0]), [1, 0]), False),
])
def test_is_controllable(plant, controllable):
    assert is_controllable(plant) == controllable
    assert (numerical_rank(controllability_matrix(plant)) == plant.n) == controllable


def test_controllability_matrix():
    C = controllability_matrix(EX1)
    assert C.shape == (3, 3)
    assert np.allclose(C[:, 0], [0, 1, 1])
    assert np.allclose(C[:, 1], EX1.A @ [0, 1, 1])
    with pytest.raises(PreconditionError):
        is_controllable(EX1, tol=0.0)


def test_observability():
    A = np.array([[0, 1], [0, 0]])
    assert observability_matrix(A, [[1, 0]]).shape == (2, 2)
    assert is_observable(A, [[1, 0]])
    assert not is_observable(A, [[0, 1]])
    with pytest.raises(PreconditionError):
        observability_matrix(A, [[1, 0, 0]])


def test_pbh_modes_ex3():
    modes = pbh_modes(EX3)
    assert sorted(mode.eigenvalue.real for mode in modes) == pytest.approx([0.0, 1.0, 2.0], abs=1e-9)
    uncontrollable = uncontrollable_modes(EX3)
    assert len(uncontrollable) == 1
    mode = uncontrollable[0]
    # The uncontrollable eigenvalue is 2.
    assert mode.eigenvalue == pytest.approx(2.0)
    assert mode.is_real
    v = mode.left_eigenvector
    witness = np.array([1.0, -2.0, 1.0])
    cosine = abs(v @ witness) / (np.linalg.norm(v) * np.linalg.norm(witness))
    assert cosine >= 0.999
    assert np.allclose(v @ EX3.A, 2.0 * v)
    assert np.allclose(v @ EX3.B, 0.0, atol=1e-12)
    # Largest entry is normalized positive.
    assert v[np.argmax(np.abs(v))] > 0
    assert "uncontrollable" in str(mode)


def test_pbh_modes_complex_pairs():
    modes = pbh_modes(EX1)
    assert len(modes) == 3
    assert all(mode.controllable for mode in modes)
    complex_modes = [mode for mode in modes if not mode.is_real]
    assert len(complex_modes) == 2
    assert complex_modes[0].eigenvalue == pytest.approx(complex_modes[1].eigenvalue.conjugate())
    for mode in complex_modes:
        v = mode.left_eigenvector
        assert np.allclose(v.conj() @ EX1.A, mode.eigenvalue * v.conj())


def test_pbh_modes_repeated():
    plant = Plant(np.zeros((2, 2)), [[1], [0]])
    modes = pbh_modes(plant)
    assert len(modes) == 1
    assert modes[0].multiplicity == 2
    assert not modes[0].controllable
    assert not modes[0].degenerate
    assert abs(modes[0].left_eigenvector @ plant.B[:, 0]) < 1e-12
    # Jordan block: defective, yet controllable through its last state.
    jordan = pbh_modes(Plant([[0, 1], [0, 0]], [[0], [1]]))
    assert jordan[0].degenerate
    assert jordan[0].controllable
    with pytest.raises(PreconditionError):
        pbh_modes(plant, tol=-1.0)


def random_uncontrollable_plant(rng):
    """(A, B) in a random basis with a block that B never reaches."""
    n_reached = int(rng.integers(1, 3))
    n_hidden = int(rng.integers(1, 3))
    n = n_reached + n_hidden
    A = np.zeros((n, n))
    A[:n_reached, :n_reached] = rng.normal(size=(n_reached, n_reached))
    A[:n_reached, n_reached:] = rng.normal(size=(n_reached, n_hidden))
    A[n_reached:, n_reached:] = rng.normal(size=(n_hidden, n_hidden))
    B = np.zeros((n, 1))
    B[:n_reached, 0] = rng.normal(size=n_reached)
    T = rng.normal(size=(n, n)) + n * np.eye(n)
    return Plant(T @ A @ np.linalg.inv(T), T @ B)


def test_pbh_matches_kalman(rng):
    plants = [Plant(rng.normal(size=(3, 3)), rng.normal(size=(3, 1))) for _ in range(20)]
    plants += [random_uncontrollable_plant(rng) for _ in range(20)]
    for plant in plants:
        modes = pbh_modes(plant)
        assert all(mode.controllable for mode in modes) == is_controllable(plant)
        for mode in modes:
            v = mode.left_eigenvector
            assert np.allclose(v.conj() @ plant.A, mode.eigenvalue * v.conj(), atol=1e-6)
    assert all(uncontrollable_modes(plant) for plant in plants[20:])


def test_left_eigenvector_nonsymmetric():
    # Right eigenvector [1, 0] and left eigenvector [1, -1] for eigenvalue 1.
    plant = Plant([[1, 1], [0, 2]], [[1], [1]])
    mode = next(mode for mode in pbh_modes(plant) if mode.eigenvalue.real < 1.5)
    v = mode.left_eigenvector
    assert abs(v[0] + v[1]) < 1e-12
    assert not mode.controllable
    assert not is_controllable(plant)
    assert not is_stabilizable(plant)


@pytest.mark.parametrize("plant,stabilizable", [
    (EX3, False),
    (Plant(np.diag([-1.0, 2.0]), [0, 1]), True),
    (Plant(np.diag([-1.0, 2.0]), [1, 0]), False),
])
def test_is_stabilizable(plant, stabilizable):
    assert is_stabilizable(plant) == stabilizable


@pytest.mark.parametrize("A,rhp,neutral", [
    (EX1.A, True, True),
    (EX2.A, True, False),
    (np.zeros((2, 2)), True, True),
    ([[0, 1], [0, 0]], True, False),
    (np.diag([-1.0, 0.0]), False, False),
    ([[0, 1], [-1, 0]], True, True),
])
def test_spectrum_classes(A, rhp, neutral):
    assert spectrum_in_closed_rhp(A) == rhp
    assert is_neutrally_stable(A) == neutral


def test_spectrum_in_closed_rhp_tol():
    assert spectrum_in_closed_rhp(np.diag([-1e-3, 1.0]), tol=1e-2)
    with pytest.raises(PreconditionError):
        spectrum_in_closed_rhp(EX1.A, tol=-1.0)


def test_expm():
    rotation = expm([[0, 1], [-1, 0]], np.pi / 2)
    assert np.allclose(rotation, [[0, 1], [-1, 0]], atol=1e-12)
    assert np.allclose(expm(np.zeros((3, 3)), 5.0), np.eye(3))
    A = EX2.A
    assert np.allclose(expm(A, 0.3) @ expm(A, 0.7), expm(A, 1.0))
    with pytest.raises(PreconditionError):
        expm(A, np.inf)
