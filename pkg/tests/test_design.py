import math

import numpy as np
import pytest
import scipy.linalg

from syncindex import NotNeutrallyStableError, PreconditionError, RiccatiError
from syncindex.design import (
    GainDesign, GammaSweep, algorithm1_search, care_residual, check_lyapunov_matrix, closest_sweep_entry,
    design_explicit, design_neutral, design_riccati, kappa2_estimate, kappa2_over_grid, psd_sqrt,
    solve_care, solve_neutral_lyapunov,
)
from syncindex.graph.connectivity import window_starts
from syncindex.lti import Plant, is_observable
from syncindex.types import DesignKind


EX1 = Plant([[0, 1, 0], [-2, 0, 1], [0, 1, 0]], [0, 1, 1])
EX2 = Plant([[2, 1, 0], [1, 2, 1], [0, 1, 2]], [[1, 0], [1, 1], [0, 1]])
EX3 = Plant([[0, 1, -1], [-1, 2, -1], [0, -1, 1]], [[1, 0], [1, 1], [1, 2]])
P_STAR = np.array([[11.0, 0.0, -8.0], [0.0, 1.5, 0.0], [-8.0, 0.0, 6.5]])


def random_unstable_plant(rng):
    """
    Random (A, B) with every eigenvalue of A in the closed right half-plane and a
    well conditioned controllability matrix (each A^k B block normalized).
    """
    while True:
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, 3))
        A = rng.normal(size=(n, n))
        A += (rng.uniform(0.0, 0.5) - np.linalg.eigvals(A).real.min()) * np.eye(n)
        B = rng.normal(size=(n, m))
        blocks = [np.linalg.matrix_power(A, k) @ B for k in range(n)]
        s = scipy.linalg.svdvals(np.hstack([block / scipy.linalg.norm(block) for block in blocks]))
        if s[-1] >= 0.1 * s[0]:
            return Plant(A, B)


@pytest.mark.parametrize("kappa1", [0.1, 1.0, 10.0])
def test_solve_care_random(rng, kappa1):
    for _ in range(100):
        plant = random_unstable_plant(rng)
        Q = np.eye(plant.n)
        P = solve_care(plant, kappa1, Q)
        assert np.allclose(P, P.T)
        assert scipy.linalg.eigvalsh(P)[0] >= 1e-10
        residual = scipy.linalg.norm(care_residual(plant, kappa1, Q, P))
        assert residual <= 1e-8 * plant.n
        closed = np.linalg.eigvals(plant.A - kappa1 * plant.B @ plant.B.T @ P)
        assert closed.real.max() < 0
        # A positive definite Q makes B^T P detect every unstable mode.
        assert is_observable(plant.A, plant.B.T @ P)


def test_solve_care_ex1():
    PB = P_STAR @ EX1.B
    P = solve_care(EX1, 1.0, PB @ PB.T)
    assert np.allclose(P, P_STAR, rtol=1e-6, atol=1e-8)


def test_solve_care_scaling():
    Q = np.eye(3)
    P = solve_care(EX2, 0.5, Q)
    for c in (0.1, 2.0, 7.5):
        assert np.allclose(solve_care(EX2, 0.5 * c, Q / c), P / c, rtol=1e-7)


def test_solve_care_reference_ex2():
    # Reference P for example 2: the Riccati solution with kappa1 = 0.0042 and Q = I, to five digits.
    reference = 1e3 * np.array([
        [3.3367, -1.9075, 2.3841],
        [-1.9075, 1.9073, -1.907],
        [2.3841, -1.9075, 3.3367],
    ])
    P = solve_care(EX2, 0.0042)
    assert scipy.linalg.norm(P - reference) <= 1e-3 * scipy.linalg.norm(reference)
    assert scipy.linalg.norm(solve_care(EX2, 1 / 24) - reference) > 0.5 * scipy.linalg.norm(reference)


def test_solve_care_errors():
    with pytest.raises(PreconditionError, match="kappa1"):
        solve_care(EX2, 0.0)
    with pytest.raises(PreconditionError, match="kappa1"):
        solve_care(EX2, -1.0)
    with pytest.raises(RiccatiError) as info:
        solve_care(EX3, 0.5)
    assert info.value.kappa1 == 0.5
    with pytest.raises(PreconditionError, match="observable"):
        solve_care(EX2, 1.0, np.zeros((3, 3)))
    with pytest.raises(PreconditionError, match="symmetric"):
        solve_care(EX2, 1.0, [[1, 1, 0], [0, 1, 0], [0, 0, 1]])
    with pytest.raises(PreconditionError, match="semidefinite"):
        solve_care(EX2, 1.0, -np.eye(3))
    with pytest.raises(PreconditionError, match="3x3"):
        solve_care(EX2, 1.0, np.eye(2))


def test_psd_sqrt(rng):
    M = rng.normal(size=(4, 4))
    Q = M @ M.T
    R = psd_sqrt(Q)
    assert np.allclose(R, R.T)
    assert np.allclose(R @ R, Q)


def test_solve_neutral_lyapunov():
    P = solve_neutral_lyapunov(EX1.A)
    assert np.allclose(EX1.A.T @ P + P @ EX1.A, 0.0, atol=1e-10)
    eigenvalues = scipy.linalg.eigvalsh(P)
    assert eigenvalues[0] > 0
    assert eigenvalues[-1] == pytest.approx(1.0)
    scaled = solve_neutral_lyapunov(EX1.A, scale=4.0)
    assert scipy.linalg.eigvalsh(scaled)[-1] == pytest.approx(4.0)
    assert np.allclose(solve_neutral_lyapunov(np.zeros((2, 2))), np.eye(2))
    rotation = solve_neutral_lyapunov([[0, 2], [-0.5, 0]])
    assert scipy.linalg.eigvalsh(rotation)[0] > 0


@pytest.mark.parametrize("A", [
    EX2.A,
    [[0, 1], [0, 0]],
    [[-1, 0], [0, 0]],
])
def test_solve_neutral_lyapunov_errors(A):
    with pytest.raises(NotNeutrallyStableError) as info:
        solve_neutral_lyapunov(A)
    assert isinstance(info.value.eigenvalue, complex)


def test_solve_neutral_lyapunov_bad_input():
    with pytest.raises(PreconditionError):
        solve_neutral_lyapunov(np.zeros((2, 3)))
    with pytest.raises(PreconditionError):
        solve_neutral_lyapunov(EX1.A, scale=0.0)


@pytest.mark.parametrize("F2,F4,ratio,pencil", [
    (np.diag([2.0, 4.0]), np.diag([1.0, 2.0]), 2.0, 4.0),
    (np.diag([1.0, 3.0]), np.zeros((2, 2)), math.inf, math.inf),
    (np.diag([1.0, 0.0]), np.eye(2), 0.0, 0.0),
    (np.diag([1.0, 0.0]), np.diag([1.0, 0.0]), 0.0, 2.0),
])
def test_kappa2_estimate(F2, F4, ratio, pencil):
    assert kappa2_estimate(F2, F4, "ratio") == pytest.approx(ratio)
    assert kappa2_estimate(F2, F4, "pencil") == pytest.approx(pencil)


def test_kappa2_estimate_random(rng):
    for _ in range(50):
        M2 = rng.normal(size=(5, 5))
        M4 = rng.normal(size=(5, 5))
        F2 = M2 @ M2.T + 0.1 * np.eye(5)
        F4 = M4 @ M4.T
        ratio = kappa2_estimate(F2, F4)
        pencil = kappa2_estimate(F2, F4, "pencil")
        assert pencil >= ratio * (1 - 1e-9)
        # The pencil value is the largest one keeping F2 - (kappa2 / 2) F4 semidefinite.
        scale = scipy.linalg.norm(F2)
        assert scipy.linalg.eigvalsh(F2 - pencil / 2 * F4)[0] >= -1e-8 * scale
        assert scipy.linalg.eigvalsh(F2 - 1.01 * pencil / 2 * F4)[0] < 0


def test_kappa2_estimate_errors():
    with pytest.raises(PreconditionError, match="symmetric"):
        kappa2_estimate([[1, 1], [0, 1]], np.eye(2))
    with pytest.raises(PreconditionError, match="differ"):
        kappa2_estimate(np.eye(2), np.eye(3))
    with pytest.raises(PreconditionError, match="Unknown"):
        kappa2_estimate(np.eye(2), np.eye(2), "largest")


def test_check_lyapunov_matrix():
    assert np.allclose(check_lyapunov_matrix(P_STAR, 3), P_STAR)
    with pytest.raises(PreconditionError, match="3x3"):
        check_lyapunov_matrix(np.eye(2), 3)
    with pytest.raises(PreconditionError, match="symmetric"):
        check_lyapunov_matrix([[1, 1], [0, 1]], 2)
    with pytest.raises(PreconditionError, match="positive definite"):
        check_lyapunov_matrix(np.diag([1.0, 0.0]), 2)


def test_design_explicit():
    design = design_explicit(EX1, P=P_STAR)
    assert design.kind == DesignKind.explicit
    assert np.allclose(design.K, EX1.B.T @ P_STAR)
    assert design.sync_index is None
    assert not design.index_ok

    K = [[1, 2, 1], [2, 1, 3]]
    design = design_explicit(EX3, K=K)
    assert design.P is None
    assert design.K.shape == (2, 3)

    with pytest.raises(PreconditionError, match="needs K or P"):
        design_explicit(EX1)
    with pytest.raises(PreconditionError, match="K must be"):
        design_explicit(EX3, K=[[1, 2, 1]])


def test_gain_design_sync_index():
    design = GainDesign(K=np.ones((1, 3)), kappa1=0.5, kappa2=1.0)
    assert design.sync_index == pytest.approx(2.0)
    assert design.index_ok
    assert "sync index=2" in str(design)
    assert not GainDesign(K=np.ones((1, 3)), kappa1=0.5, kappa2=0.25).index_ok


def test_design_riccati():
    design = design_riccati(EX2, 0.25)
    assert design.kind == DesignKind.riccati
    assert design.kappa1 == 0.25
    assert design.kappa2 is None
    assert np.allclose(design.Q, np.eye(3))
    assert np.allclose(design.K, EX2.B.T @ design.P)
    assert design.residual < 1e-8


def test_design_neutral_ex1(scenario):
    p = scenario.build_plant()
    design = design_neutral(p, scenario.graph, scenario.analysis.T, dt=scenario.sim.dt)
    assert design.kind == DesignKind.neutral_lyapunov
    assert 0 < design.kappa2 < math.inf
    assert design.kappa1 == design.kappa2
    assert design.sync_index == pytest.approx(1.0)
    assert design.index_ok
    # P solves the Riccati equation with the conventional Q as well.
    assert scipy.linalg.norm(care_residual(p, design.kappa1, design.Q, design.P)) < 1e-8
    assert design.kappa2_detail.periodic
    assert len(design.kappa2_detail.grid) == 1


def test_design_neutral_errors():
    design = design_neutral(EX1)
    assert design.kappa2 is None
    assert np.allclose(EX1.A.T @ design.P + design.P @ EX1.A, 0.0, atol=1e-10)
    assert np.allclose(design_neutral(EX1, P=P_STAR).P, P_STAR)
    with pytest.raises(PreconditionError, match="does not solve"):
        design_neutral(EX1, P=np.eye(3))
    with pytest.raises(NotNeutrallyStableError):
        design_neutral(EX2)


def test_kappa2_over_grid_ex4(scenario):
    p = scenario.build_plant()
    K = np.array(scenario.design.K)
    P = np.array(scenario.design.P)
    with pytest.raises(PreconditionError, match="horizon"):
        kappa2_over_grid(p, K, P, scenario.graph, 2.0)
    estimate = kappa2_over_grid(p, K, P, scenario.graph, 2.0, dt=0.01, horizon=6.0, stride=1.0)
    assert not estimate.periodic
    assert estimate.stride == 1.0
    assert [row[0] for row in estimate.grid] == pytest.approx(window_starts(2.0, 6.0, 1.0))
    assert estimate.kappa2 == min(row[1] for row in estimate.grid)
    for _, kappa2, lambda_min, lambda_max in estimate.grid:
        assert kappa2 == pytest.approx(2 * max(lambda_min, 0.0) / lambda_max)


def test_algorithm1_search_errors_ex2(scenario):
    with pytest.raises(PreconditionError, match="k_max"):
        algorithm1_search(EX2, scenario.graph, 2.0, k_max=0)
    with pytest.raises(PreconditionError, match="controllable"):
        algorithm1_search(EX3, scenario.graph, 2.0, k_max=3)


def test_algorithm1_search_neutral_ex1(scenario):
    sweep, design = algorithm1_search(EX1, scenario.graph, 2.0, k_max=5, dt=scenario.sim.dt)
    assert len(sweep) == 0
    assert design.kind == DesignKind.neutral_lyapunov
    with pytest.raises(PreconditionError, match="empty"):
        closest_sweep_entry(sweep, P_STAR)


@pytest.mark.slow
def test_algorithm1_search_ex2(scenario):
    p = scenario.build_plant()
    sweep, design = algorithm1_search(p, scenario.graph, 2.0, k_max=3, dt=scenario.sim.dt)
    assert len(sweep) == 3
    assert not sweep.converged
    assert sweep.gammas == pytest.approx([1.0 / k for k in range(1, len(sweep) + 1)])
    best = sweep.best()
    assert all(best.sync_index >= entry.sync_index for entry in sweep.entries)
    assert design.kind == DesignKind.algorithm1
    assert design.kappa1 == best.gamma
    assert design.kappa2 == best.kappa2
    assert design.residual < 1e-6
    assert design.kappa2_detail is best.estimate
    for entry in sweep.entries:
        assert 0 < entry.lambda_min_scaled_P <= 1.0
        assert entry.lambda_max_scaled_P == 1.0
    entry, distance = closest_sweep_entry(sweep, sweep.entries[-1].P)
    assert entry is sweep.entries[-1]
    assert distance == pytest.approx(0.0, abs=1e-12)


def test_gamma_sweep_best():
    assert GammaSweep().best() is None
