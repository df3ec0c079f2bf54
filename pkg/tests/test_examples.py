"""
End-to-end runs of the bundled example scenarios.
"""
import numpy as np
import pytest
import scipy.linalg

from syncindex import Classification, pipeline
from syncindex.design import closest_sweep_entry, design_riccati
from syncindex.graph import check_joint_connectivity, is_jointly_connected
from syncindex.sim import gram_set

pytestmark = pytest.mark.slow

# Reference P for example 2 (kappa1 = 0.0042, Q = I), to five digits.
REFERENCE_P = 1e3 * np.array([
    [3.3367, -1.9075, 2.3841],
    [-1.9075, 1.9073, -1.907],
    [2.3841, -1.9075, 3.3367],
])


def test_example_ex1(scenario, tmp_path):
    result = pipeline.run(scenario, tmp_path)
    p, design = scenario.build_plant(), result.design
    assert np.array_equal(p.A.T @ design.P + design.P @ p.A, np.zeros((3, 3)))
    assert np.allclose(design.K, p.B.T @ design.P)
    assert design.kappa1 == design.kappa2
    assert design.index_ok

    verdict = result.verdict
    assert verdict.classification == Classification.exponential
    assert verdict.rate_fit.r_squared >= 0.9
    assert verdict.rate_fit.gamma_hat > 0
    assert verdict.rate_fit.t_start == pytest.approx(4.0)
    assert verdict.lower_bound_a > 0
    assert np.all(verdict.window_integrals > 0)
    assert result.consistency is not None
    assert result.consistency.ok

    checklist = result.checklist
    assert checklist.controllable
    assert checklist.jointly_connected
    assert checklist.precompact_certified
    assert checklist.overall
    assert set(result.files) >= {"trajectory", "windows", "alpha_windows", "gram", "report", "verdict"}


def test_example_ex2(scenario, tmp_path):
    result = pipeline.run(scenario, tmp_path)
    sweep, design = result.sweep, result.design
    assert sweep.min_eig_scaled[-1] == pytest.approx(0.072, abs=0.005)
    # The closed-loop Gram ratio keeps shrinking with gamma, so the sweep never settles.
    kappa2 = np.array(sweep.kappa2_list)
    assert np.all(np.isfinite(kappa2)) and np.all(kappa2 > 0)
    assert kappa2[0] == pytest.approx(2.5e-6, rel=0.2)
    assert kappa2[-1] == pytest.approx(2.3e-9, rel=0.2)
    assert not sweep.converged
    assert len(sweep) == scenario.design.k_max
    assert design.kappa2 / design.kappa1 < 1e-3
    assert not design.index_ok
    assert design.residual <= 1e-8 * scenario.n
    assert not result.checklist.index_ok
    assert not result.checklist.overall
    # Every Riccati gain leaves a growing disagreement mode on this switching star.
    assert result.verdict.classification == Classification.divergent
    assert result.verdict.V_ratio > 1e2
    assert result.consistency is None

    entry, distance = closest_sweep_entry(sweep, REFERENCE_P)
    assert any(entry is candidate for candidate in sweep.entries)
    assert np.isfinite(distance)

    rows = (tmp_path / "sweep.csv").read_text().splitlines()
    assert rows[0] == "k,gamma,lambda_min_scaled_P,lambda_max_scaled_P,kappa2,sync_index"
    assert len(rows) == len(sweep) + 1


def test_gram_quadrature_ex2(scenario):
    p = scenario.build_plant()
    design = design_riccati(p, 0.05)
    dt = scenario.sim.dt
    coarse = gram_set(p, design.K, design.P, scenario.graph, 0.0, 2.0, dt)
    fine = gram_set(p, design.K, design.P, scenario.graph, 0.0, 2.0, dt / 2)
    for a, b in ((coarse.F2, fine.F2), (coarse.F4, fine.F4)):
        assert scipy.linalg.eigvalsh(a)[0] == pytest.approx(scipy.linalg.eigvalsh(b)[0], rel=1e-3)
        assert scipy.linalg.eigvalsh(a)[-1] == pytest.approx(scipy.linalg.eigvalsh(b)[-1], rel=1e-3)


def test_example_ex3(scenario, tmp_path):
    result = pipeline.run(scenario, tmp_path)
    assert not result.checklist.controllable
    assert not result.checklist.overall
    witness = result.witness
    assert witness is not None
    assert witness.eigenvalue.real == pytest.approx(2.0)
    assert witness.relative_error(2.0)[0] <= 1e-2
    # The second agent's projection stays at zero.
    assert np.abs(witness.projections[:, 1]).max() <= 1e-9 * max(1.0, np.abs(result.trajectory.states).max())
    assert witness.obstructed
    assert result.verdict.V_ratio >= 1e-2
    assert result.verdict.classification != Classification.exponential
    assert (tmp_path / "witness.csv").exists()


def test_example_ex4(scenario, tmp_path):
    analysis = scenario.analysis
    windows = check_joint_connectivity(scenario.graph, analysis.delta, 2.0, 100.0, 1.0)
    assert not is_jointly_connected(windows)

    result = pipeline.run(scenario, tmp_path)
    verdict = result.verdict
    late = verdict.window_starts > 50.0
    assert verdict.window_integrals[late].min() <= 1e-9
    assert verdict.lower_bound_a <= 1e-9
    assert verdict.classification == Classification.asymptotic_only
    V = result.trajectory.V
    assert np.all(np.diff(V) <= 1e-12 * V[:-1])
    assert not result.checklist.jointly_connected
    assert result.checklist.min_window is None
    assert not result.checklist.overall
