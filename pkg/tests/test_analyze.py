import math

import numpy as np
import pytest

from syncindex import Classification, NotApplicableError, PreconditionError
from syncindex.analyze import (
    GuecVerdict, RateFit, classify, decay_consistency, decay_constants, fit_exponential_rate, guec_verdict, is_uniform,
    restart_rates, scaled_witness, theorem4_checklist, uncontrollable_witness_report,
    window_alpha_integrals,
)
from syncindex.design import design_explicit
from syncindex.lti import Plant
from syncindex.sim import Trajectory, integrate


def synthetic(times, log_V, n=1, N=2):
    """
    Trajectory with a prescribed ln V. alpha is its negative derivative.
    """
    times = np.asarray(times, dtype=float)
    log_V = np.asarray(log_V, dtype=float)
    V = np.exp(log_V)
    alpha = -np.gradient(log_V, times)
    size = n * N
    states = np.zeros((len(times), size))
    return Trajectory(times, states, states.copy(), V, alpha, n, N, np.eye(n))


def exponential(rate=0.4, span=20.0, scale=3.0, dt=0.01):
    times = np.arange(0.0, span + dt / 2, dt)
    return synthetic(times, math.log(scale) - 2 * rate * times)


def test_window_alpha_integrals():
    traj = exponential(rate=0.25)
    verdict = window_alpha_integrals(traj, 2.0)
    assert verdict.window_T == 2.0
    assert verdict.lower_bound_a == pytest.approx(1.0)
    assert verdict.alpha_upper == pytest.approx(0.5)
    assert np.allclose(verdict.window_integrals, 1.0)
    assert verdict.window_starts[-1] <= traj.times[-1] - 2.0 + 1e-9
    assert len(verdict.alpha_integrals) == len(verdict.window_starts)
    with pytest.raises(PreconditionError, match="positive"):
        window_alpha_integrals(traj, 0.0)
    with pytest.raises(PreconditionError, match="2T"):
        window_alpha_integrals(traj, 15.0)


def test_window_alpha_integrals_skips_converged():
    traj = exponential(rate=0.25)
    traj.alpha[len(traj) // 2:] = np.nan
    verdict = window_alpha_integrals(traj, 2.0)
    assert verdict.window_starts[-1] <= 10.0
    assert verdict.lower_bound_a == pytest.approx(1.0)


def test_fit_exponential_rate():
    traj = exponential(rate=0.4, scale=3.0)
    fit = fit_exponential_rate(traj, t_skip=2.0)
    assert fit.gamma_hat == pytest.approx(0.4)
    assert fit.slope == pytest.approx(-0.8)
    assert fit.intercept == pytest.approx(math.log(3.0))
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.t_start == pytest.approx(2.0)
    assert not fit.truncated
    assert fit.as_tuple()[0] == fit.gamma_hat
    # 10 % of the span is skipped by default.
    assert fit_exponential_rate(traj).t_start == pytest.approx(2.0)


def test_fit_exponential_rate_truncated():
    times = np.arange(0.0, 50.0, 0.01)
    log_V = -2.0 * times
    traj = synthetic(times, log_V)
    traj.V[times > 30.0] = 0.0
    fit = fit_exponential_rate(traj, t_skip=1.0)
    assert fit.truncated
    assert fit.t_stop <= 30.0
    assert fit.gamma_hat == pytest.approx(1.0)


def test_fit_exponential_rate_too_few_samples():
    with pytest.raises(PreconditionError, match="Too few"):
        fit_exponential_rate(exponential(), t_skip=19.995)


def test_restart_rates():
    rates = restart_rates(exponential(rate=0.3), 2.0)
    assert len(rates) == 5
    assert rates == pytest.approx([0.3] * 5)


@pytest.mark.parametrize("rates,uniform", [
    ([1.0, 1.1, 0.9], True),
    ([1.0, 2.0, 1.0], False),
    ([1.0], None),
    ([], None),
    ([0.0, 0.0], True),
])
def test_is_uniform(rates, uniform):
    assert is_uniform(rates) == uniform


def _verdict(a):
    return GuecVerdict(
        window_T=1.0, window_starts=np.zeros(1), window_integrals=np.full(1, a), lower_bound_a=a, alpha_upper=1.0
    )


@pytest.mark.parametrize("a,gamma_hat,r_squared,V_ratio,expected", [
    (0.5, 0.2, 0.99, 1e-6, Classification.exponential),
    (0.5, 0.2, 0.5, 1e-6, Classification.asymptotic_only),
    (0.0, 0.2, 0.99, 1e-6, Classification.asymptotic_only),
    (-1.0, -0.5, 0.99, 1e6, Classification.divergent),
    (0.5, -0.1, 0.99, 0.5, Classification.inconclusive),
    (1e-5, 0.2, 0.99, 0.5, Classification.inconclusive),
])
def test_classify(a, gamma_hat, r_squared, V_ratio, expected):
    fit = RateFit(gamma_hat=gamma_hat, intercept=0.0, r_squared=r_squared, t_start=0.0, t_stop=1.0)
    assert classify(_verdict(a), fit, V_ratio) == expected


def test_guec_verdict_exponential():
    traj = exponential(rate=0.4, span=30.0)
    verdict = guec_verdict(traj, 2.0)
    assert verdict.exponential
    assert verdict.classification == Classification.exponential
    assert verdict.rate_fit.gamma_hat == pytest.approx(0.4)
    assert verdict.V_ratio == pytest.approx(math.exp(-0.8 * 30.0))
    assert verdict.uniform is True
    consistency = decay_consistency(traj, verdict)
    assert consistency.gamma3 == pytest.approx(1.0)
    assert consistency.gamma4 == pytest.approx(0.8)
    assert consistency.ok


def test_guec_verdict_divergent():
    times = np.arange(0.0, 10.0, 0.01)
    verdict = guec_verdict(synthetic(times, 1.0 * times), 1.0)
    assert verdict.classification == Classification.divergent
    assert verdict.lower_bound_a < 0
    assert not verdict.exponential


def test_guec_verdict_asymptotic():
    # V decays like t^-8: ln V is far from a straight line and restarts disagree.
    times = np.arange(0.0, 2000.0, 0.05)
    verdict = guec_verdict(synthetic(times, -8.0 * np.log1p(times)), 2.0, t_skip=0.0)
    assert verdict.rate_fit.r_squared < 0.9
    assert verdict.classification == Classification.asymptotic_only
    assert verdict.uniform is False


def test_decay_constants_oscillating():
    times = np.arange(0.0, 40.0, 0.001)
    traj = synthetic(times, -times + 0.5 * np.sin(3 * times))
    verdict = guec_verdict(traj, 2.0)
    gamma3, gamma4 = decay_constants(traj, verdict)
    assert gamma4 == pytest.approx(1.0, rel=1e-2)
    # ln V wobbles by 0.5 either way.
    assert 1.0 < gamma3 <= math.exp(1.2)
    consistency = decay_consistency(traj, verdict)
    assert consistency.sufficiency_ok
    assert consistency.necessity_ok


def test_scaled_witness():
    assert np.allclose(scaled_witness(np.array([0.0, 2.0, -4.0])), [0.0, 1.0, -2.0])
    v = scaled_witness(np.array([1j, 1.0 + 0j]))
    assert v[0] == pytest.approx(1.0)
    assert np.iscomplexobj(v)


def test_witness_ex3(scenario):
    p = scenario.build_plant()
    design = design_explicit(p, K=scenario.design.K)
    traj = integrate(p, design.K, scenario.graph, scenario.initial_state(), 3.0, 0.001)
    report = uncontrollable_witness_report(p, traj)
    assert report.eigenvalue == pytest.approx(2.0)
    assert np.allclose(report.v, [1.0, -2.0, 1.0])
    # x0 projects to 6 for the first agent and to 0 for the second.
    assert report.projections[0] == pytest.approx([6.0, 0.0])
    assert report.zero == [False, True]
    assert report.growth_rates[0] == pytest.approx(2.0, abs=1e-3)
    assert report.r_squared[0] == pytest.approx(1.0)
    assert report.obstructed
    assert report.relative_error(2.5)[0] < 1e-6
    assert report.predicted(1.0)[0] == pytest.approx(6.0 * math.exp(2.0))


def test_witness_not_applicable():
    with pytest.raises(NotApplicableError):
        uncontrollable_witness_report(Plant([[0, 1], [0, 0]], [[0], [1]]), exponential())
    with pytest.raises(PreconditionError, match="states"):
        uncontrollable_witness_report(Plant([[0, 1], [0, 2]], [[1], [0]]), exponential())


def test_checklist_ex3(scenario):
    p = scenario.build_plant()
    design = design_explicit(p, K=scenario.design.K)
    analysis = scenario.analysis
    checklist = theorem4_checklist(
        p, scenario.graph, design, analysis.delta, analysis.T, scenario.horizon, scenario.stride
    )
    assert not checklist.controllable
    assert checklist.spectrum_rhp
    assert checklist.precompact_certified
    assert checklist.jointly_connected
    assert checklist.sync_index is None
    assert not checklist.index_ok
    assert not checklist.overall
    assert len(checklist.uncontrollable_modes) == 1
    assert checklist.uncontrollable_modes[0].eigenvalue == pytest.approx(2.0)
    assert checklist.min_window is not None
    assert checklist.failing_windows == []
    assert list(checklist.flags()) == [
        "controllable", "spectrum_rhp", "precompact_certified", "jointly_connected", "index_ok", "overall"
    ]


def test_checklist_ex4(scenario):
    p = scenario.build_plant()
    design = design_explicit(p, K=scenario.design.K, P=scenario.design.P)
    analysis = scenario.analysis
    checklist = theorem4_checklist(
        p, scenario.graph, design, analysis.delta, analysis.T, scenario.horizon, scenario.stride
    )
    assert checklist.controllable
    assert not checklist.jointly_connected
    assert checklist.failing_windows
    assert checklist.min_window is None
    assert not checklist.overall
