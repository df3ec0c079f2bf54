"""
Runs a scenario end to end: design the gain, integrate the agents, analyze the
trajectory and write the artifacts.
"""
from __future__ import annotations

import logging
import multiprocessing
import pathlib
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from syncindex import report
from syncindex.analyze import (
    DecayConsistency, GuecVerdict, Theorem4Checklist, WitnessReport, guec_verdict, decay_consistency,
    theorem4_checklist, uncontrollable_witness_report,
)
from syncindex.design import (
    GainDesign, GammaSweep, algorithm1_search, design_explicit, design_neutral, design_riccati, kappa2_over_grid,
)
from syncindex.exceptions import SyncIndexError
from syncindex.lti import Plant, uncontrollable_modes
from syncindex.scenario import ScenarioConfig
from syncindex.sim import Trajectory, integrate
from syncindex.types import DesignKind

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    config: ScenarioConfig = field(repr=False)
    design: GainDesign
    trajectory: Trajectory
    verdict: GuecVerdict
    checklist: Theorem4Checklist = field(repr=False)
    sweep: Optional[GammaSweep] = field(default=None, repr=False)
    consistency: Optional[DecayConsistency] = None
    witness: Optional[WitnessReport] = field(default=None, repr=False)
    files: Dict[str, pathlib.Path] = field(default_factory=dict, repr=False)


def design_window(config: ScenarioConfig) -> float:
    return config.design.T if config.design.T is not None else config.analysis.T


def build_design(config: ScenarioConfig, p: Plant, jobs: int = 1) -> Tuple[GainDesign, Optional[GammaSweep]]:
    """
    Computes the scenario's gain design. Only algorithm1 designs come with a sweep.
    """
    requested = config.design
    g, T = config.graph, design_window(config)
    options = dict(dt=config.sim.dt, horizon=config.horizon, stride=config.stride, method=requested.method)
    logger.info(f"Designing {requested.kind.name} gain for {config.name}")
    if requested.kind == DesignKind.explicit:
        design = design_explicit(p, requested.K, requested.P)
        if design.P is not None and requested.T is not None:
            design = design.with_kappa2(kappa2_over_grid(p, design.K, design.P, g, T, **options))
        return design, None
    if requested.kind == DesignKind.riccati:
        Q = None if requested.Q is None else np.array(requested.Q)
        return design_riccati(p, requested.kappa1, Q, g, T, **options), None
    if requested.kind == DesignKind.neutral_lyapunov:
        P = None if requested.P is None else np.array(requested.P)
        return design_neutral(p, g, T, P, **options), None
    sweep, design = algorithm1_search(p, g, T, requested.k_max, jobs=jobs, **options)
    return design, sweep


def simulate(config: ScenarioConfig, p: Plant, design: GainDesign) -> Trajectory:
    P = design.P if design.P is not None else np.eye(p.n)
    return integrate(p, design.K, config.graph, config.initial_state(), config.sim.t_end, config.sim.dt, P)


def analyze(
    config: ScenarioConfig, p: Plant, design: GainDesign, traj: Trajectory
) -> Tuple[GuecVerdict, Theorem4Checklist, Optional[DecayConsistency], Optional[WitnessReport]]:
    analysis = config.analysis
    verdict = guec_verdict(traj, analysis.T, config.t_skip)
    consistency = decay_consistency(traj, verdict) if verdict.exponential else None
    checklist = theorem4_checklist(p, config.graph, design, analysis.delta, analysis.T, config.horizon, config.stride)
    witness = uncontrollable_witness_report(p, traj) if uncontrollable_modes(p) else None
    return verdict, checklist, consistency, witness


def write_artifacts(result: RunResult, out: pathlib.Path) -> Dict[str, pathlib.Path]:
    """
    Writes every CSV that applies plus verdict.json and report.txt into ``out``.
    """
    out.mkdir(parents=True, exist_ok=True)
    config = result.config
    files = {
        "trajectory": report.write_trajectory_csv(
            result.trajectory.decimated(config.sim.record_every), out / report.TRAJECTORY_CSV
        ),
        "windows": report.write_windows_csv(result.checklist.windows, out / report.WINDOWS_CSV),
        "alpha_windows": report.write_alpha_windows_csv(result.verdict, out / report.ALPHA_WINDOWS_CSV),
    }
    if result.design.kappa2_detail is not None:
        files["gram"] = report.write_gram_csv(result.design.kappa2_detail, design_window(config), out / report.GRAM_CSV)
    if result.sweep is not None and result.sweep.entries:
        files["sweep"] = report.write_sweep_csv(result.sweep, out / report.SWEEP_CSV)
    if result.witness is not None:
        files["witness"] = report.write_witness_csv(result.witness, out / report.WITNESS_CSV)
    files["report"] = report.write_report_txt(
        out / report.REPORT_TXT,
        report.format_report(
            config.name, result.design, result.verdict, result.checklist, result.consistency, result.witness
        ),
    )
    files["verdict"] = out / report.VERDICT_JSON
    report.write_verdict_json(
        files["verdict"], config.name, result.design, result.verdict, result.checklist, result.consistency,
        result.witness, files={key: path.name for key, path in files.items()},
    )
    return files


def run(config: ScenarioConfig, out, jobs: int = 1) -> RunResult:
    """
    Executes design, integration and analysis for a scenario and writes its artifacts.

    :param config: Validated scenario.
    :param out: Output directory (created when missing).
    :param jobs: Worker processes for the gamma sweep.
    :raises SyncIndexError: From any stage, logged with the scenario name.
    """
    out = pathlib.Path(out)
    try:
        p = config.build_plant()
        design, sweep = build_design(config, p, jobs)
        logger.info(str(design))
        traj = simulate(config, p, design)
        logger.debug(f"Integrated {traj!r}")
        verdict, checklist, consistency, witness = analyze(config, p, design, traj)
    except SyncIndexError as e:
        logger.error(f"Scenario {config.name} failed: {e}")
        raise
    result = RunResult(config, design, traj, verdict, checklist, sweep, consistency, witness)
    result.files = write_artifacts(result, out)
    logger.info(f"Wrote {len(result.files)} files to {out}")
    return result


def _run_job(args) -> Tuple[str, Optional[str]]:
    config, out = args
    try:
        run(config, out)
    except Exception as e:
        return config.name, f"{type(e).__name__}: {e}"
    return config.name, None


def run_many(configs: Sequence[ScenarioConfig], out, jobs: int = 1) -> List[Tuple[str, Optional[str]]]:
    """
    Runs several scenarios, each into its own sub-directory named after the scenario.

    :returns: (scenario name, error message or None) per scenario, in input order.
    """
    out = pathlib.Path(out)
    arguments = [(config, out / config.name) for config in configs]
    if jobs > 1 and len(arguments) > 1:
        with multiprocessing.Pool(min(jobs, len(arguments))) as pool:
            return pool.map(_run_job, arguments)
    return [_run_job(args) for args in arguments]
