"""
Writers for the artifacts of a run: CSV tables, verdict.json and report.txt.

Numbers are written in their shortest round-trip decimal form (repr), so equal
runs produce byte-identical files. NaN cells are left empty.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import pathlib
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from syncindex.analyze import DecayConsistency, GuecVerdict, Theorem4Checklist, WitnessReport
from syncindex.design import GainDesign, GammaSweep, Kappa2Estimate
from syncindex.graph import PrecompactnessReport, WindowReport
from syncindex.sim import Trajectory

logger = logging.getLogger(__name__)

TRAJECTORY_CSV = "trajectory.csv"
WINDOWS_CSV = "windows.csv"
ALPHA_WINDOWS_CSV = "alpha_windows.csv"
GRAM_CSV = "gram.csv"
SWEEP_CSV = "sweep.csv"
WITNESS_CSV = "witness.csv"
VERDICT_JSON = "verdict.json"
REPORT_TXT = "report.txt"


def format_number(value) -> str:
    """
    Shortest round-trip text of a number; NaN becomes an empty cell.

    >>> format_number(0.1), format_number(3), format_number(float("nan"))
    ('0.1', '3', '')
    """
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return ""
    return repr(value)


def _write_rows(path: pathlib.Path, header: Sequence[str], rows: Iterable[Sequence]) -> pathlib.Path:
    with open(path, "w", newline="", encoding="utf-8") as fo:
        writer = csv.writer(fo, lineterminator="\n")
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([format_number(value) for value in row])
            count += 1
    logger.debug(f"Wrote {count} rows to {path}")
    return path


def trajectory_to_rows(traj: Trajectory) -> Iterable[List[float]]:
    """
    Rows t, x[0..nN), e[0..nN), V, alpha, log_V.
    """
    log_V = traj.log_V
    for k in range(len(traj)):
        yield [traj.times[k], *traj.states[k], *traj.errors[k], traj.V[k], traj.alpha[k], log_V[k]]


def write_trajectory_csv(traj: Trajectory, path) -> pathlib.Path:
    size = traj.n * traj.N
    header = ["t", *(f"x{k}" for k in range(size)), *(f"e{k}" for k in range(size)), "V", "alpha", "log_V"]
    return _write_rows(pathlib.Path(path), header, trajectory_to_rows(traj))


def write_windows_csv(windows: Sequence[WindowReport], path) -> pathlib.Path:
    """
    One row per window: start, union weight of every node pair in lexicographic order, connected flag.
    """
    N = windows[0].n_nodes if windows else 0
    pairs = [(i, j) for i in range(N) for j in range(i + 1, N)]
    header = ["window_start", *(f"w_{i}_{j}" for i, j in pairs), "connected"]
    rows = (
        [window.window_start, *(window.union_weights[i, j] for i, j in pairs), window.connected]
        for window in windows
    )
    return _write_rows(pathlib.Path(path), header, rows)


def write_alpha_windows_csv(verdict: GuecVerdict, path) -> pathlib.Path:
    return _write_rows(pathlib.Path(path), ["window_start", "alpha_integral"], verdict.alpha_integrals)


def write_gram_csv(estimate: Kappa2Estimate, T: float, path) -> pathlib.Path:
    header = ["window_start", "T", "lambda_min_F2", "lambda_max_F4", "kappa2"]
    rows = ([t, T, lambda_min, lambda_max, kappa2] for t, kappa2, lambda_min, lambda_max in estimate.grid)
    return _write_rows(pathlib.Path(path), header, rows)


def write_sweep_csv(sweep: GammaSweep, path) -> pathlib.Path:
    header = ["k", "gamma", "lambda_min_scaled_P", "lambda_max_scaled_P", "kappa2", "sync_index"]
    rows = (
        [entry.k, entry.gamma, entry.lambda_min_scaled_P, entry.lambda_max_scaled_P, entry.kappa2, entry.sync_index]
        for entry in sweep.entries
    )
    return _write_rows(pathlib.Path(path), header, rows)


def write_witness_csv(witness: WitnessReport, path) -> pathlib.Path:
    """
    Rows t, projection of every agent on the witness vector (real parts) and the predicted value.
    """
    N = witness.projections.shape[1]
    header = ["t", *(f"v_x{i}" for i in range(N)), *(f"predicted{i}" for i in range(N))]
    rows = (
        [t, *np.real(witness.projections[k]), *np.real(witness.predicted(t))]
        for k, t in enumerate(witness.times)
    )
    return _write_rows(pathlib.Path(path), header, rows)


def _number(value) -> Optional[float]:
    # JSON has no NaN or infinity.
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def _flag(value) -> Optional[bool]:
    return None if value is None else bool(value)


def _matrix(matrix) -> Optional[list]:
    return None if matrix is None else np.asarray(matrix).tolist()


def design_summary(design: GainDesign) -> dict:
    return {
        "kind": design.kind.name,
        "K": _matrix(design.K),
        "P": _matrix(design.P),
        "kappa1": _number(design.kappa1),
        "kappa2": _number(design.kappa2),
        "sync_index": _number(design.sync_index),
        "index_ok": _flag(design.index_ok),
        "residual": _number(design.residual),
    }


def verdict_summary(verdict: GuecVerdict) -> dict:
    fit = verdict.rate_fit
    return {
        "classification": verdict.classification.name,
        "window_T": float(verdict.window_T),
        "lower_bound_a": _number(verdict.lower_bound_a),
        "alpha_upper": _number(verdict.alpha_upper),
        "gamma_hat": _number(fit.gamma_hat) if fit else None,
        "r_squared": _number(fit.r_squared) if fit else None,
        "fit_range": [float(fit.t_start), float(fit.t_stop)] if fit else None,
        "fit_truncated": _flag(fit.truncated) if fit else None,
        "V_ratio": _number(verdict.V_ratio),
        "restart_rates": [_number(rate) for rate in verdict.restart_rates],
        "uniform": _flag(verdict.uniform),
    }


def write_verdict_json(
    path,
    name: str,
    design: GainDesign,
    verdict: Optional[GuecVerdict] = None,
    checklist: Optional[Theorem4Checklist] = None,
    consistency: Optional[DecayConsistency] = None,
    witness: Optional[WitnessReport] = None,
    files: Dict[str, pathlib.Path] = None,
    extra: dict = None,
) -> pathlib.Path:
    """
    Machine readable summary: flags, numbers and the paths of the emitted CSVs.
    """
    data = {"scenario": name, "design": design_summary(design)}
    if verdict is not None:
        data["verdict"] = verdict_summary(verdict)
    if checklist is not None:
        data["checklist"] = {
            **{flag: _flag(value) for flag, value in checklist.flags().items()},
            "min_window": _number(checklist.min_window),
            "failing_windows": [float(window.window_start) for window in checklist.failing_windows],
            "uncontrollable_eigenvalues": [
                [float(mode.eigenvalue.real), float(mode.eigenvalue.imag)] for mode in checklist.uncontrollable_modes
            ],
            "certificates": {
                f"{i}-{j}": certificate.name for (i, j), certificate in checklist.precompactness.certificates.items()
            },
        }
    if consistency is not None:
        data["decay_consistency"] = {
            "gamma3": _number(consistency.gamma3),
            "gamma4": _number(consistency.gamma4),
            "sufficiency_ok": _flag(consistency.sufficiency_ok),
            "necessity_ok": _flag(consistency.necessity_ok),
        }
    if witness is not None:
        data["witness"] = {
            "eigenvalue": [float(witness.eigenvalue.real), float(witness.eigenvalue.imag)],
            "v": np.real(witness.v).tolist(),
            "growth_rates": [_number(rate) for rate in witness.growth_rates],
            "obstructed": _flag(witness.obstructed),
        }
    if extra:
        data.update(extra)
    data["files"] = {key: str(value) for key, value in sorted((files or {}).items())}
    path = pathlib.Path(path)
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
    return path


def _eigenvalue(value: complex) -> str:
    value = complex(value)
    if abs(value.imag) <= 1e-12 * max(1.0, abs(value)):
        return f"{value.real:.6g}"
    return f"{value:.6g}"


def format_report(
    name: str,
    design: GainDesign,
    verdict: Optional[GuecVerdict] = None,
    checklist: Optional[Theorem4Checklist] = None,
    consistency: Optional[DecayConsistency] = None,
    witness: Optional[WitnessReport] = None,
    precompactness: Optional[PrecompactnessReport] = None,
) -> str:
    lines = [f"Scenario: {name}", "", str(design)]
    if design.K is not None:
        lines.append(f"K = {np.array2string(np.asarray(design.K), precision=6)}")
    if design.P is not None:
        lines.append(f"P = {np.array2string(np.asarray(design.P), precision=6)}")
    if design.residual is not None:
        lines.append(f"residual = {design.residual:.3e}")

    if checklist is not None:
        lines += ["", "Checklist:"]
        lines += [f"  {flag:<22} {value}" for flag, value in checklist.flags().items()]
        if checklist.min_window is not None:
            lines.append(f"  smallest passing window {checklist.min_window}")
        for mode in checklist.uncontrollable_modes:
            lines.append(f"  uncontrollable mode {_eigenvalue(mode.eigenvalue)}, v = {np.array2string(np.real(mode.left_eigenvector), precision=4)}")
        failing = checklist.failing_windows
        if failing:
            lines.append(f"  {len(failing)} disconnected windows, first at t={failing[0].window_start}")
        precompactness = precompactness or checklist.precompactness
    if precompactness is not None:
        lines += ["", str(precompactness)]

    if verdict is not None:
        fit = verdict.rate_fit
        lines += [
            "",
            f"Classification: {verdict.classification.name}",
            f"  window T = {verdict.window_T}, a = {verdict.lower_bound_a:.6g}, alpha* = {verdict.alpha_upper:.6g}",
        ]
        if fit is not None:
            truncated = " (truncated)" if fit.truncated else ""
            lines.append(
                f"  ln V fit on [{fit.t_start:.4g}, {fit.t_stop:.4g}]{truncated}: "
                f"gamma_hat = {fit.gamma_hat:.6g}, r^2 = {fit.r_squared:.4f}"
            )
        lines.append(f"  V(end)/V(start) = {verdict.V_ratio:.6g}, uniform restarts: {verdict.uniform}")
    if consistency is not None:
        lines.append(
            f"  gamma3 = {consistency.gamma3:.6g}, gamma4 = {consistency.gamma4:.6g}, "
            f"sufficiency {'ok' if consistency.sufficiency_ok else 'FAILED'}, "
            f"necessity {'ok' if consistency.necessity_ok else 'FAILED'}"
        )
    if witness is not None:
        lines += [
            "",
            f"Witness for eigenvalue {_eigenvalue(witness.eigenvalue)}: v = {np.array2string(np.real(witness.v), precision=4)}",
            f"  growth rates {[round(rate, 6) for rate in witness.growth_rates]}, obstructed: {witness.obstructed}",
        ]
    return "\n".join(lines) + "\n"


def write_report_txt(path, text: str) -> pathlib.Path:
    path = pathlib.Path(path)
    path.write_text(text, encoding="utf-8")
    return path
