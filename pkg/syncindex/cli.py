"""
Command line interface.

Exit codes: 0 on success, 1 on a runtime failure, 2 on a usage error.
"""
from __future__ import annotations

import argparse
import logging
import pathlib
import sys
from typing import List, Optional

import numpy as np

import syncindex
from syncindex import constants, pipeline, report
from syncindex.design import algorithm1_search, design_riccati
from syncindex.exceptions import SyncIndexError
from syncindex.graph import check_joint_connectivity, is_jointly_connected, validate_precompactness
from syncindex.scenario import bundled_scenario, load_scenario

logger = logging.getLogger(__name__)


def _print_design(design):
    print(str(design))
    print(f"P =\n{np.array2string(np.asarray(design.P), precision=6)}")
    print(f"K =\n{np.array2string(np.asarray(design.K), precision=6)}")
    if design.residual is not None:
        print(f"residual = {design.residual:.3e}")


def cmd_run(args) -> int:
    configs = [load_scenario(path) for path in args.scenario]
    if len(configs) == 1:
        result = pipeline.run(configs[0], args.out, args.jobs)
        print(f"{configs[0].name}: {result.verdict.classification.name} ({args.out})")
        return 0
    status = 0
    for name, error in pipeline.run_many(configs, args.out, args.jobs):
        if error:
            print(f"{name}: failed: {error}", file=sys.stderr)
            status = 1
        else:
            print(f"{name}: done ({pathlib.Path(args.out) / name})")
    return status


def cmd_check_connectivity(args) -> int:
    config = load_scenario(args.scenario)
    windows = check_joint_connectivity(config.graph, args.delta, args.window, args.horizon, args.stride)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report.write_windows_csv(windows, out / report.WINDOWS_CSV)
    connected = is_jointly_connected(windows)
    failing = [window for window in windows if not window.connected]
    print(f"jointly connected: {str(connected).lower()} ({len(windows)} windows, {len(failing)} disconnected)")
    if failing:
        print(f"first disconnected window: {failing[0]}")
    return 0


def cmd_design_gain(args) -> int:
    config = load_scenario(args.scenario)
    p = config.build_plant()
    T = pipeline.design_window(config)
    options = dict(dt=config.sim.dt, horizon=config.horizon, stride=config.stride, method=config.design.method)
    sweep = None
    if args.kappa1 is not None:
        Q = None if config.design.Q is None else np.array(config.design.Q)
        design = design_riccati(p, args.kappa1, Q, config.graph, T, **options)
    elif args.sweep is not None:
        sweep, design = algorithm1_search(p, config.graph, T, args.sweep, jobs=args.jobs, **options)
    else:
        design, sweep = pipeline.build_design(config, p, args.jobs)
    _print_design(design)
    if sweep is not None and sweep.entries:
        out = pathlib.Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = report.write_sweep_csv(sweep, out / report.SWEEP_CSV)
        print(f"{len(sweep)} sweep steps written to {path}")
    return 0


def cmd_validate_topology(args) -> int:
    config = load_scenario(args.scenario)
    print(validate_precompactness(config.graph, args.horizon, args.c, args.c_hat, args.min_dwell))
    return 0


def cmd_examples(args) -> int:
    config = bundled_scenario(args.which)
    result = pipeline.run(config, args.out, args.jobs)
    print(f"Example {args.which}: {result.verdict.classification.name} ({args.out})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="syncindex",
        description="Consensus of linear agents over time-varying graphs: design, simulation and certification.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {syncindex.__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log debug messages.")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Log warnings and errors only.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="Design, simulate and analyze scenarios.")
    run.add_argument("scenario", nargs="+", help="Scenario JSON file(s).")
    run.add_argument("--out", required=True, help="Output directory (one sub-directory per scenario when several).")
    run.add_argument("--jobs", type=int, default=constants.JOBS, help="Worker processes.")
    run.set_defaults(func=cmd_run)

    check = subparsers.add_parser("check-connectivity", help="Scan windows for joint (delta, T)-connectivity.")
    check.add_argument("scenario")
    check.add_argument("--delta", type=float, required=True)
    check.add_argument("--window", type=float, required=True, help="Window length T.")
    check.add_argument("--horizon", type=float, required=True)
    check.add_argument("--stride", type=float, default=None, help="Defaults to T/10.")
    check.add_argument("--out", default=".", help="Directory for windows.csv.")
    check.set_defaults(func=cmd_check_connectivity)

    design = subparsers.add_parser("design-gain", help="Compute P, K, kappa2 and the synchronization index.")
    design.add_argument("scenario")
    choice = design.add_mutually_exclusive_group()
    choice.add_argument("--kappa1", type=float, default=None, help="Riccati design with this kappa1.")
    choice.add_argument("--sweep", type=int, default=None, metavar="K_MAX", help="Gamma sweep up to k = K_MAX.")
    design.add_argument("--out", default=".", help="Directory for sweep.csv.")
    design.add_argument("--jobs", type=int, default=constants.JOBS)
    design.set_defaults(func=cmd_design_gain)

    topology = subparsers.add_parser("validate-topology", help="Certify precompactness of the weight schedules.")
    topology.add_argument("scenario")
    topology.add_argument("--horizon", type=float, required=True)
    topology.add_argument("--c", type=float, default=None, help="Slope bound (defaults to 10 w*).")
    topology.add_argument("--c-hat", type=float, default=None, help="Jump over dwell bound (defaults to 10 w*).")
    topology.add_argument("--min-dwell", type=float, default=None, help="Dwell floor for piecewise-constant edges.")
    topology.set_defaults(func=cmd_validate_topology)

    examples = subparsers.add_parser("examples", help="Run a bundled example scenario.")
    examples.add_argument("--which", type=int, choices=(1, 2, 3, 4), required=True)
    examples.add_argument("--out", required=True)
    examples.add_argument("--jobs", type=int, default=constants.JOBS)
    examples.set_defaults(func=cmd_examples)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    try:
        return args.func(args)
    except (SyncIndexError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
