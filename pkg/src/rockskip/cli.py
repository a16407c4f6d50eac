"""Command-line interface.

Subcommands: simulate (single DirectRelease throw), throw (full pipeline),
sweep (velocity/height grids), calibrate (fit the damping coefficient),
export (rebuild plot-ready files from a sweep directory).  Exits 0 on
success; on failure prints a one-line JSON error object and exits nonzero.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import harness
from .config import ExperimentConfig, Mode, config_to_dict, load_config, save_config
from .trajopt import trajectory_to_json


def _load(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    if getattr(args, "out", None):
        config.output_dir = args.out
    if getattr(args, "mode", None):
        config.mode = Mode(args.mode)
    return config


def cmd_simulate(args) -> int:
    config = _load(args)
    velocity = args.velocity if args.velocity is not None else 14.4
    height = args.height if args.height is not None else config.release.height
    result = harness.run_direct(config, velocity, height)
    paths = harness.save_run_outputs(
        config, result, config.output_dir, f"simulate_v{velocity:g}_h{height:g}"
    )
    print(
        json.dumps(
            {
                "outcome": result.outcome.value,
                "skip_count": result.skip_count,
                "total_range": result.total_range,
                "files": paths,
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_throw(args) -> int:
    config = _load(args)
    velocity = args.velocity if args.velocity is not None else 25.0
    height = args.height if args.height is not None else config.release.height
    run = harness.rehearse_pipeline(config, velocity, height)
    os.makedirs(config.output_dir, exist_ok=True)
    traj_path = os.path.join(config.output_dir, "throw_trajectory.json")
    trajectory_to_json(run.trajectory, run.report, traj_path)
    paths = harness.save_run_outputs(
        config, run.sim_result, config.output_dir, "throw", planner=run.planner
    )
    paths["throw_trajectory"] = traj_path
    print(
        json.dumps(
            {
                "states": [s.value for s in run.planner.state_history],
                "desired_velocity": velocity,
                "achieved_velocity": run.achieved_velocity,
                "skip_count": run.sim_result.skip_count,
                "outcome": run.sim_result.outcome.value,
                "total_range": run.sim_result.total_range,
                "files": paths,
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_sweep(args) -> int:
    config = _load(args)
    sweep = harness.run_sweep(config)
    os.makedirs(config.output_dir, exist_ok=True)
    harness.write_sweep_json(config, sweep, os.path.join(config.output_dir, "sweep.json"))
    written = harness.export_plots(sweep, config, config.output_dir)
    print(
        json.dumps(
            {
                "rows": [row.to_dict() for row in sweep.rows],
                "files": sorted(written),
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_calibrate(args) -> int:
    config = _load(args)
    result = harness.calibrate(config)
    os.makedirs(config.output_dir, exist_ok=True)
    path = os.path.join(config.output_dir, "calibration.json")
    with open(path, "w") as fh:
        json.dump(result.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    config.water_damping_coefficient = result.damping
    if args.write_config:
        save_config(config, args.write_config)
    print(
        json.dumps(
            {
                "damping": result.damping,
                "residual": result.residual,
                "counts": list(result.counts),
                "plateau": list(result.plateau),
                "files": {"calibration": path},
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_export(args) -> int:
    config = _load(args)
    source = args.results
    sweep_path = os.path.join(source, "sweep.json")
    if not os.path.exists(sweep_path):
        raise FileNotFoundError(f"no sweep.json in {source}; run `rockskip sweep` first")
    with open(sweep_path) as fh:
        manifest = json.load(fh)
    out_dir = config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    # plot-ready x-z trajectories per throw, from the stored samples
    written = []
    for row in manifest["rows"]:
        stem = f"trajectory_v{row['desired_velocity']:g}_h{row['release_height']:g}"
        src = os.path.join(source, stem + ".csv")
        if not os.path.exists(src):
            continue
        dst = os.path.join(out_dir, stem + "_xz.csv")
        with open(src) as fin, open(dst, "w") as fout:
            header = fin.readline().strip().split(",")
            ix, iz = header.index("x"), header.index("z")
            fout.write("x,z\n")
            for line in fin:
                cells = line.strip().split(",")
                fout.write(f"{cells[ix]},{cells[iz]}\n")
        written.append(dst)
    table = os.path.join(out_dir, "summary.csv")
    rows = [harness.SweepRow(**row) for row in manifest["rows"]]
    harness.write_summary_csv(harness.SweepResult(rows=rows), table)
    written.append(table)
    print(json.dumps({"files": sorted(written)}, sort_keys=True))
    return 0


def cmd_show_config(args) -> int:
    config = _load(args)
    print(json.dumps(config_to_dict(config), indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rockskip",
        description="Rock-skipping simulation and throw planning",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, velocity=False, height=False, mode=False):
        p.add_argument("--config", help="YAML config path (defaults otherwise)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="random seed recorded in outputs")
        if velocity:
            p.add_argument("--velocity", type=float, help="release speed (m/s)")
        if height:
            p.add_argument("--height", type=float, help="release height (m)")
        if mode:
            p.add_argument(
                "--mode", choices=[m.value for m in Mode], help="sweep runner mode"
            )

    p = sub.add_parser("simulate", help="single DirectRelease throw")
    common(p, velocity=True, height=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("throw", help="full drag-pick-load-throw pipeline")
    common(p, velocity=True, height=True)
    p.set_defaults(func=cmd_throw)

    p = sub.add_parser("sweep", help="grid over velocities and heights")
    common(p, mode=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("calibrate", help="fit the damping coefficient")
    common(p)
    p.add_argument("--write-config", help="write the calibrated config YAML here")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("export", help="plot-ready files from a sweep directory")
    common(p)
    p.add_argument("--results", required=True, help="directory with sweep.json")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("show-config", help="print the effective configuration")
    common(p)
    p.set_defaults(func=cmd_show_config)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # surfaced as machine-readable JSON
        print(
            json.dumps(
                {"error": type(exc).__name__, "message": str(exc)}, sort_keys=True
            ),
            file=sys.stdout,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
