"""Command-line entry point.

Subcommands: ``simulate``, ``sweep-noise``, ``track-path``, ``verify-flatness``.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import CONTROLLERS, ConfigError, ExperimentConfig, load_config, replace
from .harness import RNG_NAME, run_trial, sweep_noise, track_path, trial_seed
from .models import Params2D, Params3D
from .verification import inverse_composition_2d, roundtrip_2d, roundtrip_3d

log = logging.getLogger("discflat")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

SERIES_HEADER = ["step", "t", "x_true", "y_true", "x_meas", "y_meas", "x_ref", "y_ref",
                 "theta_cmd", "phi_cmd"]


def write_series(path: Path, result) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_HEADER)
        for k in range(len(result.t)):
            w.writerow([k, repr(float(result.t[k])), *map(repr, map(float, result.y_true[k])),
                        *map(repr, map(float, result.y_meas[k])), *map(repr, map(float, result.y_ref[k])),
                        *map(repr, map(float, result.u[k]))])


def write_rows(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("")
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


def write_metadata(out: Path, command: str, cfg, seeds, extra=None) -> None:
    meta = {
        "command": command,
        "software_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "rng": RNG_NAME,
        "seeds": seeds,
        "config": cfg.to_dict() if cfg is not None else None,
    }
    if extra:
        meta.update(extra)
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    updates = {}
    if args.seed is not None:
        updates["noise"] = {"seed": args.seed}
    if getattr(args, "controller", None):
        updates["controller"] = args.controller
    if getattr(args, "trials", None) is not None:
        updates["trials"] = args.trials
    try:
        return replace(cfg, **updates)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_simulate(args) -> int:
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seed = trial_seed(cfg.noise.seed, 0)
    result = run_trial(cfg, seed)
    write_series(out / f"trial_{cfg.controller}.csv", result)
    summary = {"controller": cfg.controller, "seed": seed, "status": result.status, **result.metrics}
    write_rows(out / "summary.csv", [summary])
    write_metadata(out, "simulate", cfg, [seed], {"status": result.status, "message": result.message})
    print(f"{cfg.controller}: status={result.status} "
          f"average_output_error={result.metrics['average_output_error']:.6g}")
    return EXIT_OK if result.ok else EXIT_NUMERICAL


def _controllers(args, default):
    return [args.controller] if args.controller else list(default)


def cmd_sweep_noise(args) -> int:
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows, aggregates = sweep_noise(cfg, controllers=_controllers(args, cfg.sweep.controllers),
                                   n_jobs=args.jobs)
    write_rows(out / "noise_trials.csv", rows)
    write_rows(out / "noise_summary.csv", aggregates)
    write_metadata(out, "sweep-noise", cfg, sorted({r["seed"] for r in rows}))
    for a in aggregates:
        print(f"{a['controller']:5s} sigma={a['sigma']:<8g} mean_error={a['mean_average_output_error']:.6g} "
              f"failed={a['n_failed']}")
    return EXIT_OK


def cmd_track_path(args) -> int:
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows, aggregates = track_path(cfg, controllers=_controllers(args, cfg.path_sweep.controllers),
                                  n_jobs=args.jobs)
    write_rows(out / "path_trials.csv", rows)
    write_rows(out / "path_summary.csv", aggregates)
    write_metadata(out, "track-path", cfg, sorted({r["seed"] for r in rows}))
    for a in aggregates:
        print(f"{a['controller']:5s} speed={a['speed']:<4g} median={a['median']:.4g} "
              f"q75={a['q75']:.4g} max={a['max']:.4g} unstable={a['n_unstable']}")
    return EXIT_OK


VERIFY_TOLERANCES = {
    "2d_input_rel_error": 1e-7,
    "2d_state_abs_error": 1e-8,
    "3d_thrust_rel_error": 1e-6,
    "3d_torque_rel_error": 1e-6,
    "3d_state_abs_error": 1e-6,
    "composition_forward_error": 1e-10,
    "composition_inverse_error": 1e-10,
}


def cmd_verify_flatness(args) -> int:
    seed = 0 if args.seed is None else args.seed
    cfg = load_config(args.config) if args.config else None
    params2d = cfg.model if cfg else Params2D()
    n = args.trials
    r2 = roundtrip_2d(trials=n or 1000, seed=seed, params=params2d)
    r3 = roundtrip_3d(trials=n or 500, seed=seed, params=Params3D())
    rc = inverse_composition_2d(pairs=(n or 1000) * 100, seed=seed, params=params2d)
    measured = {
        "2d_input_rel_error": r2["input_rel_error"],
        "2d_state_abs_error": r2["state_abs_error"],
        "3d_thrust_rel_error": r3["thrust_rel_error"],
        "3d_torque_rel_error": r3["torque_rel_error"],
        "3d_state_abs_error": r3["state_abs_error"],
        "composition_forward_error": rc["forward_error"],
        "composition_inverse_error": rc["inverse_error"],
    }
    rows = [{"check": k, "value": v, "tolerance": VERIFY_TOLERANCES[k], "pass": v <= VERIFY_TOLERANCES[k]}
            for k, v in measured.items()]
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_rows(out / "verify_flatness.csv", rows)
        write_metadata(out, "verify-flatness", cfg, [seed])
    for r in rows:
        print(f"{'PASS' if r['pass'] else 'FAIL'} {r['check']}: {r['value']:.3e} <= {r['tolerance']:.0e}")
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discflat", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, controller=True, trials=True, out_required=True):
        p.add_argument("--config", help="TOML experiment config")
        p.add_argument("--seed", type=int, help="base seed (unsigned 64-bit)")
        p.add_argument("--out", required=out_required, help="output directory")
        if controller:
            p.add_argument("--controller", choices=CONTROLLERS)
        if trials:
            p.add_argument("--trials", type=int)
        return p

    common(sub.add_parser("simulate", help="run one closed-loop trial"), trials=False)
    for name, help_ in (("sweep-noise", "average output error versus noise level"),
                        ("track-path", "path error versus desired speed")):
        p = common(sub.add_parser(name, help=help_))
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
    common(sub.add_parser("verify-flatness", help="randomized flat-map round trips"),
           controller=False, out_required=False)
    return parser


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep-noise": cmd_sweep_noise,
    "track-path": cmd_track_path,
    "verify-flatness": cmd_verify_flatness,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    if getattr(args, "trials", None) is not None and args.trials < 1:
        print("error: --trials must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
