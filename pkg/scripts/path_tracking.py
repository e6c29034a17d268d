"""Path error versus desired speed on the L-shaped path for DF, FMPC and PD.

    python scripts/path_tracking.py --out results/path
"""

import argparse
from pathlib import Path

from discflat.cli import write_metadata, write_rows
from discflat.config import load_config, replace
from discflat.harness import track_path

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=ROOT / "configs" / "lpath.toml")
    ap.add_argument("--out", default="results/path")
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, noise={"seed": args.seed})
    rows, agg = track_path(cfg, trials=args.trials, n_jobs=args.jobs)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_rows(out / "path_trials.csv", rows)
    write_rows(out / "path_summary.csv", agg)
    write_metadata(out, "path_tracking.py", cfg, sorted({r["seed"] for r in rows}))

    print(f"{'ctrl':5} {'speed':>5} {'q25':>7} {'median':>7} {'q75':>7} {'max':>7} unstable")
    for a in agg:
        print(f"{a['controller']:5} {a['speed']:5.1f} {a['q25']:7.3f} {a['median']:7.3f} "
              f"{a['q75']:7.3f} {a['max']:7.3f} {a['n_unstable']}/{a['n_trials']}")


if __name__ == "__main__":
    main()
