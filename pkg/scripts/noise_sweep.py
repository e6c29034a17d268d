"""Average output error versus x-channel noise for the DF and FMPC controllers.

    python scripts/noise_sweep.py --out results/noise
"""

import argparse
from pathlib import Path

from discflat.cli import write_metadata, write_rows
from discflat.config import load_config, replace
from discflat.harness import sweep_noise

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=ROOT / "configs" / "step.toml")
    ap.add_argument("--out", default="results/noise")
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, noise={"seed": args.seed})
    rows, agg = sweep_noise(cfg, trials=args.trials, n_jobs=args.jobs)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_rows(out / "noise_trials.csv", rows)
    write_rows(out / "noise_summary.csv", agg)
    write_metadata(out, "noise_sweep.py", cfg, sorted({r["seed"] for r in rows}))

    sigmas = sorted({a["sigma"] for a in agg})
    names = list(dict.fromkeys(a["controller"] for a in agg))
    print(f"{'sigma':>8} " + " ".join(f"{n:>10}" for n in names))
    for s in sigmas:
        vals = [next(a for a in agg if a["controller"] == n and a["sigma"] == s) for n in names]
        print(f"{s:8.0e} " + " ".join(f"{v['mean_average_output_error']:10.4f}" for v in vals))


if __name__ == "__main__":
    main()
