"""Run the full protocol on the shipped instances and print a combined span table.

    python3 scripts/span_table.py --out-dir runs/table --shots 57344
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from qaoa_lsc.cli import RunConfig, run_pipeline
from qaoa_lsc.qubo import SHIPPED_INSTANCES


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out-dir", default="runs/table")
    ap.add_argument("--shots", type=int, default=None, help="omit for exact probabilities")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--noise", help="NoiseSpec JSON (default: calibration-like)")
    args = ap.parse_args()

    rows = []
    for label, n, k, vol, seed in SHIPPED_INSTANCES:
        slug = label.replace(" ", "_")
        cfg = RunConfig(
            instance={"n": n, "k": k, "volatility": vol, "seed": seed, "label": label},
            noise_path=args.noise,
            shots=args.shots,
            seed=args.seed,
            zne=False,
            out_dir=str(Path(args.out_dir) / slug),
            workers=args.workers,
        )
        out = run_pipeline(cfg)
        rows.append((label, json.loads((out / "metrics.json").read_text())))
        print(f"done {label} -> {out}")

    print()
    print(f"{'Instance':<16} {'LS_0':>8} {'LS_n':>8} {'LSC_n':>7} {'r':>7} {'OPS':>6} {'FF_0':>6} {'FF_n':>6}")
    for label, m in rows:
        print(
            f"{label:<16} {m['ls']['ideal']:8.2f} {m['ls']['noisy']:8.2f} {m['lsc_noisy']:7.3f} "
            f"{m['pearson']['noisy_vs_ideal']:7.4f} {m['ops_noisy']:6.3f} "
            f"{m['ff_at_optimum']['ideal']:6.3f} {m['ff_at_optimum']['noisy']:6.3f}"
        )


if __name__ == "__main__":
    main()
