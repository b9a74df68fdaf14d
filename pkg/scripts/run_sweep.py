"""Run every experiment over a grid of (K, m, c1) and write one JSON and one CSV report per cell."""

import argparse
import itertools
from pathlib import Path

from tangentkahler import __version__
from tangentkahler.cli import RunManifest, emit_csv, emit_json, overall_verdict
from tangentkahler.experiments import ExperimentConfig, run_all


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results", help="output directory")
    ap.add_argument("--K", type=float, nargs="+", default=[-1.0, 0.0, 1.0])
    ap.add_argument("--m", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--c1", type=float, nargs="+", default=[1.0, 4.0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=200)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for K, m, c1 in itertools.product(args.K, args.m, args.c1):
        cfg = ExperimentConfig(K=K, m=m, c1=c1, seed=args.seed, sample_count=args.samples)
        reports = run_all(cfg)
        manifest = RunManifest("all", cfg.to_dict(), __version__, None)
        stem = out / f"K{K:g}_m{m}_c1-{c1:g}"
        stem.with_suffix(".json").write_text(emit_json(manifest, reports))
        stem.with_suffix(".csv").write_text(emit_csv(manifest, reports))
        runtime = sum(r.runtime for r in reports)
        print(f"K={K:+g} m={m} c1={c1:g}: {overall_verdict(reports):<12} {runtime:6.1f} s  -> {stem}.json")


if __name__ == "__main__":
    main()
