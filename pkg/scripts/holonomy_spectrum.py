"""Print the singular values behind the holonomy rank estimate for a few base geometries."""

import argparse

import numpy as np

from tangentkahler.experiments import ExperimentConfig, run_holonomy_rank

CASES = [(-1.0, 2), (1.0, 2), (0.0, 2), (1.0, 3), (-1.0, 3)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--loops", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--show", type=int, default=12, help="singular values to print")
    args = ap.parse_args()

    np.set_printoptions(precision=3, linewidth=120)
    for K, m in CASES:
        r = run_holonomy_rank(ExperimentConfig(K=K, m=m, loop_count=args.loops, seed=args.seed))
        print(f"K={K:+g} m={m}: rank {r.details['rank']} (expected {r.details['expected_rank']}), {r.verdict}")
        for key in sorted(k for k in r.details if k.startswith("eps=")):
            d = r.details[key]
            sv = np.asarray(d["singular_values"])[: args.show]
            print(f"  {key:<11} threshold {d['threshold']:.2e} ambiguous={d['ambiguous']}  {sv}")


if __name__ == "__main__":
    main()
