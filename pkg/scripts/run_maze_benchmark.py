"""Maze success rates and solve times for 3x3, 4x4 and 5x5 under a 1 s budget.

    python scripts/run_maze_benchmark.py --count 100 --out results/mazes
"""

import argparse

from hetgp.cli import CampaignConfig, run_campaign


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--sizes", type=int, nargs="+", default=[3, 4, 5])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--t-max", type=float, default=1.0)
    ap.add_argument("--arms", nargs="+", default=["heteroscedastic", "homoscedastic"])
    ap.add_argument("--out", default="results/mazes")
    args = ap.parse_args()
    run_campaign(CampaignConfig(maze_sizes=args.sizes, count=args.count, seed=args.seed,
                                t_max=args.t_max, arms=args.arms, out_dir=args.out))


if __name__ == "__main__":
    main()
