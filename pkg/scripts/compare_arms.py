"""Heteroscedastic vs homoscedastic prior on scenes obstructed at both ends.

Both arms get the same sample budget (K samples x max_iters); pass --t-max to
compare under a wall-clock budget instead.
"""

import argparse
import tempfile
from pathlib import Path

from hetgp.cli import CampaignConfig, main as cli_main, run_campaign


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--max-iters", type=int, default=30)
    ap.add_argument("--t-max", type=float, default=None)
    ap.add_argument("--out", default="results/arms")
    args = ap.parse_args()
    corpus = Path(tempfile.mkdtemp(prefix="scenes_"))
    cli_main(["generate", "--kind", "scene", "--count", str(args.count), "--out", str(corpus)])
    timed = args.t_max is not None
    cfg = CampaignConfig(corpus=str(corpus), arms=["heteroscedastic", "homoscedastic"],
                         deterministic=not timed, t_max=args.t_max or 1.0,
                         max_iters=args.max_iters if not timed else 1000, out_dir=args.out)
    run_campaign(cfg)


if __name__ == "__main__":
    main()
