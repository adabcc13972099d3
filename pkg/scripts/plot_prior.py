"""Sample fans of both priors (1-D position, 30 draws each) with their q_c(t)."""

import sys

from hetgp.cli import main

if __name__ == "__main__":
    sys.exit(main(["plot-prior", *(sys.argv[1:] or ["--out", "prior.svg"])]))
