"""Growth of the MST length E_1^0 with sample size on the unit square.

Prints log mean E against log n and the fitted slope for each seed, as CSV.
The slope should sit near 1/2 and the implied dimension near 2.
"""

import argparse
import sys

from topodim.dimension import SampleSchedule, ph_dim
from topodim.io import dumps_csv
from topodim.synthetic import synth


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--dim", type=int, default=2, help="cube dimension (2 is the square)")
    args = ap.parse_args(argv)

    rows = []
    for seed in range(args.seeds):
        X = synth("cube", args.n, dim=args.dim, seed=seed)
        est = ph_dim(X, schedule=SampleSchedule.default(args.n, seed=seed))
        for log_n, log_e in est.points:
            rows.append([seed, log_n, log_e, est.beta, est.dimension, est.r_squared])
    sys.stdout.write(dumps_csv(["seed", "log_n", "log_mean_E", "beta", "phdim", "r_squared"], rows))


if __name__ == "__main__":
    main()
