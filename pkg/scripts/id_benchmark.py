"""Intrinsic dimension of synthetic manifolds by four estimators.

Compares PH_dim with TwoNN, MLE and the correlation dimension on data of
known dimension, optionally embedded in a larger ambient space by a random
rotation.
"""

import argparse
import sys
import time

from topodim.dimension import SampleSchedule, correlation_dimension, mle_id, ph_dim, twonn
from topodim.io import dumps_csv
from topodim.synthetic import synth

# the circle sampler is an equally spaced lattice, where r2/r1 = 1 for every
# point and TwoNN is undefined, so it is left out here
CASES = [
    ("segment", 1, None, None),
    ("square", 2, None, None),
    ("sphere", 2, 2, None),
    ("cube", 4, 4, 32),
    ("cube", 8, 8, 128),
]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rows = []
    for manifold, truth, dim, ambient in CASES:
        X = synth(manifold, args.n, dim=dim, ambient_dim=ambient, seed=args.seed)
        t0 = time.perf_counter()
        est = {
            "phdim": ph_dim(X, schedule=SampleSchedule.default(X.n, seed=args.seed)).dimension,
            "twonn": twonn(X).value,
            "mle": mle_id(X, k=10).value,
            "corrdim": correlation_dimension(X).value,
        }
        label = manifold if dim is None else f"{manifold}{dim}"
        rows.append([label, X.d, truth] + [est[k] for k in ("phdim", "twonn", "mle", "corrdim")]
                    + [round(time.perf_counter() - t0, 2)])
    sys.stdout.write(dumps_csv(["data", "ambient", "true_id", "phdim", "twonn", "mle", "corrdim", "seconds"], rows))


if __name__ == "__main__":
    main()
