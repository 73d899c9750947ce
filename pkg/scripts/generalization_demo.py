"""Correlate a last-layer descriptor with test accuracy on a constructed
model family, sweeping the noise level of the descriptor."""

import argparse
import sys

from topodim.io import dumps_csv
from topodim.descriptors import DescriptorSpec, DescriptorValue
from topodim.pipeline import ModelRecord, generalization_report
from topodim.synthetic import make_model_family


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--models", type=int, default=50)
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args(argv)

    spec = DescriptorSpec()
    rows = []
    for noise in (0.0, 0.1, 0.5, 1.0, 2.0, 4.0):
        for seed in range(args.seeds):
            family = make_model_family(args.models, noise, seed)
            records = [ModelRecord(m, a, DescriptorValue(d, 0, spec)) for m, a, d in family]
            rep = generalization_report(records)
            rows.append([noise, seed, rep.r, rep.weak_predictor, rep.trend_slope])
    sys.stdout.write(dumps_csv(["noise", "seed", "pearson_r", "weak_predictor", "trend_slope"], rows))


if __name__ == "__main__":
    main()
