"""Write a toy 3-layer feature-map dump and print its descriptor profile.

Layer k pools to the same point set scaled by 1/2**k, so E_1^0 halves from
layer to layer while PH_dim stays fixed.
"""

import argparse
import sys
import tempfile

from topodim.io import dumps_csv
from topodim.pipeline import layer_profile, load_manifest
from topodim.synthetic import make_layer_dump


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=None, help="dump directory (temporary when omitted)")
    ap.add_argument("--layers", type=int, default=3)
    ap.add_argument("--per-class", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    directory = args.out or tempfile.mkdtemp(prefix="layer_dump_")
    manifest = make_layer_dump(directory, n_layers=args.layers, n_per_class=args.per_class,
                               batch_size=min(200, args.per_class), batches=3, seed=args.seed)
    print(f"manifest: {manifest}", file=sys.stderr)
    sources, config = load_manifest(manifest)
    sys.stdout.write(dumps_csv(*layer_profile(sources, config).table()))


if __name__ == "__main__":
    main()
