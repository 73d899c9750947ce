"""Command-line front end.

Exit status: 0 on success, 1 on invalid input or arguments, 2 when the
simplex cap is exceeded.  Errors are reported as one line on stderr:
``error: <kind>: <message>``.
"""

from __future__ import annotations

import argparse
import os
import secrets
import sys
from pathlib import Path
from typing import List, Optional

from . import persistence as ph
from .descriptors import DescriptorSpec, descriptor
from .dimension import SampleSchedule, correlation_dimension, mle_id, ph_dim, twonn
from .errors import ResourceLimitError, TopoDimError
from .geometry import pairwise_distances
from .io import dumps_csv, dumps_json, read_embedding_file, write_cloud
from .pipeline import generalization_report, layer_profile, load_manifest, load_records
from .synthetic import MANIFOLDS, synth


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _threshold(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {text!r}") from None


def _sizes(text: str):
    try:
        return tuple(int(s) for s in text.replace(" ", "").split(",") if s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=None, help="RNG seed (random and reported when omitted)")
    g.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker threads")
    g.add_argument("--output", type=Path, default=None, help="write to this file instead of stdout")
    g.add_argument("--format", choices=("json", "csv"), default="json")

    p = _Parser(prog="topodim", description="Persistent homology descriptors and intrinsic dimension of point clouds.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("persistence", parents=[common], help="Vietoris-Rips persistence diagram")
    s.add_argument("input", type=Path)
    s.add_argument("--metric", default="euclidean", choices=("euclidean", "manhattan", "chebyshev", "cosine"))
    s.add_argument("--max-dim", type=int, default=1)
    s.add_argument("--threshold", type=_threshold, default="auto")

    s = sub.add_parser("descriptor", parents=[common], help="power-weighted lifespan sum E_alpha^i")
    s.add_argument("input", type=Path)
    s.add_argument("--i", type=int, default=0)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--averaged", action="store_true")

    s = sub.add_parser("phdim", parents=[common], help="persistent-homology dimension")
    s.add_argument("input", type=Path)
    s.add_argument("--i", type=int, default=0)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--sizes", type=_sizes, default=None, help="comma-separated subsample sizes")
    s.add_argument("--repeats", type=int, default=5)

    s = sub.add_parser("id", parents=[common], help="comparison intrinsic-dimension estimators")
    s.add_argument("input", type=Path)
    s.add_argument("--method", required=True, choices=("twonn", "mle", "corrdim"))
    s.add_argument("--k", type=int, default=10)

    s = sub.add_parser("profile", parents=[common], help="per-layer descriptor profile from a manifest")
    s.add_argument("--manifest", type=Path, required=True)

    s = sub.add_parser("correlate", parents=[common], help="descriptor vs test accuracy report")
    s.add_argument("--records", type=Path, required=True)

    s = sub.add_parser("synth", parents=[common], help="write a synthetic point cloud (CSV, or NPY by extension)")
    s.add_argument("--manifold", required=True, choices=MANIFOLDS)
    s.add_argument("--dim", type=int, default=None)
    s.add_argument("--ambient-dim", type=int, default=None)
    s.add_argument("--n", type=int, default=1000)
    return p


def _seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbelow(2 ** 32)
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def _persistence(args):
    cloud = read_embedding_file(args.input)
    dist = pairwise_distances(cloud, args.metric)
    dg = ph.rips_persistence(dist, args.max_dim, args.threshold, ph.DEFAULT_MAX_SIMPLICES)
    rows = []
    for k in range(dg.max_dim + 1):
        zl = dg.zero_length(k)
        for (b, d), z in zip(dg.dgm(k).tolist(), zl.tolist()):
            rows.append([k, b, d, z])
    if args.format == "csv":
        return dumps_csv(["dim", "birth", "death", "zero_length"], rows)
    return dumps_json({
        "command": "persistence",
        "input": str(args.input),
        "metric": args.metric,
        "max_dim": dg.max_dim,
        "threshold": dg.threshold,
        "n_points": dg.n_points,
        "diagrams": [
            {"dim": k, "intervals": [{"birth": b, "death": d, "zero_length": z}
                                     for kk, b, d, z in rows if kk == k]}
            for k in range(dg.max_dim + 1)
        ],
    })


def _descriptor(args):
    spec = DescriptorSpec(i=args.i, alpha=args.alpha, averaged=args.averaged)
    cloud = read_embedding_file(args.input)
    dist = pairwise_distances(cloud)
    if spec.i == 0:
        dg = ph.h0_persistence(dist)
    else:
        dg = ph.rips_persistence(dist, spec.i, "auto", ph.DEFAULT_MAX_SIMPLICES)
    v = descriptor(dg, spec)
    if args.format == "csv":
        return dumps_csv(["name", "i", "alpha", "averaged", "value", "n_intervals"],
                         [[spec.name, spec.i, spec.alpha, spec.averaged, v.value, v.n_intervals]])
    return dumps_json(dict(command="descriptor", input=str(args.input), name=spec.name, **v.to_dict()))


def _phdim(args):
    cloud = read_embedding_file(args.input)
    seed = _seed(args)
    if args.sizes is None:
        sched = SampleSchedule.default(cloud.n, seed=seed, repeats=args.repeats)
    else:
        sched = SampleSchedule(args.sizes, args.repeats, seed)
    est = ph_dim(cloud, args.i, args.alpha, sched, workers=args.threads)
    if args.format == "csv":
        return dumps_csv(["dimension", "beta", "r_squared", "alpha", "i", "seed"],
                         [[est.dimension, est.beta, est.r_squared, est.alpha, est.i, seed]])
    return dumps_json(dict(command="phdim", input=str(args.input), **est.to_dict()))


def _id(args):
    cloud = read_embedding_file(args.input)
    if args.method == "twonn":
        est = twonn(cloud)
    elif args.method == "mle":
        est = mle_id(cloud, k=args.k)
    else:
        est = correlation_dimension(cloud)
    if args.format == "csv":
        return dumps_csv(["method", "value"], [[est.method, est.value]])
    return dumps_json(dict(command="id", input=str(args.input), **est.to_dict()))


def _profile(args):
    sources, config = load_manifest(args.manifest, seed=args.seed)
    prof = layer_profile(sources, config, workers=args.threads)
    if args.format == "csv":
        return dumps_csv(*prof.table())
    doc = prof.to_dict()
    doc["provenance"]["sources"] = [os.path.relpath(s, args.manifest.parent) for s in doc["provenance"]["sources"]]
    return dumps_json(dict(command="profile", manifest=str(args.manifest), **doc))


def _correlate(args):
    records, settings = load_records(args.records, seed=args.seed)
    report = generalization_report(records)
    if args.format == "csv":
        return dumps_csv(*report.table())
    return dumps_json(dict(command="correlate", records_file=str(args.records), settings=settings, **report.to_dict()))


def _synth(args):
    seed = _seed(args)
    cloud = synth(args.manifold, n=args.n, dim=args.dim, ambient_dim=args.ambient_dim, seed=seed)
    if args.output is not None:
        write_cloud(cloud, args.output)
        return None
    return dumps_csv([f"x{k}" for k in range(cloud.d)], cloud.points.tolist())


COMMANDS = {
    "persistence": _persistence,
    "descriptor": _descriptor,
    "phdim": _phdim,
    "id": _id,
    "profile": _profile,
    "correlate": _correlate,
    "synth": _synth,
}


def _fail(kind: str, message: str, code: int) -> int:
    print(f"error: {kind}: {' '.join(str(message).split())}", file=sys.stderr)
    return code


def run(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        text = COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail("invalid-argument", exc, 1)
    except ResourceLimitError as exc:
        return _fail(exc.kind, exc, 2)
    except TopoDimError as exc:
        return _fail(exc.kind, exc, 1)
    except OSError as exc:
        return _fail("io-error", exc, 1)
    if text is not None:
        if args.output is not None:
            Path(args.output).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
