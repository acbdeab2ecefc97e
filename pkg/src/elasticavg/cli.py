"""Command-line entry point: ``elasticavg <subcommand> ...``.

Results are written as CSV (to ``--output`` or stdout); the resolved run
configuration is printed as one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import averaging, elastic, evaluation
from .core import (KernelParams, LabeledDataset, format_dataset, load_dataset,
                   series_to_csv, synth_fixtures, znormalize)
from .errors import ElasticAvgError, ParameterError
from .parallel import THREADS_ENV, set_default_threads
from .preimage import PreimageConfig, preimage_centroid

AVG_METHODS = ("dba", "kdba", "ikdba", "pwa", "ppwa", "preimage")
CLASSIFY_METHODS = ("dtw_medoid", "dba", "kdtw_medoid", "kdba", "ikdba", "ppwa", "preimage")


def _grid(text: str | None):
    if not text:
        return list(evaluation.NU_GRID)
    return [float(v) for v in text.split(",") if v.strip()]


def _read(path: str, normalize: bool) -> LabeledDataset:
    if path == "-":
        from .core import parse_multivariate, parse_ucr
        text = sys.stdin.read()
        ds = parse_multivariate(text) if text.lstrip().startswith("#") else parse_ucr(text)
    else:
        ds = load_dataset(path)
    if normalize:
        ds = LabeledDataset(tuple((lab, znormalize(ts)) for lab, ts in ds))
    return ds


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _dataset_name(path: str) -> str:
    stem = Path(path).stem
    for suffix in ("_TRAIN", "_train", "-TRAIN"):
        if stem.endswith(suffix):
            return stem[: -len(suffix)]
    return stem


def _options(args) -> evaluation.MethodOptions:
    return evaluation.MethodOptions(
        max_iter=args.max_iter,
        ordering=args.ordering,
        preimage=PreimageConfig(budget=args.budget, initial_step=args.step),
    )


# --- subcommands -------------------------------------------------------------


def cmd_avg(args) -> None:
    ds = _read(args.input, args.normalize)
    if args.label is not None:
        ds = LabeledDataset(tuple((l, s) for l, s in ds if l == args.label))
    S = ds.series
    kp = KernelParams(nu=args.nu)
    trace = None
    if args.method == "dba":
        res = averaging.dba(S, args.max_iter)
        centroid, trace = res.centroid, res.inertia_trace
    elif args.method == "kdba":
        init = evaluation.medoid(S, "kdtw_similarity", kp)[1]
        centroid = averaging.kdba(init, S, kp)
    elif args.method == "ikdba":
        res = averaging.ikdba(S, kp, args.max_iter)
        centroid, trace = res.centroid, res.inertia_trace
    elif args.method == "pwa":
        if len(S) != 2:
            raise ParameterError(f"pwa averages exactly two series, input has {len(S)}")
        centroid = averaging.kdtw_pwa(S[0], S[1], kp)
    elif args.method == "ppwa":
        centroid = averaging.pkdtw_pwa(S, kp, args.ordering)
    else:
        res = preimage_centroid(S, kp, PreimageConfig(budget=args.budget, initial_step=args.step))
        centroid, trace = res.centroid, res.inertia_trace
        if args.trace:
            _write(args.trace, res.trace_csv())
            trace = None
    _write(args.output, series_to_csv(centroid))
    if args.trace and trace is not None:
        _write(args.trace, "iteration,inertia\n"
               + "".join(f"{k},{v!r}\n" for k, v in enumerate(trace)))


def cmd_classify(args) -> None:
    train = _read(args.train, args.normalize)
    test = _read(args.test, args.normalize)
    method = evaluation.canonical_method(args.method)
    nu = args.nu
    if args.tune_nu:
        if method not in evaluation.TUNABLE:
            raise ParameterError(f"--tune-nu is not available for method {args.method!r}")
        nu = evaluation.loo_tune_nu(train, method, _grid(args.grid), _options(args))
    reps = evaluation.build_representatives(train, method, KernelParams(nu=nu), _options(args))
    err = evaluation.error_rate(reps, test)
    report = evaluation.EvalReport()
    report.add(args.dataset or _dataset_name(args.train), method, err)
    _write(args.output, report.to_csv())
    logging.getLogger(__name__).info("nu=%g error=%.4f%%", nu, err)


def cmd_tune(args) -> None:
    train = _read(args.train, args.normalize)
    best, errors = evaluation.loo_tune_nu(train, args.method, _grid(args.grid), _options(args),
                                          return_errors=True)
    rows = ["nu,loo_errors,selected"]
    for nu, e in errors.items():
        rows.append(f"{nu!r},{'' if e is None else e},{int(nu == best)}")
    _write(args.output, "\n".join(rows) + "\n")


def cmd_gram(args) -> None:
    ds = _read(args.input, args.normalize)
    kp = KernelParams(nu=args.nu)
    G = (elastic.log_kdtw_gram(ds.series, kp) if args.log
         else elastic.kdtw_gram(ds.series, kp))
    _write(args.output, "".join(",".join(repr(float(v)) for v in row) + "\n" for row in G))


def cmd_ama(args) -> None:
    ds = _read(args.input, args.normalize)
    if len(ds) < 2:
        raise ParameterError("ama needs a file holding two series")
    X, Y = ds.series[:2]
    _write(args.output, elastic.ama_to_csv(elastic.ama(X, Y, KernelParams(nu=args.nu)), args.nu))


def cmd_fixtures(args) -> None:
    params = {k: v for k, v in (("T", args.T), ("t1", args.t1), ("t2", args.t2),
                                ("half_width", args.half_width), ("periods", args.periods),
                                ("n_per_class", args.n_per_class), ("seed", args.seed))
              if v is not None}
    _write(args.output, format_dataset(synth_fixtures(args.kind, **params)))


def cmd_rank(args) -> None:
    with open(args.input, encoding="utf-8") as fh:
        report = evaluation.EvalReport.from_csv(fh.read())
    _write(args.output, report.rank_csv())


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", default="-", help="output CSV path (default stdout)")
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default ${THREADS_ENV} or CPU count)")
    common.add_argument("--normalize", action="store_true", help="z-normalize every input series")
    common.add_argument("--max-iter", type=int, default=averaging.DEFAULT_MAX_ITER)
    common.add_argument("--ordering", choices=("input_order", "similar_first"), default="input_order")
    common.add_argument("--budget", type=int, default=10_000, help="preimage evaluation budget")
    common.add_argument("--step", type=float, default=0.25, help="preimage initial step")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="elasticavg", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("avg", parents=[common], help="centroid of a file's series")
    a.add_argument("input")
    a.add_argument("--method", choices=AVG_METHODS, required=True)
    a.add_argument("--nu", type=float, default=1.0)
    a.add_argument("--label", default=None, help="average only series with this label")
    a.add_argument("--trace", default=None, help="write the inertia / objective trace CSV here")
    a.set_defaults(func=cmd_avg)

    c = sub.add_parser("classify", parents=[common], help="1-NC test error of one method")
    c.add_argument("--train", required=True)
    c.add_argument("--test", required=True)
    c.add_argument("--method", choices=CLASSIFY_METHODS, required=True)
    c.add_argument("--nu", type=float, default=1.0)
    c.add_argument("--tune-nu", action="store_true", help="pick nu by leave-one-out on TRAIN")
    c.add_argument("--grid", default=None, help="comma-separated nu grid")
    c.add_argument("--dataset", default=None, help="dataset name for the CSV")
    c.set_defaults(func=cmd_classify)

    t = sub.add_parser("tune-nu", parents=[common], help="leave-one-out nu selection")
    t.add_argument("--train", required=True)
    t.add_argument("--method", choices=("kdtw_medoid", "ikdba", "ppwa", "pkdtw_pwa"), required=True)
    t.add_argument("--grid", default=None)
    t.set_defaults(func=cmd_tune)

    g = sub.add_parser("gram", parents=[common], help="KDTW Gram matrix")
    g.add_argument("input")
    g.add_argument("--nu", type=float, default=1.0)
    g.add_argument("--log", action="store_true", help="write natural logs of the kernel values")
    g.set_defaults(func=cmd_gram)

    m = sub.add_parser("ama", parents=[common], help="AMA matrix of the first two series")
    m.add_argument("input")
    m.add_argument("--nu", type=float, default=1.0)
    m.set_defaults(func=cmd_ama)

    f = sub.add_parser("fixtures", parents=[common], help="emit a synthetic dataset")
    f.add_argument("--kind", choices=("triangle_pair", "sine_halfwave", "pwm_like", "cbf"),
                   required=True)
    f.add_argument("--T", type=int, default=None)
    f.add_argument("--t1", type=float, default=None)
    f.add_argument("--t2", type=float, default=None)
    f.add_argument("--half-width", type=float, default=None)
    f.add_argument("--periods", type=int, default=None)
    f.add_argument("--n-per-class", type=int, default=None)
    f.set_defaults(func=cmd_fixtures)

    r = sub.add_parser("rank", parents=[common], help="average ranks from an error CSV")
    r.add_argument("input")
    r.set_defaults(func=cmd_rank)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is not None:
        set_default_threads(args.threads)
    config = {k: v for k, v in vars(args).items() if k != "func"}
    config["threads_resolved"] = args.threads or int(os.environ.get(THREADS_ENV, 0)) or os.cpu_count()
    print(json.dumps(config, sort_keys=True), file=sys.stderr)
    try:
        args.func(args)
    except (ElasticAvgError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        set_default_threads(None)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
