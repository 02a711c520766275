"""Command-line entry point.

Machine-readable results go to stdout, one ``key=value`` line; everything
else goes to stderr.  Exit codes: 0 ok, 2 usage or config error, 3 bad
input data, 4 compressor backend failure, 5 every sweep cell failed.
"""

import argparse
import os
import sys

from . import harness, source
from .compressor import CompressorSpec, make_compressor
from .errors import BackendError, DecodeError, ParameterError
from .predictor import PredictorParams, run_block_prediction, run_prediction

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BACKEND, EXIT_ALL_FAILED = 0, 2, 3, 4, 5


class DataError(Exception):
    pass


def _add_compressor_flags(p):
    g = p.add_argument_group("compressor")
    g.add_argument("--compressor", choices=("ppm", "lz", "external"), default="ppm",
                   help="backend (default: ppm)")
    g.add_argument("--ppm-order", type=int, default=6, metavar="D",
                   help="maximum PPM context length (default: 6)")
    g.add_argument("--dict-size", type=int, default=1 << 16, metavar="BYTES",
                   help="LZ window size, a power of two (default: 65536)")
    g.add_argument("--external-cmd", metavar="CMD",
                   help="command reading bytes on stdin and writing compressed bytes")


def _spec(args):
    return CompressorSpec(args.compressor, args.ppm_order, args.dict_size, args.external_cmd)


def _read_bits(path):
    try:
        return source.read_bits(path)
    except (OSError, ValueError) as exc:
        raise DataError(str(exc)) from exc


def _window(args, x, h):
    m = h if args.m is None else args.m
    if len(x) <= m:
        raise DataError(f"{args.input}: {len(x)} bits leave nothing to predict after m={m}")
    if args.n_pred is not None:
        x = x[:m + args.n_pred]
    return x, m


def _report(trace):
    print(f"p_err={trace.p_err!r} errors={trace.errors} n_pred={trace.n_pred}")


def cmd_generate(args):
    if args.table == "uniform":
        model = source.uniform_source(args.order, args.p1)
    else:
        model = source.random_source(args.order, args.p1, args.seed)
    x = source.generate(model, args.n, args.seed)
    source.write_bits(args.out, x)
    print(f"bayes={source.bayes_error(model):.10g}", file=sys.stderr)


def cmd_predict(args):
    x = _read_bits(args.input)
    params = PredictorParams(args.h, args.k, args.r, args.q, "syx", _spec(args), args.seed)
    x, m = _window(args, x, args.h)
    trace = run_prediction(x, m, params)
    if args.trace_out:
        trace.write_csv(args.trace_out, m)
    _report(trace)


def cmd_block_predict(args):
    x = _read_bits(args.input)
    x, m = _window(args, x, args.h)
    trace = run_block_prediction(x, m, args.h, args.l, args.score, _spec(args), args.seed)
    _report(trace)


def cmd_sweep(args):
    config = harness.load_config(args.config)
    os.makedirs(args.out_dir, exist_ok=True)

    def progress(done, total):
        print(f"\r{done}/{total} runs", end="" if done < total else "\n", file=sys.stderr)

    result = harness.run_sweep(config, workers=args.workers, progress=progress)
    csv_path = os.path.join(args.out_dir, "results.csv")
    harness.write_csv(result.records, csv_path)
    for cell, run, msg in result.failures:
        print(f"failed cell {cell} run {run}: {msg}", file=sys.stderr)
    total = len(result.records) + len(result.failures)
    if result.failures:
        print(f"{len(result.failures)} of {total} runs failed", file=sys.stderr)
    if not result.records:
        return EXIT_ALL_FAILED
    stats = harness.aggregate(result.records)
    for axis, path in harness.plot_paths(config, args.out_dir).items():
        harness.emit_plot(stats, axis, path)
    print(f"results={csv_path} records={len(result.records)} failed={len(result.failures)}")
    return EXIT_OK


def cmd_compress(args):
    try:
        with open(args.input, "rb") as f:
            data = f.read()
    except OSError as exc:
        raise DataError(str(exc)) from exc
    backend = make_compressor(_spec(args))
    out = backend.decompress(data) if args.decompress else backend.compress(data)
    if args.out:
        with open(args.out, "wb") as f:
            f.write(out)
    print(f"lambda={len(data) if args.decompress else len(out)}")


def cmd_plot(args):
    records = harness.read_csv(args.input)
    if not records:
        raise ParameterError(f"{args.input}: no records")
    stats = harness.aggregate(records)
    svg, dat = harness.emit_plot(stats, args.axis, args.out)
    print(f"plot={svg} data={dat}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="compredict", description="Bit prediction by compressed length.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write bits from a Markov source")
    p.add_argument("--order", type=int, required=True, help="source order rho")
    p.add_argument("--p1", type=float, default=0.3, help="P(1) in each state (default: 0.3)")
    p.add_argument("--table", choices=("uniform", "random"), default="uniform",
                   help="uniform: every state uses p1; random: each state uses p1 or "
                        "1-p1 by a seeded coin flip (default: uniform)")
    p.add_argument("--n", type=int, required=True, help="number of bits")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default: 0)")
    p.add_argument("--out", required=True, help="output bit file")
    p.set_defaults(func=cmd_generate)

    for name, func, text in (("predict", cmd_predict, "predict each bit by the transition score"),
                             ("block-predict", cmd_block_predict,
                              "predict by voting over scored bit blocks")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--in", dest="input", required=True, help="input bit file")
        p.add_argument("--h", type=int, required=True, help="history window in bits")
        p.add_argument("--m", type=int, help="bits before the first prediction (default: h)")
        p.add_argument("--n-pred", type=int, help="predict at most this many bits (default: all)")
        p.add_argument("--seed", type=int, default=0, help="tie-break seed (default: 0)")
        _add_compressor_flags(p)
        p.set_defaults(func=func)
        if name == "predict":
            p.add_argument("--k", type=int, required=True, help="peeling size")
            p.add_argument("--r", type=int, default=20, help="repeat factor (default: 20)")
            p.add_argument("--q", type=int, default=100,
                           help="candidate repeat multiplier (default: 100)")
            p.add_argument("--trace-out", help="write a per-step CSV trace here")
        else:
            p.add_argument("--l", type=int, default=1, help="block length 1..8 (default: 1)")
            p.add_argument("--score", choices=("s1", "s2"), default="s1",
                           help="block score (default: s1)")

    p = sub.add_parser("sweep", help="run a parameter sweep from an INI config")
    p.add_argument("--config", required=True, help="sweep config file")
    p.add_argument("--out-dir", required=True, help="directory for results.csv and plots")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default: 1)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compress", help="compress a file and print its compressed length")
    p.add_argument("--in", dest="input", required=True, help="input file")
    p.add_argument("--out", help="output file")
    p.add_argument("--decompress", action="store_true",
                   help="decompress instead; lambda is then the input length")
    _add_compressor_flags(p)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("plot", help="plot a results CSV")
    p.add_argument("--in", dest="input", required=True, help="results CSV")
    p.add_argument("--axis", choices=harness.AXES, default="d", help="x axis (default: d)")
    p.add_argument("--out", required=True, help="output SVG")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args) or EXIT_OK
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BackendError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BACKEND


if __name__ == "__main__":
    sys.exit(main())
