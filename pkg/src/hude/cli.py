"""Command-line interface.

Subcommands: ``gen`` (write instance files), ``query`` (run one algorithm on
a stored instance, print a JSON result), ``bench`` (parameter sweeps to CSV),
``tradeoff`` (lower/upper-bound curves to CSV), ``verify`` (invariant suite).
Data goes to files or stdout; logs go to stderr; everything except wall-time
fields is deterministic under ``--seed``.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .bench import AdaptiveSearchError, ExperimentConfig, run_sweep, write_results_csv
from .distributions import OpCounter
from .elimination import CandidateSet, eliminate
from .instances import (
    GapssInstance,
    gen_gapss,
    gen_hude,
    gen_urde,
    load_instance,
    save_instance,
)
from .rng import stream_key, substream
from .subset_index import IndexParams, dump_index, preprocess, query, theoretical_params
from .tradeoff import (
    DEFAULT_CURVES,
    SearchOptions,
    tradeoff_rows,
    write_tradeoff_csv,
)
from .verify import SUITES, run_suite


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _parse_grid(spec: str) -> list[float]:
    """Grid syntax 'lo:hi:logN' (geometric) or 'lo:hi:linN' (arithmetic)."""
    try:
        lo_s, hi_s, kind = spec.split(":")
        lo, hi = float(lo_s), float(hi_s)
        if kind.startswith("log"):
            count = int(kind[3:])
            return np.geomspace(lo, hi, count).tolist()
        if kind.startswith("lin"):
            count = int(kind[3:])
            return np.linspace(lo, hi, count).tolist()
    except (ValueError, IndexError):
        pass
    raise argparse.ArgumentTypeError(f"bad grid spec {spec!r} (want lo:hi:logN or lo:hi:linN)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hude",
        description="Half-uniform density estimation: generators, index, benchmarks, curves.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate an instance and write its files")
    gen.add_argument("--problem", required=True, choices=["hude", "urde", "gapss"])
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--k", type=int, required=True)
    gen.add_argument("--s", type=float, help="sample-ratio parameter (hude, urde)")
    gen.add_argument("--eps", type=float, help="L1 separation promise (hude)")
    gen.add_argument("--w-u", type=float, help="support inclusion probability (urde, gapss)")
    gen.add_argument("--w-q", type=float, help="query inclusion probability (gapss)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output directory")

    qry = sub.add_parser("query", help="run one algorithm against a stored instance")
    qry.add_argument("--instance", required=True, help="directory written by gen")
    qry.add_argument("--algorithm", required=True, choices=["subset", "elimination"])
    qry.add_argument("--variant", choices=["bucket-eliminate", "uj-certify"],
                     default="bucket-eliminate")
    qry.add_argument("--ell", type=int, help="probe size (subset)")
    qry.add_argument("--num-probes", type=int, help="probe count L (subset)")
    qry.add_argument("--rho-u", type=float,
                     help="derive L and ell from the space-exponent rule instead")
    qry.add_argument("--c", type=float, default=5.0,
                     help="probe-count constant of the space-exponent rule")
    qry.add_argument("--c-query", type=float, default=4.0)
    qry.add_argument("--eps", type=float, help="override the certify budget separation")
    qry.add_argument("--seed", type=int, default=0)
    qry.add_argument("--dump-index", help="also write a debug dump of the index here")

    ben = sub.add_parser("bench", help="parameter sweep over both algorithms")
    ben.add_argument("--sweep", choices=["k", "n", "S", "ell"])
    ben.add_argument("--values", help="comma-separated sweep values")
    ben.add_argument("--seed", type=int)
    ben.add_argument("--out", required=True, help="results CSV path")
    ben.add_argument("--scale", type=float, help="multiply k by this factor (0.2 = desk preset)")
    ben.add_argument("--queries", type=int, help="queries per sweep point")
    ben.add_argument("--variant", choices=["bucket-eliminate", "uj-certify"])
    ben.add_argument("--L-init", type=int, dest="L_init")
    ben.add_argument("--L-factor", type=float, dest="L_factor")
    ben.add_argument("--L-cap", type=int, dest="L_cap")
    ben.add_argument("--config", help="JSON config file; explicit flags override it")

    tro = sub.add_parser("tradeoff", help="emit trade-off curves as CSV")
    tro.add_argument("--rho-u", type=float, required=True)
    tro.add_argument("--s-grid", type=_parse_grid, required=True,
                     help="sample-ratio grid, e.g. 20:10000:log25")
    tro.add_argument("--eps", type=float, default=1.0)
    tro.add_argument("--w-u", type=float, default=0.5)
    tro.add_argument("--curves", default=",".join(DEFAULT_CURVES),
                     help="comma-separated curve ids")
    tro.add_argument("--prior-constant", type=float,
                     help="leading constant for the prior-general curve")
    tro.add_argument("--tu-points", type=int, default=401)
    tro.add_argument("--tq-points", type=int, default=241)
    tro.add_argument("--alpha-points", type=int, default=101)
    tro.add_argument("--out", required=True)

    ver = sub.add_parser("verify", help="run the invariant suite")
    ver.add_argument("--suite", default="all", choices=["all", *SUITES])

    return parser


def _cmd_gen(args) -> int:
    if args.problem == "hude":
        if args.s is None or args.eps is None:
            _log("gen hude needs --s and --eps")
            return 2
        instance = gen_hude(args.n, args.k, args.eps, args.s, args.seed)
    elif args.problem == "urde":
        if args.s is None or args.w_u is None:
            _log("gen urde needs --s and --w-u")
            return 2
        instance = gen_urde(args.n, args.k, args.w_u, args.s, args.seed)
    else:
        if args.w_u is None or args.w_q is None:
            _log("gen gapss needs --w-u and --w-q")
            return 2
        instance = gen_gapss(args.n, args.k, args.w_u, args.w_q, args.seed)
    save_instance(instance, args.out)
    _log(f"wrote {args.problem} instance (n={args.n}, k={args.k}) to {args.out}")
    return 0


def _cmd_query(args) -> int:
    instance = load_instance(args.instance)
    if isinstance(instance, GapssInstance):
        _log("query runs on sample-based instances; reduce gapss first")
        return 2
    counter = OpCounter()
    epsilon = args.eps if args.eps is not None else getattr(instance, "epsilon", 1.0)
    if args.algorithm == "elimination":
        start = time.perf_counter_ns()
        result = eliminate(
            instance.dataset, CandidateSet.full(instance.dataset.k), instance.query, counter
        )
        elapsed = time.perf_counter_ns() - start
        payload = {
            "outcome": result.outcome,
            "index": result.index,
            "ops": counter.membership_ops,
            "wall_time_ns": elapsed,
        }
    else:
        if args.rho_u is not None:
            choice = theoretical_params(
                args.rho_u, instance.s, instance.dataset.k, epsilon,
                c=args.c, c_query=args.c_query, variant=args.variant,
            )
            params = choice.params
            _log(
                f"space-exponent rule: L={params.num_probes} ell={params.probe_size} "
                f"predicted rho_q={choice.predicted_rho_q:.4f}"
                + (" (ell clamped)" if choice.clamped else "")
            )
        elif args.ell is None or args.num_probes is None:
            _log("subset queries need --ell and --num-probes (or --rho-u)")
            return 2
        else:
            params = IndexParams(args.num_probes, args.ell, c_query=args.c_query,
                                 variant=args.variant)
        index = preprocess(instance.dataset, params, stream_key(args.seed, "cli-preprocess"))
        if args.dump_index:
            with open(args.dump_index, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(dump_index(index))
        rng = substream(args.seed, "cli-certify")
        start = time.perf_counter_ns()
        result = query(index, instance.query, epsilon, counter, rng=rng)
        elapsed = time.perf_counter_ns() - start
        payload = {
            "outcome": result.outcome,
            "index": result.index,
            "ops": counter.membership_ops,
            "wall_time_ns": elapsed,
        }
    payload["truth_index"] = instance.truth_index
    print(json.dumps(payload, sort_keys=True))
    return 0


def _cmd_bench(args) -> int:
    payload: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            payload.update(json.load(fh))
    if args.sweep:
        payload["sweep_param"] = args.sweep
    if args.values:
        payload["sweep_values"] = [int(v) for v in args.values.split(",")]
    if args.seed is not None:
        payload["seed"] = args.seed
    if args.scale is not None:
        payload["scale"] = args.scale
    if args.queries is not None:
        payload["queries_per_point"] = args.queries
    if args.variant is not None:
        payload["variant"] = args.variant
    for name in ("L_init", "L_factor", "L_cap"):
        value = getattr(args, name)
        if value is not None:
            payload[name] = value
    config = ExperimentConfig.from_json(payload)
    _log(f"sweeping {config.sweep_param} over {list(config.sweep_values)} (seed {config.seed})")
    try:
        rows = run_sweep(config)
    except AdaptiveSearchError as err:
        _log(f"adaptive probe search aborted at {err.point}: {err}")
        _log(f"accuracy trace: {err.trace}")
        return 1
    metadata = {"config": payload, "version": __version__}
    write_results_csv(rows, args.out, metadata)
    _log(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_tradeoff(args) -> int:
    curves = tuple(c for c in args.curves.split(",") if c)
    opts = SearchOptions(tu_points=args.tu_points, tq_points=args.tq_points)
    rows = tradeoff_rows(
        args.rho_u,
        args.s_grid,
        epsilon=args.eps,
        w_u=args.w_u,
        curves=curves,
        prior_constant=args.prior_constant,
        opts=opts,
        alpha_points=args.alpha_points,
    )
    metadata = {
        "rho_u": args.rho_u,
        "epsilon": args.eps,
        "w_u": args.w_u,
        "curves": list(curves),
        "version": __version__,
    }
    write_tradeoff_csv(rows, args.out, metadata)
    _log(f"wrote {len(rows)} curve points to {args.out}")
    return 0


def _cmd_verify(args) -> int:
    results = run_suite(args.suite)
    failures = 0
    for name, passed, detail in results:
        if passed:
            print(f"PASS {name}")
        else:
            failures += 1
            print(f"FAIL {name}: {detail}")
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return 0 if failures == 0 else 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "gen": _cmd_gen,
        "query": _cmd_query,
        "bench": _cmd_bench,
        "tradeoff": _cmd_tradeoff,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except (FileNotFoundError, IsADirectoryError) as err:
        _log(f"file error: {err}")
        return 1
    except ValueError as err:
        _log(f"error: {err}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
