"""Command-line front end.

Subcommands: gen, gram, attack, recover, csp, probe, bench.  All randomness
flows from --seed; every output file is a deterministic function of the
arguments (timings go to stdout, never into files), so identical invocations
produce byte-identical artifacts.

Exit codes: 0 success, 2 parameter/usage error, 3 recovery or verification
failure.
"""

from __future__ import annotations

import argparse
import csv as csv_mod
import json
import sys
import time

import numpy as np

from . import csp as csp_mod
from . import probes
from .errors import SsbmfError, ParameterError
from .instance import (GramMatrix, SelectionMatrix, factorization_error,
                       gen_selection_matrix, gram, load_json, save_json)
from .jennrich import RecoverConfig, tensor_recover
from .mu import mu_table, required_sample_size
from .recover import (Dataset, HeavyRecoveryConfig, SyntheticDataset,
                      recover_dataset)

EXIT_OK = 0
EXIT_PARAM = 2
EXIT_FAILURE = 3


def _emit(obj: dict, out: str, fmt: str) -> None:
    if out is None or out == "-":
        if fmt == "pretty":
            for key, value in sorted(obj.items()):
                print(f"{key}: {value}")
        else:
            print(json.dumps(obj, sort_keys=True))
        return
    if fmt == "csv":
        with open(out, "w", newline="") as fh:
            writer = csv_mod.writer(fh)
            for key, value in sorted(obj.items()):
                writer.writerow([key, value])
    else:
        save_json(obj, out)


def _cmd_gen(args) -> int:
    W = gen_selection_matrix(args.m, args.r, args.k, args.seed)
    save_json(W.to_json(seed=args.seed), args.out)
    return EXIT_OK


def _cmd_gram(args) -> int:
    W = SelectionMatrix.from_json(load_json(args.infile))
    M = gram(W, args.arithmetic)
    save_json(M.to_json(), args.out)
    return EXIT_OK


def _cmd_attack(args) -> int:
    M = GramMatrix.from_json(load_json(args.gram))
    config = RecoverConfig(mode=args.mode, anchors=args.anchors, seed=args.seed)
    start = time.perf_counter()
    result = tensor_recover(M, args.r, args.k, config)
    elapsed = time.perf_counter() - start
    report = result.report(include_timing=False)
    if args.out:
        save_json(report, args.out)
    if args.w_out and result.W_hat is not None:
        save_json(result.W_hat.to_json(), args.w_out)
    print(json.dumps({**report, "seconds": round(elapsed, 3)}, sort_keys=True))
    return EXIT_OK if result.success else EXIT_FAILURE


def _cmd_recover(args) -> int:
    M = GramMatrix.from_json(load_json(args.gram))
    Z = np.loadtxt(args.synthetic, delimiter=",", ndmin=2)
    synthetic = SyntheticDataset(Z=Z)
    cfg = HeavyRecoveryConfig(eta=args.eta, c_heavy=args.c_heavy)
    config = RecoverConfig(mode=args.mode, anchors=args.anchors, seed=args.seed)
    dataset, report = recover_dataset(M, synthetic, args.r, args.k, cfg, config)
    if dataset is not None and args.out:
        dataset.to_csv(args.out)
    printable = {"success": report["success"]}
    if "failure" in report:
        printable["failure"] = report["failure"]
    print(json.dumps(printable, sort_keys=True))
    return EXIT_OK if report["success"] else EXIT_FAILURE


def _cmd_csp(args) -> int:
    M = GramMatrix.from_json(load_json(args.gram))
    if args.mode == "int":
        W = None
        counts = None
        if M.counts is None:
            raise ParameterError(
                "integer mode needs integer entries; regenerate with gram --arithmetic integer")
        inst = csp_mod.reduce_symmetric(M, args.r, args.k, "integer")
    else:
        inst = csp_mod.reduce_symmetric(M, args.r, args.k, "boolean")
    if args.solver == "exact":
        assignment = csp_mod.solve_exact(inst, budget=args.budget)
    else:
        assignment = csp_mod.solve_local(inst, restarts=args.restarts,
                                         iters=args.iters, seed=args.seed)
    _, residual = csp_mod.assignment_to_factors(inst, assignment)
    report = {"value": assignment.value, "edges": inst.n_edges,
              "gap": inst.n_edges - assignment.value,
              "off_diagonal_l0": residual}
    _emit(report, args.out, args.report)
    return EXIT_OK


def _cmd_probe(args) -> int:
    if args.what == "rank":
        W = SelectionMatrix.from_json(load_json(args.infile))
        report = probes.rank_report(W, primes=args.primes, seed=args.seed)
        obj = {"rank_f2": report.rank_f2, "rank_real": report.rank_real,
               **{f"rank_mod_{q}": v for q, v in report.rank_modq.items()}}
    elif args.what == "krawtchouk":
        obj = probes.krawtchouk_bound_check(args.r, args.k)
    elif args.what == "singularity":
        obj = probes.singularity_experiment(args.m, args.r, args.k,
                                            args.trials, args.seed)
        obj = {"m": obj["m"], "r": obj["r"], "k": obj["k"],
               "f2_frequency": obj["f2"]["frequency"],
               "real_frequency": obj["real"]["frequency"],
               "real_ci_low": obj["real"]["ci_low"],
               "real_ci_high": obj["real"]["ci_high"]}
    else:  # anticoncentration
        rng = np.random.Generator(np.random.Philox(key=args.seed))
        x = rng.integers(-5, 6, size=args.r)
        obj = probes.anticoncentration_estimate(
            x, args.r, args.k, q=args.q, samples=args.trials, seed=args.seed)
    _emit(obj, args.out, args.report)
    return EXIT_OK


def _cmd_bench(args) -> int:
    timings = {}
    start = time.perf_counter()
    W = gen_selection_matrix(args.m, args.r, args.k, args.seed)
    timings["gen_seconds"] = time.perf_counter() - start
    start = time.perf_counter()
    M = gram(W, "boolean")
    timings["gram_seconds"] = time.perf_counter() - start
    start = time.perf_counter()
    factorization_error(M, W)
    timings["verify_seconds"] = time.perf_counter() - start
    timings["suggested_m"] = required_sample_size(
        args.r, args.k, 3 * args.k, 0.1)
    print(json.dumps({k: (round(v, 4) if isinstance(v, float) else v)
                      for k, v in timings.items()}, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssbmf",
        description="Sparse symmetric Boolean matrix factorization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random selection matrix")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("gram", help="Gram matrix of a stored selection matrix")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--arithmetic", choices=["boolean", "integer"],
                   default="boolean")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gram)

    p = sub.add_parser("attack", help="recover W from a Boolean Gram matrix")
    p.add_argument("--gram", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--mode", choices=["full", "anchored"], default="anchored")
    p.add_argument("--anchors", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--w-out", default=None)
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("recover", help="recover heavy coordinates of a dataset")
    p.add_argument("--gram", required=True)
    p.add_argument("--synthetic", required=True, help="CSV of the m x d matrix")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eta", type=float, default=0.25)
    p.add_argument("--c-heavy", type=float, default=6.0)
    p.add_argument("--mode", choices=["full", "anchored"], default="anchored")
    p.add_argument("--anchors", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_recover)

    p = sub.add_parser("csp", help="reduce to Max 2-CSP and solve")
    p.add_argument("--gram", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--mode", choices=["int", "bool"], default="bool")
    p.add_argument("--solver", choices=["exact", "local"], default="exact")
    p.add_argument("--budget", type=int, default=10 ** 7)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", choices=["json", "csv", "pretty"], default="json")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_csp)

    p = sub.add_parser("probe", help="validation probes")
    p.add_argument("what", choices=["rank", "krawtchouk", "singularity",
                                    "anticoncentration"])
    p.add_argument("--in", dest="infile", default=None)
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--r", type=int, default=16)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--q", default="real")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--primes", type=int, nargs="*", default=[])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", choices=["json", "csv", "pretty"], default="json")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_probe)

    p = sub.add_parser("bench", help="timing of the core kernels")
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--r", type=int, default=12)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARAM if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ParameterError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except SsbmfError as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    raise SystemExit(main())
