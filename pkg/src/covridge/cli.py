"""Command-line interface.

Subcommands: `gen` writes synthetic datasets with ground truth, `run`
executes the ranking pipeline on a CSV, `eval` scores a report against a
ground-truth file, `bench` runs the replicated benchmark suites. Exit
codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, fileio
from .bench import (
    SEM_SAMPLE_SIZES,
    TOY_EXTRAS_LEVELS,
    run_poly_suite_by_name,
    run_sem_suite,
)
from .crp import CrpConfig, crp_run
from .errors import CovridgeError, DataError, NumericalError, UsageError
from .evalharness import evaluate_ranking
from .synthgen import (
    PolyToySpec,
    gen_poly_toy,
    gen_sem_model,
    markov_boundary_of,
    sample_bn,
    sample_sem,
)


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems as UsageError (exit 1)."""

    def error(self, message: str):
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from None


def build_parser() -> _Parser:
    parser = _Parser(prog="covridge", description=__doc__)
    parser.add_argument("--version", action="version", version=f"covridge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate synthetic data with ground truth")
    gen_sub = gen.add_subparsers(dest="generator", required=True)

    poly = gen_sub.add_parser("poly", help="polynomial toy data")
    poly.add_argument("--family", choices=("gaussian", "beta22", "beta-random"), default="gaussian")
    poly.add_argument("--extras", type=int, default=95)
    poly.add_argument("--n", type=int, default=1000)
    poly.add_argument("--seed", type=int, default=0)
    poly.add_argument("--noise-sd", type=float, default=1e-4)
    poly.add_argument("--out", default=".", help="output directory")

    sem = gen_sub.add_parser("sem", help="linear structural model data")
    sem.add_argument("--p", type=int, default=50)
    sem.add_argument("--degree", type=float, default=2.0)
    sem.add_argument("--n", type=int, default=500)
    sem.add_argument("--seed", type=int, default=0)
    sem.add_argument("--acyclic", action="store_true", help="forbid feedback loops")
    sem.add_argument("--out", default=".", help="output directory")

    bn = gen_sub.add_parser("bn-sample", help="sample a discrete Bayesian network")
    bn.add_argument("--model", required=True, help="network model JSON")
    bn.add_argument("--n", type=int, default=1000)
    bn.add_argument("--seed", type=int, default=0)
    bn.add_argument("--target", help="also write ground truth for this variable")
    bn.add_argument("--out", default=".", help="output directory")

    run = sub.add_parser("run", help="rank the variables of a CSV against a response")
    run.add_argument("--data", required=True, help="input CSV")
    run.add_argument("--response", required=True, help="response column name")
    run.add_argument("--loss", choices=("auto", "mse", "multinomial"), default="auto")
    run.add_argument("--covariance", choices=("auto", "sample", "lw2004"), default="auto")
    run.add_argument("--lambda", dest="lambda_fixed", type=float, default=None,
                     help="skip cross validation and use this penalty")
    run.add_argument("--B", type=int, default=1000, help="permutation count")
    run.add_argument("--folds", type=int, default=10)
    run.add_argument("--alpha", type=float, default=0.05)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", default="report.json")

    ev = sub.add_parser("eval", help="score a report against a ground-truth file")
    ev.add_argument("--report", required=True)
    ev.add_argument("--truth", required=True)
    ev.add_argument("--h", type=int, default=None,
                    help="ranking depth for hit@h (default: boundary size)")
    ev.add_argument("--out", default="summary.json")

    bench = sub.add_parser("bench", help="replicated benchmark suites")
    bench.add_argument("suite", choices=("toy-gaussian", "toy-beta22", "toy-beta-random", "sem"))
    bench.add_argument("--reps", type=int, default=20)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--B", type=int, default=500)
    bench.add_argument("--n", type=int, default=1000, help="samples per toy replicate")
    bench.add_argument("--extras-levels", type=_int_list,
                       default=list(TOY_EXTRAS_LEVELS), help="toy suites only")
    bench.add_argument("--p", type=int, default=50, help="sem suite only")
    bench.add_argument("--degree", type=float, default=2.0, help="sem suite only")
    bench.add_argument("--sizes", type=_int_list, default=list(SEM_SAMPLE_SIZES),
                       help="sem suite only")
    bench.add_argument("--alpha", type=float, default=0.05)
    bench.add_argument("--out", default="summary.json")
    return parser


def _cmd_gen_poly(args, argv) -> int:
    spec = PolyToySpec(
        family=args.family.replace("-", "_"),
        extras=args.extras,
        n=args.n,
        seed=args.seed,
        noise_sd=args.noise_sd,
    )
    data, truth = gen_poly_toy(spec)
    out = Path(args.out)
    fileio.write_csv(out / "data.csv", data)
    manifest = fileio.build_manifest(
        argv,
        {"family": spec.family, "extras": spec.extras, "n": spec.n, "noise_sd": spec.noise_sd},
        {"seed": spec.seed},
    )
    fileio.write_json_atomic(out / "truth.json", fileio.truth_to_dict(truth) | {"manifest": manifest})
    return 0


def _cmd_gen_sem(args, argv) -> int:
    model = gen_sem_model(args.p, args.degree, allow_cycles=not args.acyclic, seed=args.seed)
    truth = markov_boundary_of(model.graph(), model.response, source="sem")
    data = sample_sem(model, args.n, args.seed)
    out = Path(args.out)
    fileio.write_csv(out / "data.csv", data)
    manifest = fileio.build_manifest(
        argv,
        {"p": args.p, "degree": args.degree, "n": args.n, "acyclic": bool(args.acyclic)},
        {"seed": args.seed},
    )
    fileio.write_json_atomic(out / "model.json", fileio.sem_model_to_dict(model) | {"manifest": manifest})
    fileio.write_json_atomic(out / "truth.json", fileio.truth_to_dict(truth) | {"manifest": manifest})
    return 0


def _cmd_gen_bn(args, argv) -> int:
    model = fileio.bn_model_from_dict(fileio.read_json(args.model))
    data = sample_bn(model, args.n, args.seed)
    out = Path(args.out)
    fileio.write_csv(out / "data.csv", data)
    manifest = fileio.build_manifest(
        argv, {"n": args.n, "target": args.target}, {"seed": args.seed}, {"model": args.model}
    )
    if args.target is not None:
        truth = markov_boundary_of(model.graph(), args.target, source="bn")
        fileio.write_json_atomic(
            out / "truth.json", fileio.truth_to_dict(truth) | {"manifest": manifest}
        )
    return 0


def _cmd_run(args, argv) -> int:
    data = fileio.read_csv(args.data)
    config = CrpConfig(
        loss=args.loss,
        covariance=args.covariance,
        cv_folds=args.folds,
        permutations=args.B,
        seed=args.seed,
        alpha_level=args.alpha,
        lambda_fixed=args.lambda_fixed,
    )
    report = crp_run(data, args.response, config)
    manifest = fileio.build_manifest(argv, report.config, {"seed": args.seed}, {"data": args.data})
    fileio.write_json_atomic(args.out, fileio.report_to_dict(report) | {"manifest": manifest})
    return 0


def _cmd_eval(args, argv) -> int:
    report = fileio.report_from_dict(fileio.read_json(args.report))
    truth = fileio.truth_from_dict(fileio.read_json(args.truth))
    h = args.h if args.h is not None else len(truth.mb)
    summary = evaluate_ranking(report, truth, h)
    manifest = fileio.build_manifest(
        argv, {"h": h}, {}, {"report": args.report, "truth": args.truth}
    )
    fileio.write_json_atomic(
        args.out,
        {
            "schema_version": fileio.SCHEMA_VERSION,
            "replicate_id": summary.replicate_id,
            "h": summary.h,
            "hit_at_h": summary.hit_at_h,
            "tp_selected": summary.tp_selected,
            "fp_selected": summary.fp_selected,
            "mb_ranks": list(summary.mb_ranks),
            "manifest": manifest,
        },
    )
    return 0


def _cmd_bench(args, argv) -> int:
    if args.suite == "sem":
        result = run_sem_suite(
            reps=args.reps,
            seed=args.seed,
            p=args.p,
            expected_degree=args.degree,
            b=args.B,
            sizes=args.sizes,
            alpha_level=args.alpha,
        )
    else:
        result = run_poly_suite_by_name(
            args.suite,
            reps=args.reps,
            seed=args.seed,
            n=args.n,
            b=args.B,
            extras_levels=args.extras_levels,
            alpha_level=args.alpha,
        )
    manifest = fileio.build_manifest(
        argv,
        {
            "suite": args.suite,
            "reps": args.reps,
            "B": args.B,
            "n": args.n,
            "extras_levels": args.extras_levels,
            "p": args.p,
            "degree": args.degree,
            "sizes": args.sizes,
            "alpha": args.alpha,
        },
        {"seed": args.seed},
    )
    fileio.write_json_atomic(
        args.out,
        {
            "schema_version": fileio.SCHEMA_VERSION,
            "suite": result["suite"],
            "groups": result["groups"],
            "failed_replicates": result["failed_replicates"],
            "manifest": manifest,
        },
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "gen":
            handler = {
                "poly": _cmd_gen_poly,
                "sem": _cmd_gen_sem,
                "bn-sample": _cmd_gen_bn,
            }[args.generator]
            return handler(args, ["covridge"] + argv)
        if args.command == "run":
            return _cmd_run(args, ["covridge"] + argv)
        if args.command == "eval":
            return _cmd_eval(args, ["covridge"] + argv)
        if args.command == "bench":
            return _cmd_bench(args, ["covridge"] + argv)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"covridge: usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"covridge: data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"covridge: numerical failure: {exc}", file=sys.stderr)
        return 3
    except CovridgeError as exc:
        print(f"covridge: error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    raise SystemExit(main())
