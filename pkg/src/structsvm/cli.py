"""Command-line interface: train, gen, eval, and report.

Exit codes: 0 on success, 1 on runtime or data errors, 2 on usage errors.
All randomness flows from --seed, so identical flags reproduce identical
trace objective columns (timestamps aside).
"""

from __future__ import annotations

import argparse
import sys

from .datasets import (
    DatasetFormatError,
    ModelFormatError,
    check_model_compatible,
    generate,
    load_dataset,
    load_model,
    save_dataset,
    save_model,
)
from .solver import ALGORITHMS, SolverConfig, error_rate, primal_objective, train
from .trace import write_trace

__all__ = ["main"]


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DatasetFormatError, ModelFormatError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="structsvm",
        description="Structural SVM training with Frank-Wolfe dual solvers and plane caching.",
    )
    sub = parser.add_subparsers(required=True, metavar="command")

    p_train = sub.add_parser("train", help="train a model and log a convergence trace")
    p_train.add_argument("--data", required=True, help="dataset file")
    p_train.add_argument("--task", choices=("multiclass", "chain", "binary-potts"),
                         help="expected task kind (validated against the file header)")
    p_train.add_argument("--algo", default="bcfw", choices=ALGORITHMS)
    p_train.add_argument("--lambda", dest="lam", default="auto", type=_lambda_flag,
                         help="regularization constant, or 'auto' for 1/n (default)")
    p_train.add_argument("--passes", type=int, help="stop after this many outer iterations")
    p_train.add_argument("--gap-tol", type=float, help="stop when the duality gap falls below this")
    p_train.add_argument("--time-budget-ms", type=float, help="stop after this much wall time")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--cache-size", type=int, default=1000,
                         help="cached planes per example (multi-plane algorithms)")
    p_train.add_argument("--max-approx-passes", type=int, default=1000,
                         help="cap on approximate passes per iteration")
    p_train.add_argument("--inactivity", type=int, default=10,
                         help="iterations a cached plane may stay inactive before eviction")
    p_train.add_argument("--approx-policy", default="auto",
                         help="'auto' (slope rule) or 'fixed:K'")
    p_train.add_argument("--primal-every", type=int, default=1,
                         help="evaluate the primal every k iterations (0 = never)")
    p_train.add_argument("--log", help="trace output file")
    p_train.add_argument("--log-format", default="csv", choices=("csv", "json"))
    p_train.add_argument("--out", help="model output file")
    p_train.set_defaults(func=cmd_train, parser=p_train)

    p_gen = sub.add_parser("gen", help="generate a synthetic dataset")
    p_gen.add_argument("--task", required=True, choices=("multiclass", "chain", "binary-potts"))
    p_gen.add_argument("--n", type=int, required=True, help="number of examples")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True, help="dataset output file")
    p_gen.add_argument("--classes", type=int, help="class count (multiclass)")
    p_gen.add_argument("--labels", type=int, help="label count (chain)")
    p_gen.add_argument("--len", type=int, dest="length", help="sequence length (chain)")
    p_gen.add_argument("--grid", help="grid size RxC (binary-potts)")
    p_gen.add_argument("--dim", type=int, help="base/unary feature dimension")
    p_gen.add_argument("--smoothing", type=float, default=0.5,
                       help="ground-truth smoothing in [0,1] (binary-potts)")
    p_gen.set_defaults(func=cmd_gen, parser=p_gen)

    p_eval = sub.add_parser("eval", help="evaluate a saved model on a dataset")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--task", choices=("multiclass", "chain", "binary-potts"))
    p_eval.set_defaults(func=cmd_eval, parser=p_eval)

    p_report = sub.add_parser(
        "report", help="render suboptimality tables and convergence figures from traces"
    )
    p_report.add_argument("traces", nargs="+", help="trace files (csv or json-lines)")
    p_report.add_argument("--out-dir", required=True)
    p_report.add_argument("--label", action="append",
                          help="run label, one per trace (default: file stem)")
    p_report.add_argument("--format", default="png", choices=("png", "pdf", "svg"))
    p_report.set_defaults(func=cmd_report, parser=p_report)
    return parser


def _lambda_flag(text: str):
    if text == "auto":
        return None
    try:
        return float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a float, got {text!r}") from exc


def cmd_train(args) -> int:
    if args.passes is None and args.gap_tol is None and args.time_budget_ms is None:
        args.parser.error("at least one stopping criterion: --passes, --gap-tol, --time-budget-ms")
    dataset = load_dataset(args.data, kind=args.task)
    config = SolverConfig(
        algorithm=args.algo,
        lam=args.lam,
        cache_size=args.cache_size,
        max_approx_passes=args.max_approx_passes,
        inactivity=args.inactivity,
        approx_policy=args.approx_policy,
        seed=args.seed,
        max_passes=args.passes,
        gap_tol=args.gap_tol,
        time_budget_ms=args.time_budget_ms,
        primal_every=args.primal_every,
    )
    config.validate()
    result = train(dataset, config)
    if args.log:
        write_trace(args.log, result.trace, fmt=args.log_format)
    if args.out:
        metadata = {
            "task": dataset.kind,
            "task_params": dataset.task_params,
            "algorithm": result.algorithm,
            "lambda": result.lam,
            "seed": result.seed,
        }
        save_model(result.weights, metadata, args.out)
    print(f"dual: {result.dual!r}")
    print(f"primal: {'n/a' if result.primal is None else repr(result.primal)}")
    print(f"gap: {'n/a' if result.gap is None else repr(result.gap)}")
    return 0


def cmd_gen(args) -> int:
    if args.n < 1:
        args.parser.error("--n must be positive")
    try:
        if args.task == "multiclass":
            if args.classes is None:
                args.parser.error("--classes is required for multiclass")
            dataset = generate(
                "multiclass",
                seed=args.seed,
                n=args.n,
                num_classes=args.classes,
                base_dim=args.dim if args.dim is not None else 2,
            )
        elif args.task == "chain":
            if args.labels is None or args.length is None:
                args.parser.error("--labels and --len are required for chain")
            dataset = generate(
                "chain",
                seed=args.seed,
                n=args.n,
                length=args.length,
                num_labels=args.labels,
                unary_dim=args.dim if args.dim is not None else 2,
            )
        else:
            rows, cols = _parse_grid(args.grid, args.parser)
            dataset = generate(
                "binary-potts",
                seed=args.seed,
                n=args.n,
                rows=rows,
                cols=cols,
                unary_dim=args.dim if args.dim is not None else 2,
                smoothing=args.smoothing,
            )
    except ValueError as exc:
        args.parser.error(str(exc))
    save_dataset(dataset, args.out)
    print(f"wrote {dataset.kind} dataset with n={dataset.n} to {args.out}")
    return 0


def _parse_grid(text: str | None, parser) -> tuple[int, int]:
    if text is None:
        parser.error("--grid RxC is required for binary-potts")
    rows, _, cols = text.lower().partition("x")
    try:
        return int(rows), int(cols)
    except ValueError:
        parser.error(f"--grid expects RxC, got {text!r}")


def cmd_eval(args) -> int:
    weights, metadata = load_model(args.model)
    dataset = load_dataset(args.data, kind=args.task)
    check_model_compatible(metadata, dataset)
    lam = float(metadata["lambda"])
    primal = primal_objective(dataset.task, dataset.instances, weights, lam)
    error = error_rate(dataset.task, dataset.instances, weights)
    print(f"primal: {primal!r}")
    print(f"error_rate: {error!r}")
    return 0


def cmd_report(args) -> int:
    from .report import render_report

    written = render_report(args.traces, args.out_dir, labels=args.label, fmt=args.format)
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
