"""Command-line interface.

Exit codes: 0 success, 1 I/O or data error, 2 usage error, 3 solver
non-convergence (partial output is still written).
"""
from __future__ import annotations

import argparse
import contextlib
import json
import logging
import math
import os
import sys
from typing import Iterable, Optional

import numpy as np

from . import __version__
from .data import (LETTER_TRAIN_ROWS, DataError, Dataset, ToyConfig, load_csv, load_letter,
                   load_libsvm, load_plain, sample_bivariate_normal)
from .experiments import LETTER_RBF_GAMMA, TOY_EPSILONS, letter_benchmark, score_grid, toy_sweep
from .kernels import KernelError, KernelSpec
from .metrics import EvalError, GridSearchSpec, grid_search, one_vs_rest_eval
from .svm import (CASE_LABELS, ModelFormatError, NonConvergenceError, SlabError, SlabModel,
                  SlabTrainConfig, classify_kkt_cases, load_model, save_model, train_ocsvm,
                  train_slab)

EXIT_OK, EXIT_DATA, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2, 3

log = logging.getLogger("slabsvm")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output

def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "nan" if math.isnan(v) else repr(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return None if math.isnan(v) else v
    if isinstance(v, np.integer):
        return int(v)
    return v


class Writer:
    """Emits tables or single records as text, CSV, or JSON lines.

    All three formats carry the same fields.
    """

    def __init__(self, stream, fmt):
        self.stream = stream
        self.fmt = fmt

    def table(self, columns: list, rows: Iterable[list]):
        rows = [list(r) for r in rows]
        if self.fmt == "json-lines":
            for r in rows:
                self.stream.write(json.dumps({c: _json_value(v) for c, v in zip(columns, r)}) + "\n")
        elif self.fmt == "csv":
            self.stream.write(",".join(columns) + "\n")
            for r in rows:
                self.stream.write(",".join(_cell(v) for v in r) + "\n")
        else:
            cells = [[_cell(v) for v in r] for r in rows]
            widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
            self.stream.write("  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip() + "\n")
            for r in cells:
                self.stream.write("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() + "\n")

    def record(self, rec: dict):
        if self.fmt == "text":
            for k, v in rec.items():
                self.stream.write(f"{k}: {_cell(v)}\n")
        else:
            self.table(list(rec), [list(rec.values())])


@contextlib.contextmanager
def _open_output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


# ---------------------------------------------------------------------------
# argument parsing

def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _global_options(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    g = parser.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=default if suppress else 0,
                   help="random seed (default 0)")
    g.add_argument("--threads", type=_positive_int, default=default if suppress else 1,
                   help="worker threads for grid search and benchmarks")
    g.add_argument("--output", default=default if suppress else "-",
                   help="output path, '-' for stdout")
    g.add_argument("--format", choices=("text", "csv", "json-lines"),
                   default=default if suppress else "text")
    g.add_argument("-v", "--verbose", action="count", default=default if suppress else 0)


def _data_options(p, required=True):
    p.add_argument("--data", required=required, help="input file, '-' for stdin")
    p.add_argument("--data-format", choices=("letter", "libsvm", "csv"), default="letter")
    p.add_argument("--label-column", default="label",
                   help="CSV label column name, 0-based index, or 'none' for unlabeled rows "
                        "(default 'label')")


def _kernel_options(p, default="rbf"):
    p.add_argument("--kernel", default=default,
                   choices=("linear", "rbf", "intersection", "hellinger", "chi2", "chi_squared"))
    p.add_argument("--gamma", type=float, help="RBF width (required for --kernel rbf)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slabsvm", description="One-class slab SVM training and evaluation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        _global_options(p, suppress=True)
        return p

    p = add("train", "Train a slab model (or the one-class SVM baseline) and write a model file.")
    _data_options(p)
    p.add_argument("--target", help="class to learn (required for labeled multi-class data)")
    p.add_argument("--train-rows", type=int,
                   help=f"use only the first N rows (default {LETTER_TRAIN_ROWS} for letter data, all otherwise)")
    _kernel_options(p)
    p.add_argument("--nu1", type=float, default=0.10)
    p.add_argument("--nu2", type=float, default=0.01)
    p.add_argument("--epsilon", type=float, default=0.6666666667)
    p.add_argument("--baseline-ocsvm", action="store_true", help="train the one-class SVM instead")
    p.add_argument("--nu", type=float, default=0.1, help="nu of the baseline")
    p.add_argument("--feature-scale", type=float, default=1.0,
                   help="divide features by this value before training (default 1: raw)")
    p.add_argument("--model-out", required=True)

    p = add("predict", "Label rows with a trained model (one '<label> <score>' per row).")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help="unlabeled rows (comma or whitespace separated), '-' for stdin")

    p = add("eval", "Evaluate a model on positive and negative test rows.")
    p.add_argument("--model", required=True)
    p.add_argument("--positives", required=True)
    p.add_argument("--negatives", required=True)

    p = add("toy", "Gaussian toy experiment: fraction of training points accepted.")
    p.add_argument("--count", type=_positive_int, default=1500)
    p.add_argument("--kernel", choices=("linear", "rbf"), default="linear")
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--nu1", type=float, default=0.1)
    p.add_argument("--nu2", type=float, default=0.05)
    p.add_argument("--epsilon", type=float, default=2.0 / 3.0)
    p.add_argument("--epsilon-sweep", action="store_true", help="run epsilon = 1/6 .. 5/6")
    p.add_argument("--grid-out", help="write x,y,score,label over a 200x200 grid (epsilon = 2/3 model)")

    p = add("letter-bench", "Per-letter MCC of the slab model and the baseline.")
    p.add_argument("--data", required=True)
    p.add_argument("--kernel", default="rbf",
                   choices=("linear", "rbf", "intersection", "hellinger", "chi2", "chi_squared"))
    p.add_argument("--gamma-table", help="file of '<class> <gamma>' lines (default: built-in table)")
    p.add_argument("--classes", help="comma-separated subset of classes")
    p.add_argument("--feature-scale", type=float, default=15.0,
                   help="divide features by this value before training (default 15, i.e. [0, 1])")
    p.add_argument("--train-rows", type=int, default=LETTER_TRAIN_ROWS)
    p.add_argument("--nu1", type=float, default=0.10)
    p.add_argument("--nu2", type=float, default=0.01)
    p.add_argument("--epsilon", type=float, default=2.0 / 3.0)
    p.add_argument("--nu", type=float, default=0.1)

    p = add("gridsearch", "Rank parameter combinations by k-fold cross-validated recall.")
    _data_options(p)
    p.add_argument("--target", help="class to learn")
    p.add_argument("--train-rows", type=int)
    p.add_argument("--model", choices=("ocssvm", "ocsvm"), default="ocssvm")
    p.add_argument("--kernels", default="rbf", help="comma-separated kernel families")
    p.add_argument("--gammas", type=_float_list, default=[1.0])
    p.add_argument("--nu1s", type=_float_list, default=[0.1])
    p.add_argument("--nu2s", type=_float_list, default=[0.01])
    p.add_argument("--epsilons", type=_float_list, default=[2.0 / 3.0])
    p.add_argument("--nus", type=_float_list, default=[0.1])
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--feature-scale", type=float, default=1.0)

    p = add("kkt-report", "Classify each training sample of a slab model by its KKT case.")
    p.add_argument("--model", required=True)
    p.add_argument("--data", help="training rows to check against the model (optional)")
    return parser


# ---------------------------------------------------------------------------
# helpers

def _kernel(args) -> KernelSpec:
    family = "chi_squared" if args.kernel == "chi2" else args.kernel
    if family == "rbf":
        if args.gamma is None:
            raise UsageError("--gamma is required for the rbf kernel")
        if not args.gamma > 0:
            raise UsageError("--gamma must be positive")
        return KernelSpec("rbf", args.gamma)
    if getattr(args, "gamma", None) is not None:
        raise UsageError(f"--gamma applies only to the rbf kernel, not {family}")
    return KernelSpec(family)


def _check_nu(value, flag):
    if not 0.0 < value <= 1.0:
        raise UsageError(f"{flag} must lie in (0, 1]")


def _check_epsilon(value):
    if not value > 0:
        raise UsageError("--epsilon must be positive")
    if value == 1.0:
        raise UsageError("--epsilon must differ from 1 (epsilon = 1 yields the trivial solution)")


def _load_labeled(args) -> Dataset:
    if args.data_format == "letter":
        return load_letter(args.data)
    if args.data_format == "libsvm":
        return load_libsvm(args.data)
    column = args.label_column
    if column == "none":
        column = None
    elif column.lstrip("-").isdigit():
        column = int(column)
    return load_csv(args.data, column)


def _training_rows(args) -> np.ndarray:
    data = _load_labeled(args)
    n = args.train_rows
    if n is None and args.data_format == "letter":
        n = LETTER_TRAIN_ROWS
    labels = np.array(data.labels, dtype=object)
    X = data.features
    if n is not None:
        if not 0 < n <= len(data):
            raise UsageError(f"--train-rows must lie in 1..{len(data)}")
        X, labels = X[:n], labels[:n]
    if args.target is None:
        if len(set(labels)) > 1:
            raise UsageError("--target is required: the data holds several classes")
        return X
    mask = labels == args.target
    if not mask.any():
        raise DataError(f"class {args.target!r} not found in the training rows")
    return X[mask]


# ---------------------------------------------------------------------------
# commands

def cmd_train(args, out: Writer):
    kernel = _kernel(args)
    if args.data_format == "letter" and args.target is None:
        raise UsageError("--target is required for letter data")
    if args.baseline_ocsvm:
        _check_nu(args.nu, "--nu")
    else:
        _check_nu(args.nu1, "--nu1")
        _check_nu(args.nu2, "--nu2")
        _check_epsilon(args.epsilon)
    if not args.feature_scale > 0:
        raise UsageError("--feature-scale must be positive")
    X = _training_rows(args) / args.feature_scale
    status = EXIT_OK
    try:
        if args.baseline_ocsvm:
            model = train_ocsvm(X, args.nu, kernel)
        else:
            model = train_slab(X, SlabTrainConfig(args.nu1, args.nu2, args.epsilon, kernel))
    except NonConvergenceError as exc:
        if exc.model is None:
            raise
        log.error("%s; writing the partial model", exc)
        model, status = exc.model, EXIT_NONCONVERGED
    save_model(model, args.model_out)
    rec = {"model": "ocsvm" if args.baseline_ocsvm else "ocssvm", "kernel": str(kernel),
           "m": model.m, "support_vectors": model.support_vectors.shape[0],
           "converged": status == EXIT_OK, "iterations": model.iterations}
    if args.baseline_ocsvm:
        rec["rho"] = model.rho
    else:
        rec.update(rho1=model.rho1, rho2=model.rho2, n_sv1=model.n_sv1, n_sv2=model.n_sv2,
                   flags=" ".join(sorted(model.flags)) or "none")
    rec["model_file"] = args.model_out
    out.record(rec)
    return status


def _model_rows(model, X):
    if X.shape[0] and X.shape[1] != model.dim:
        raise DataError(f"data has {X.shape[1]} features, model expects {model.dim}")
    return X


def cmd_predict(args, out: Writer):
    model = load_model(args.model)
    X = _model_rows(model, load_plain(args.data))
    if X.shape[0] == 0:
        return EXIT_OK
    labels = model.predict(X)
    s = model.scores(X)
    if out.fmt == "text":
        for lab, val in zip(labels, s):
            out.stream.write(f"{int(lab):+d} {float(val)!r}\n")
    else:
        out.table(["label", "score"], [[int(a), float(b)] for a, b in zip(labels, s)])
    return EXIT_OK


def cmd_eval(args, out: Writer):
    model = load_model(args.model)
    P = _model_rows(model, load_plain(args.positives))
    N = _model_rows(model, load_plain(args.negatives))
    if P.shape[0] == 0 or N.shape[0] == 0:
        raise DataError("positives and negatives must both be nonempty")
    out.record(one_vs_rest_eval(model, P, N).record())
    return EXIT_OK


def cmd_toy(args, out: Writer):
    _check_nu(args.nu1, "--nu1")
    _check_nu(args.nu2, "--nu2")
    kernel = KernelSpec("rbf", args.gamma) if args.kernel == "rbf" else KernelSpec.linear()
    epsilons = TOY_EPSILONS if args.epsilon_sweep else (args.epsilon,)
    for eps in epsilons:
        _check_epsilon(eps)
    data = sample_bivariate_normal(ToyConfig(count=args.count, seed=args.seed))
    points = toy_sweep(kernel, nu1=args.nu1, nu2=args.nu2, epsilons=epsilons, data=data)
    status = EXIT_OK if all(p.model.converged for p in points) else EXIT_NONCONVERGED
    out.table(["epsilon", "fraction_positive", "rho1", "rho2", "converged", "flags"],
              [[p.epsilon, p.fraction_positive, p.model.rho1, p.model.rho2, p.model.converged,
                " ".join(sorted(p.model.flags)) or "none"] for p in points])
    if args.grid_out:
        chosen = min(points, key=lambda p: abs(p.epsilon - 2.0 / 3.0)).model
        grid = score_grid(chosen, data.features)
        with open(args.grid_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("x,y,score,label\n")
            for x, y, sc, lab in grid:
                fh.write(f"{float(x)!r},{float(y)!r},{float(sc)!r},{int(lab)}\n")
    return status


def _read_gamma_table(path):
    table = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected '<class> <gamma>'")
            try:
                table[parts[0]] = float(parts[1])
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad gamma {parts[1]!r}") from None
    return table


def cmd_letter_bench(args, out: Writer):
    family = "chi_squared" if args.kernel == "chi2" else args.kernel
    _check_nu(args.nu1, "--nu1")
    _check_nu(args.nu2, "--nu2")
    _check_nu(args.nu, "--nu")
    _check_epsilon(args.epsilon)
    if not args.feature_scale > 0:
        raise UsageError("--feature-scale must be positive")
    data = load_letter(args.data)
    if args.feature_scale != 1.0:
        data = Dataset(data.features / args.feature_scale, data.labels, data.name)
    classes = args.classes.split(",") if args.classes else None
    table = None
    if family == "rbf":
        table = _read_gamma_table(args.gamma_table) if args.gamma_table else LETTER_RBF_GAMMA
        unknown = sorted(set(table) - set(data.classes))
        if unknown:
            raise DataError(f"gamma table names unknown classes: {', '.join(unknown)}")
    try:
        bench = letter_benchmark(data, family, table, classes, args.nu1, args.nu2, args.epsilon,
                                 args.nu, args.train_rows, threads=args.threads)
    except KeyError as exc:
        raise DataError(str(exc.args[0])) from None
    rows = [[r.label, r.gamma if r.gamma is not None else "", r.mcc_ocssvm, r.mcc_ocsvm]
            for r in bench.rows]
    rows.append(["median", "", bench.median_ocssvm, bench.median_ocsvm])
    out.table(["class", "gamma", "mcc_ocssvm", "mcc_ocsvm"], rows)
    ok = all(r.slab_converged and r.ocsvm_converged for r in bench.rows)
    return EXIT_OK if ok else EXIT_NONCONVERGED


def cmd_gridsearch(args, out: Writer):
    if not args.feature_scale > 0:
        raise UsageError("--feature-scale must be positive")
    X = _training_rows(args) / args.feature_scale
    kernels = ["chi_squared" if k == "chi2" else k for k in args.kernels.split(",") if k]
    try:
        for k in kernels:
            KernelSpec(k, 1.0 if k in ("rbf", "gaussian") else None)
        spec = GridSearchSpec(kernels=kernels, gammas=args.gammas, nu1s=args.nu1s, nu2s=args.nu2s,
                              epsilons=args.epsilons, nus=args.nus, folds=args.folds,
                              model=args.model, seed=args.seed)
        configs = spec.configs()
    except (KernelError, SlabError, EvalError) as exc:
        raise UsageError(str(exc)) from None
    for cfg in configs:
        if args.model == "ocssvm":
            _check_nu(cfg.nu1, "--nu1s")
            _check_nu(cfg.nu2, "--nu2s")
            _check_epsilon(cfg.epsilon)
        else:
            _check_nu(cfg.nu, "--nus")
    if X.shape[0] < args.folds:
        raise DataError(f"{X.shape[0]} training rows cannot be split into {args.folds} folds")
    results = grid_search(X, spec, threads=args.threads)
    columns = ["rank", "model", "kernel", "gamma", "nu1", "nu2", "epsilon", "nu", "mean_recall", "error"]
    rows = []
    for rank, res in enumerate(results, 1):
        rec = res.config.record()
        rows.append([rank, rec["model"], rec["kernel"], rec["gamma"], rec["nu1"], rec["nu2"],
                     rec["epsilon"], rec["nu"], res.mean_metric, res.error or ""])
    out.table(columns, rows)
    return EXIT_OK


def cmd_kkt_report(args, out: Writer):
    model = load_model(args.model)
    if not isinstance(model, SlabModel):
        raise DataError("kkt-report needs a slab model file")
    if args.data:
        X = load_plain(args.data)
        if X.shape != model.training_rows.shape or not np.array_equal(X, model.training_rows):
            raise DataError("--data does not match the model's training rows")
    report = classify_kkt_cases(model)
    if out.fmt == "text":
        for name in CASE_LABELS:
            out.stream.write(f"{name}: {report.counts[name]}\n")
        out.stream.write(f"total: {model.m}\n")
    rows = [[i, lab, s, a, b, xi, xib] for i, (lab, s, a, b, xi, xib) in enumerate(
        zip(report.labels, report.scores, model.alpha, model.alpha_bar, report.xi, report.xi_bar))]
    out.table(["index", "case", "score", "alpha", "alpha_bar", "xi", "xi_bar"], rows)
    if out.fmt != "text":
        out.table(["case", "count"], [[n, report.counts[n]] for n in CASE_LABELS])
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "toy": cmd_toy,
    "letter-bench": cmd_letter_bench,
    "gridsearch": cmd_gridsearch,
    "kkt-report": cmd_kkt_report,
}


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with _open_output(args.output) as stream:
            return COMMANDS[args.command](args, Writer(stream, args.format))
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"slabsvm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergenceError as exc:
        print(f"slabsvm: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except BrokenPipeError:
        # downstream reader closed early (e.g. `| head`); silence the flush at exit
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except (OSError, DataError, ModelFormatError, KernelError, SlabError, EvalError) as exc:
        print(f"slabsvm: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
