"""Command line interface: ``priorshift <subcommand> ...``.

Exit status is 0 on success, 1 on invalid input files or values (with a
one-line message on stderr) and 2 on usage errors.  Configuration is taken from
flags only.
"""

import argparse
import io as _io
import sys

import numpy as np

from . import io
from .core import compute_ratios, validate_prior
from .correction import adjust_posteriors
from .errors import PriorShiftError
from .estimation import EstimatorConfig, estimate_prior, split_likelihood_diagnostic
from .evaluation import empirical_prior, marginalized_prior, per_class_errors, top1_accuracy
from .online import DEFAULT_REFIT_EVERY, online_adapt
from .simplex import hellinger, kl_divergence
from .synthesis import PRIOR_FAMILIES, make_model, prior_from_family, sample_testset

METHODS = ("em", "pga-mle", "pga-map")


def _add_estimator_flags(p):
    p.add_argument("--posteriors", required=True, help="CSV of posterior rows (N x K)")
    p.add_argument("--train-prior", required=True, help="training prior file, one value per line")
    p.add_argument("--method", choices=METHODS, default="em", help="estimator (default: em)")
    p.add_argument("--alpha", type=float, help="Dirichlet concentration, required for pga-map (>= 1)")
    p.add_argument("--lr", type=float, help="initial PGA learning rate (default: 0.1 / N)")
    p.add_argument("--max-iters", type=int, default=1000, help="iteration limit (default: 1000)")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="stop when no coordinate moves more than this (default: 1e-8)")
    p.add_argument("--init", help="initial estimate file (default: the training prior)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="priorshift",
        description="Adapt classifier posteriors to new class priors and estimate unknown test priors.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("adjust", help="re-weight posteriors for a known test prior")
    p.add_argument("--posteriors", required=True, help="CSV of posterior rows (N x K)")
    p.add_argument("--train-prior", required=True, help="training prior file")
    p.add_argument("--test-prior", required=True, help="test prior file")
    p.add_argument("--out", required=True, help="output CSV of adjusted posteriors")

    p = sub.add_parser("estimate", help="estimate the test prior from unlabeled posteriors")
    _add_estimator_flags(p)
    p.add_argument("--trace", help="write the per-iteration trace CSV here")
    p.add_argument("--trace-all", action="store_true",
                   help="store the estimate at every iteration in the trace (default: every 10th and the last)")
    p.add_argument("--out", required=True, help="output prior file")

    p = sub.add_parser("diagnose-split",
                       help="fit on a random part of the rows and track held-out likelihood")
    _add_estimator_flags(p)
    p.add_argument("--split-fraction", type=float, default=0.5,
                   help="fraction of rows used for fitting (default: 0.5)")
    p.add_argument("--seed", type=int, required=True, help="seed of the random partition")
    p.add_argument("--out", required=True,
                   help="CSV: iteration, mean log-likelihood on both parts, max change, estimate")

    p = sub.add_parser("online", help="adjust rows sequentially with priors estimated from earlier rows")
    _add_estimator_flags(p)
    p.add_argument("--refit-every", type=int, default=DEFAULT_REFIT_EVERY,
                   help=f"refit the estimate every R rows (default: {DEFAULT_REFIT_EVERY})")
    p.add_argument("--cold-start", action="store_true",
                   help="start each refit from --init / the training prior instead of the previous estimate")
    p.add_argument("--out", required=True, help="output CSV of adjusted posteriors")
    p.add_argument("--snapshots", required=True, help="output CSV of prior snapshots")

    p = sub.add_parser("evaluate", help="accuracy, prior distances and per-class errors against labels")
    p.add_argument("--posteriors", required=True, help="CSV of posterior rows (N x K)")
    p.add_argument("--labels", required=True, help="labels file, one 0-based class index per line")
    p.add_argument("--train-prior", help="training prior; with --test-prior, posteriors are adjusted first")
    p.add_argument("--test-prior", help="test prior used for adjustment")
    p.add_argument("--report", required=True, help="output report CSV")

    p = sub.add_parser("simulate", help="generate a synthetic calibrated test set under prior shift")
    p.add_argument("--classes", type=int, required=True, help="number of classes K")
    p.add_argument("--symbols", type=int, help="number of observation symbols M >= K (default: 2K)")
    p.add_argument("--separability", type=float, default=0.7,
                   help="likelihood of each class's own symbol, in (0, 1] (default: 0.7)")
    p.add_argument("--train-prior-family", choices=PRIOR_FAMILIES, default="exp")
    p.add_argument("--train-rate", type=float,
                   help="family rate: log imbalance for exp, slope for linear")
    p.add_argument("--test-prior-family", choices=PRIOR_FAMILIES, default="uniform")
    p.add_argument("--test-rate", type=float, help="as --train-rate, for the test prior")
    p.add_argument("--n", type=int, required=True, help="number of test samples")
    p.add_argument("--outliers", type=float, default=0.0,
                   help="fraction of rows replaced by label-free flat Dirichlet draws (default: 0)")
    p.add_argument("--seed", type=int, required=True,
                   help="model seed; the samples use seed + 1")
    p.add_argument("--out-posteriors", required=True)
    p.add_argument("--out-labels", required=True)
    p.add_argument("--out-train-prior", required=True)
    p.add_argument("--out-test-prior", required=True)
    return parser


def _config(parser, args, n_classes):
    if args.method == "pga-map" and args.alpha is None:
        parser.error("--method pga-map requires --alpha")
    if args.alpha is not None and args.method != "pga-map":
        parser.error("--alpha only applies to --method pga-map")
    init = io.read_prior(args.init) if args.init else None
    if init is not None and init.shape[0] != n_classes:
        raise PriorShiftError(f"--init has {init.shape[0]} classes, posteriors have {n_classes}")
    return EstimatorConfig(
        method=args.method,
        alpha=args.alpha,
        learning_rate=args.lr,
        max_iterations=args.max_iters,
        tol=args.tol,
        initial_estimate=init,
        store_all=getattr(args, "trace_all", False),
    )


def _load_pair(args):
    post = io.read_posteriors(args.posteriors)
    train = io.read_prior(args.train_prior)
    if train.shape[0] != post.shape[1]:
        raise PriorShiftError(
            f"train prior has {train.shape[0]} classes, posteriors have {post.shape[1]}"
        )
    return post, train


def cmd_adjust(parser, args, out):
    post, train = _load_pair(args)
    test = io.read_prior(args.test_prior)
    io.write_posteriors(args.out, adjust_posteriors(post, train, test))


def cmd_estimate(parser, args, out):
    post, train = _load_pair(args)
    config = _config(parser, args, post.shape[1])
    estimate, trace = estimate_prior(compute_ratios(post, train), config, train)
    io.write_prior(args.out, estimate)
    if args.trace:
        io.write_trace(args.trace, trace)
    print(
        f"method={config.method.value} iterations={trace.n_iterations} "
        f"termination={trace.termination} {trace.objective_name}={io.fmt(trace.final_objective)}",
        file=out,
    )


def cmd_diagnose_split(parser, args, out):
    post, train = _load_pair(args)
    config = _config(parser, args, post.shape[1])
    diag = split_likelihood_diagnostic(
        compute_ratios(post, train), config, args.split_fraction, args.seed, train
    )
    opt, val = diag.optimization, diag.validation
    k = post.shape[1]
    buf = _io.StringIO()
    buf.write(",".join(["iteration", "optimization", "validation", "max_change"]
                       + [f"p{j}" for j in range(k)]) + "\n")
    for it in range(opt.objective.shape[0]):
        cells = [str(it), io.fmt(opt.objective[it]), io.fmt(val.objective[it]),
                 io.fmt(opt.max_change[it])] + [io.fmt(v) for v in opt.estimates[it]]
        buf.write(",".join(cells) + "\n")
    io.atomic_write_text(args.out, buf.getvalue())
    print(
        f"rows optimization={diag.optimization_rows.size} validation={diag.validation_rows.size} "
        f"iterations={opt.n_iterations} validation_mean_log_likelihood={io.fmt(val.objective[-1])}",
        file=out,
    )


def cmd_online(parser, args, out):
    post, train = _load_pair(args)
    config = _config(parser, args, post.shape[1])
    if args.refit_every < 1:
        parser.error("--refit-every must be positive")
    result = online_adapt(post, train, config, args.refit_every, warm_start=not args.cold_start)
    io.write_posteriors(args.out, result.adjusted)
    k = post.shape[1]
    buf = _io.StringIO()
    buf.write(",".join(["row"] + [f"p{j}" for j in range(k)]) + "\n")
    for row, snap in zip(result.snapshot_rows, result.snapshots):
        buf.write(",".join([str(int(row))] + [io.fmt(v) for v in snap]) + "\n")
    io.atomic_write_text(args.snapshots, buf.getvalue())


def _opt(value):
    return "" if value is None or np.isnan(value) else io.fmt(value)


def cmd_evaluate(parser, args, out):
    if (args.train_prior is None) != (args.test_prior is None):
        parser.error("--train-prior and --test-prior must be given together")
    post = io.read_posteriors(args.posteriors)
    k = post.shape[1]
    labels = io.read_labels(args.labels, k)
    rows = [("n_samples", str(post.shape[0])), ("n_classes", str(k))]
    if args.train_prior is not None:
        train = validate_prior(io.read_prior(args.train_prior))
        test = validate_prior(io.read_prior(args.test_prior))
        rows.append(("accuracy_unadjusted", io.fmt(top1_accuracy(post, labels))))
        post = adjust_posteriors(post, train, test)
    acc = top1_accuracy(post, labels)
    marginal = marginalized_prior(post)
    empirical = empirical_prior(labels, k)
    try:
        kl = kl_divergence(empirical, marginal)
    except PriorShiftError:
        kl = None
    rows += [
        ("accuracy", io.fmt(acc)),
        ("hellinger_marginal_empirical", io.fmt(hellinger(marginal, empirical))),
        ("kl_empirical_marginal", _opt(kl)),
    ]
    errors = per_class_errors(post, labels)
    buf = _io.StringIO()
    buf.write("metric,value\n")
    buf.writelines(f"{name},{value}\n" for name, value in rows)
    buf.write("\nclass,count,expected_error,empirical_error,marginal_prior,empirical_prior\n")
    for j in range(k):
        buf.write(
            f"{j},{int(errors.counts[j])},{_opt(errors.expected[j])},"
            f"{_opt(errors.empirical[j])},{io.fmt(marginal[j])},{io.fmt(empirical[j])}\n"
        )
    io.atomic_write_text(args.report, buf.getvalue())
    print(f"accuracy={io.fmt(acc)}", file=out)


def cmd_simulate(parser, args, out):
    symbols = args.symbols if args.symbols is not None else 2 * args.classes
    if args.n < 1:
        parser.error("--n must be positive")
    model = make_model(args.classes, symbols, args.separability, args.seed,
                       args.train_prior_family, args.train_rate)
    test = prior_from_family(args.test_prior_family, args.classes, args.test_rate)
    post, labels = sample_testset(model, test, args.n, args.seed + 1, args.outliers)
    io.write_posteriors(args.out_posteriors, post)
    io.write_labels(args.out_labels, labels)
    io.write_prior(args.out_train_prior, model.train_prior)
    io.write_prior(args.out_test_prior, test)


COMMANDS = {
    "adjust": cmd_adjust,
    "estimate": cmd_estimate,
    "diagnose-split": cmd_diagnose_split,
    "online": cmd_online,
    "evaluate": cmd_evaluate,
    "simulate": cmd_simulate,
}


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](parser, args, out)
    except (PriorShiftError, ValueError) as exc:
        module = getattr(exc, "module", args.command)
        print(f"priorshift {args.command}: {module}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"priorshift {args.command}: io: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
