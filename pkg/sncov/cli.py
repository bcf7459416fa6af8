"""The sncov command line tool.

    sncov mp moment --k 2 --y 0.5
    sncov mp stieltjes --re 5 --im 1 --y 0.5
    sncov gen --model elliptical --p 100 --n 200 --seed 1 --out panel.csv
    sncov test --input panel.csv --test jhn-sn
    sncov simulate --design table3 --reps 2000 --threads 8 --render
    sncov verify-clt --f power:3 --y 0.5
    sncov empirical --returns returns.csv --factors factors.csv --model ff3
"""
# Python imports
import argparse
import contextlib
import json
import logging
import sys

# 3rd party imports
import numpy as np

# Project imports
import sncov
from sncov import clt, config, datagen, empirical, log, montecarlo, mp_law, spectra, sphericity
from sncov.errors import ConfigError, DomainError, Error, IncompleteReportError

logger = logging.getLogger(__name__)

# Errors the user can fix by changing the invocation or the input files.
USAGE_ERRORS = (DomainError, ConfigError, IncompleteReportError, OSError)


@contextlib.contextmanager
def _output(path):
    """Yields a text stream for path, or stdout when path is None."""
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w") as f:
            yield f


def _complex_point(args):
    """The point given by --re and --im, or by --z."""
    if args.z is not None:
        if args.re is not None or args.im is not None:
            raise ConfigError("give either --z or --re and --im, not both")
        try:
            return complex(args.z.replace(" ", ""))
        except ValueError:
            raise ConfigError("--z must be a complex number like 5+1j, got %r" % args.z)
    if args.re is None or args.im is None:
        raise ConfigError("mp stieltjes needs --re and --im")
    return complex(args.re, args.im)


def _cmd_mp(args, options):
    if args.what == "moment":
        if args.k is None:
            raise ConfigError("mp moment needs --k")
        values = [mp_law.mp_moment(args.k, args.y)]
    elif args.what == "density":
        if args.x is None:
            raise ConfigError("mp density needs --x")
        values = [mp_law.density(args.x, args.y)]
    else:
        value = mp_law.stieltjes_m_underline(_complex_point(args), args.y)
        values = [value.real, value.imag]

    with _output(options.out) as f:
        for value in values:
            f.write("%r\n" % float(value))
    return 0


def _cmd_gen(args, options):
    kind = datagen.ModelKind.parse(args.model)
    sigma = datagen.SigmaSpec.parse(args.sigma, args.p)
    seed = config.DEFAULT_SEED if options.seed is None else options.seed
    obs = datagen.gen_panel(datagen.GenModel(kind, sigma, args.p, args.n, seed))
    log.say("generated a %d x %d %s panel" % (args.p, args.n, kind.value))

    with _output(options.out) as f:
        np.savetxt(f, obs.data, delimiter=",", fmt="%.17g")
    return 0


def _read_matrix(path):
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as e:
        raise DomainError("%s is not a numeric CSV matrix: %s" % (path, e))


def _parse_target(text):
    text = text.strip()
    if text == "identity":
        return sphericity.TargetSpec.identity()
    if text.startswith("diag:"):
        return sphericity.TargetSpec.diagonal(_read_matrix(text[len("diag:"):]).ravel())
    if text.startswith("full:"):
        return sphericity.TargetSpec.full(_read_matrix(text[len("full:"):]))
    raise ConfigError("unknown target %r (expected identity, diag:file.csv or full:file.csv)" % text)


def _cmd_test(args, options):
    obs = spectra.ObservationMatrix(_read_matrix(args.input))
    selector = sphericity.TestSelector.parse(args.test)
    target = _parse_target(args.target)
    report = sphericity.test_proportional_to(obs, target, selector, args.alpha)

    with _output(options.out) as f:
        f.write(json.dumps(report.to_dict(), indent=2) + "\n")
    return 0


def _cmd_simulate(args, options):
    # Without --seed the design keeps its own MASTER_SEED.
    configs = montecarlo.load_design(args.design, replications=args.reps, master_seed=options.seed)
    log.say("running %s with %d worker(s)" % (args.design, options.threads))
    report = montecarlo.run_design(configs, threads=options.threads)
    # Render first so an incomplete report fails before anything is written.
    table = montecarlo.render_table(report) if args.render else None

    text = montecarlo.report_to_json(report, timings=args.timings)
    if options.out is not None:
        with _output(options.out) as f:
            f.write(text)
    elif table is None:
        sys.stdout.write(text)
    if table is not None:
        sys.stdout.write(table)
    return 0


def _cmd_verify_clt(args, options):
    f = mp_law.parse_function(args.f)
    if args.radius is None:
        inner, outer = clt.default_contours(f, args.y, args.nodes)
    else:
        inner, outer = clt.contours_from_radius(f, args.y, args.radius, args.nodes or clt.DEFAULT_NODES)

    rows = [("mean", clt.closed_form_mean(f, args.y), clt.contour_mean(f, args.y, inner)),
            ("var", clt.closed_form_var(f, args.y), clt.contour_cov(f, f, args.y, inner, outer))]

    with _output(options.out) as out:
        for name, closed, contour in rows:
            out.write("%s closed-form=%r contour=%r abs-diff=%.3e\n"
                      % (name, closed, contour, abs(closed - contour)))
    return 0


def _cmd_empirical(args, options):
    returns = empirical.load_returns(args.returns)
    factors = empirical.load_factors(args.factors)
    model = empirical.FactorModel.parse(args.model)

    results = empirical.rolling_diag_test(returns, factors, model, args.alpha)
    summary = empirical.summarize_reports(results)
    log.say("tested %d months, skipped %d" % (summary.n_months, len(results) - summary.n_months))

    document = {"model": model.name, "alpha": args.alpha,
                "months": [result.to_dict() for result in results],
                "summary": summary.to_dict()}
    with _output(options.out) as f:
        f.write(json.dumps(document, indent=2) + "\n")

    if args.norms:
        norms = empirical.residual_norm_series(returns, factors, model)
        norms.to_csv(args.norms, index_label="date")
    return 0


def _common_options():
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--seed", type=int, default=None,
                        help="master seed (default: the design's MASTER_SEED, else %d)" % config.DEFAULT_SEED)
    parser.add_argument("--threads", type=int, default=None,
                        help="worker processes (default: SNCOV_THREADS or the CPU count)")
    parser.add_argument("--out", default=None, help="output file (default: stdout)")
    parser.add_argument("--log-level", default="WARNING", help="logging level (default WARNING)")
    return parser


def build_parser():
    common = _common_options()
    parser = argparse.ArgumentParser(prog="sncov",
                                     description="Sphericity tests on self-normalized covariance matrices")
    parser.add_argument("--version", action="version", version="%(prog)s " + sncov.VERSION)
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")

    mp = commands.add_parser("mp", parents=[common], help="Marčenko–Pastur law quantities")
    mp.add_argument("what", choices=("moment", "density", "stieltjes"))
    mp.add_argument("--y", type=float, required=True)
    mp.add_argument("--k", type=int)
    mp.add_argument("--x", type=float)
    mp.add_argument("--re", type=float, help="real part of the Stieltjes point")
    mp.add_argument("--im", type=float, help="imaginary part of the Stieltjes point")
    mp.add_argument("--z", help="the Stieltjes point as one complex number, e.g. 5+1j")
    mp.set_defaults(handler=_cmd_mp)

    gen = commands.add_parser("gen", parents=[common], help="generate a synthetic p x n panel as CSV")
    gen.add_argument("--model", required=True, help="iid, elliptical or garch-t4")
    gen.add_argument("--p", type=int, required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--sigma", default="identity", help="identity or toeplitz:rho")
    gen.set_defaults(handler=_cmd_gen)

    test = commands.add_parser("test", parents=[common], help="run a sphericity test on a CSV panel")
    test.add_argument("--input", required=True, help="p rows by n columns, no header")
    test.add_argument("--test", default="jhn-sn", help="lr-sn, jhn-sn or moment:k")
    test.add_argument("--target", default="identity", help="identity, diag:file.csv or full:file.csv")
    test.add_argument("--alpha", type=float, default=sphericity.DEFAULT_ALPHA)
    test.set_defaults(handler=_cmd_test)

    simulate = commands.add_parser("simulate", parents=[common], help="run a Monte Carlo design")
    simulate.add_argument("--design", required=True,
                          help="%s, or a params/JSON file" % ", ".join(montecarlo.BUILTIN_DESIGNS))
    simulate.add_argument("--reps", type=int, default=None, help="replications per cell")
    simulate.add_argument("--render", action="store_true", help="print the rejection table")
    simulate.add_argument("--timings", action="store_true", help="record wall time in the JSON")
    simulate.set_defaults(handler=_cmd_simulate)

    verify = commands.add_parser("verify-clt", parents=[common],
                                 help="compare closed-form CLT constants with contour integrals")
    verify.add_argument("--f", required=True, help="log or power:k")
    verify.add_argument("--y", type=float, required=True)
    verify.add_argument("--radius", type=float, default=None)
    verify.add_argument("--nodes", type=int, default=None)
    verify.set_defaults(handler=_cmd_verify_clt)

    emp = commands.add_parser("empirical", parents=[common], help="rolling diagonal test on factor residuals")
    emp.add_argument("--returns", required=True)
    emp.add_argument("--factors", required=True)
    emp.add_argument("--model", default="ff3", help="capm or ff3")
    emp.add_argument("--alpha", type=float, default=sphericity.DEFAULT_ALPHA)
    emp.add_argument("--norms", default=None, help="also write the residual norm series to this CSV")
    emp.set_defaults(handler=_cmd_empirical)

    return parser


def dispatch(argv):
    """Runs one command and returns its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code

    try:
        options = config.GlobalOptions(seed=args.seed,
                                       threads=args.threads if args.threads is not None else config.default_threads(),
                                       out=args.out, log_level=args.log_level)
        log.configure(options.log_level)
        return args.handler(args, options)
    except USAGE_ERRORS as e:
        sys.stderr.write("sncov: error: %s\n" % e)
        return 2
    except Error as e:
        sys.stderr.write("sncov: error: %s\n" % e)
        return 1


def main():
    sys.exit(dispatch(sys.argv[1:]))
