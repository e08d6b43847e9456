"""Command-line front end: ``sneakpath <subcommand> [flags]``.

Exit status is 0 on success, 2 on usage errors and 1 when a computation fails.
"""
import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .bound import bound_curve, write_bound_csv
from .capacity import LambdaChannel, capacity_approx, capacity_exact, dispersion_approx, \
    dispersion_exact, shannon_limit_sigma
from .channel import ChannelParams
from .de import DeConfig, decoding_threshold, run_de
from .ira import IraProfile, build_graph, save_code
from .optimize import SearchSpec, optimize
from .sim import MODES, SimConfig, simulate, sweep, write_results
from .spstats import design_lambda, empirical_distribution, sp_rate_mean, sp_rate_variance
from .tables import TABLE1

log = logging.getLogger("sneakpath")

CODE_SCHEMA = """code file (JSON):
  {"rate": 0.5, "dc": 6, "degrees": [{"d": 3, "a": 0.3561}, ...],
   "n": 128, "seed": 0, "lambda": 0.5338}
  "n" is the array side (codeword length n*n); "lambda" is the design
  SP rate. Built-in names table1-row1 .. table1-row4 are accepted
  wherever a code file is expected."""


class UsageError(Exception):
    pass


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def load_code_arg(value):
    """Resolve ``--code``: a built-in table name or a JSON file. Returns ``(profile, n, obj)``."""
    name = os.path.basename(value)
    if name.endswith(".json"):
        name = name[:-5]
    if not os.path.exists(value) and name in TABLE1:
        row = TABLE1[name]
        obj = {"rate": row.rate, "dc": row.dc, "n": row.n, "seed": 0, "lambda": row.lam,
               "k_sf": row.k_sf, "degrees": [{"d": d, "a": a} for d, a in row.degrees.items()]}
    else:
        try:
            with open(value) as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"--code: cannot read {value!r}: {exc}") from None
    try:
        profile = IraProfile.from_dict(obj)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"--code: {exc}") from None
    return profile, int(obj.get("n", 128)), obj


def _params(args):
    return ChannelParams(args.r0, args.r1, args.rs)


def _emit(text):
    print(text, flush=True)


def cmd_spstats(args):
    mean = sp_rate_mean(args.n, args.k, args.q)
    var = sp_rate_variance(args.n, args.k, args.q)
    if args.design_lambda:
        _emit(f"{design_lambda(args.n, args.k, args.q):.4f}")
        return
    _emit(f"mean={mean:.6g} variance={var:.6g} design_lambda={design_lambda(args.n, args.k, args.q):.4f}")
    if args.samples:
        rng = np.random.default_rng(args.seed)
        dist = empirical_distribution(args.n, args.k, args.q, args.samples, rng, args.bins)
        _emit(f"empirical mean={dist.mean:.6g} variance={dist.variance:.6g} resampled={dist.resampled}")
        if args.out:
            dist.to_csv(args.out)


def cmd_capacity(args):
    rows = []
    for lam in args.lam:
        for s in args.sigma:
            ch = LambdaChannel(lam, args.q, _params(args).with_sigma(s))
            ce = capacity_exact(ch) if args.exact else float("nan")
            ve = dispersion_exact(ch) if args.exact else float("nan")
            rows.append([lam, s, capacity_approx(ch), ce, dispersion_approx(ch), ve])
            _emit(" ".join(f"{v:.6g}" for v in rows[-1]))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda", "sigma", "C_approx", "C_exact", "V_approx", "V_exact"])
            w.writerows(rows)


def cmd_shannon_limit(args):
    s = shannon_limit_sigma(args.rate, args.lam, args.q, _params(args))
    _emit(f"{s:.2f}")


def cmd_ppv_bound(args):
    vals = bound_curve(args.n, args.k, args.q, args.rate, args.sigma, _params(args), args.nodes)
    for s, v in zip(args.sigma, vals):
        _emit(f"{s:g} {v:.6g}")
    if args.out:
        write_bound_csv(args.out, args.sigma, vals)


def _code_lambda(args, obj):
    lam = args.lam if args.lam is not None else obj.get("lambda")
    if lam is None:
        raise UsageError("--lambda is required when the code file has no 'lambda'")
    return float(lam)


def cmd_de_threshold(args):
    profile, _, obj = load_code_arg(args.code)
    lam = _code_lambda(args, obj)
    kw = dict(ira_aware=not args.no_ira_aware, check_mean=args.check_mean,
              variable_average=args.variable_average, target=args.target, max_iters=args.max_iters)
    if args.trace_sigma is not None:
        var, chk = profile.de_distributions(kw["ira_aware"])
        cfg = DeConfig(var, chk, lam, args.q, _params(args).with_sigma(args.trace_sigma),
                       max_iters=args.max_iters, target=args.target, check_mean=args.check_mean,
                       variable_average=args.variable_average)
        res = run_de(cfg, record_trace=True)
        _emit(f"pe={res.pe:.6g} iterations={res.iterations} converged={res.converged} monotone={res.monotone}")
        if args.out:
            res.write_trace(args.out)
        return
    th = decoding_threshold(profile, lam, args.q, _params(args), resolution=args.resolution, **kw)
    _emit(f"{th:g}")


def cmd_optimize(args):
    spec = SearchSpec(args.rate, args.dc, args.lam, tuple(args.degrees), args.q, args.step,
                      _params(args), ira_aware=not args.no_ira_aware, check_mean=args.check_mean,
                      variable_average=args.variable_average)
    res = optimize(spec, refine=args.refine, n_jobs=args.n_jobs)
    fr = " ".join(f"a{d}={a:.4f}" for d, a in sorted(res.profile.degrees.items()))
    _emit(f"sigma_th={res.sigma_th:g} {fr}")
    if args.out:
        save_code(args.out, res.profile, args.n)
    if args.scan:
        res.write_scan(args.scan)


def cmd_build_code(args):
    profile, n, obj = load_code_arg(args.code)
    n = args.n or n
    seed = profile.seed if args.seed is None else args.seed
    g = build_graph(profile, n * n, seed)
    _emit(f"k={g.k} m={g.m} rate={g.rate:.6f} adjusted={g.adjusted}")
    if args.out:
        prof = IraProfile(profile.rate, profile.dc, profile.degrees, seed, profile.lam)
        save_code(args.out, prof, n)


def _sim_config(args, sigma, mode):
    profile, n, obj = load_code_arg(args.code)
    k_sf = args.k_sf if args.k_sf is not None else obj.get("k_sf")
    if k_sf is None:
        raise UsageError("--k-sf is required when the code file has no 'k_sf'")
    return SimConfig(profile, n, int(k_sf), sigma, args.trials, args.seed, mode, args.max_iters,
                     args.lambda_source, _params(args))


def cmd_simulate(args):
    res = simulate(_sim_config(args, args.sigma, args.mode), n_jobs=args.n_jobs)
    _emit(f"sigma={res.sigma:g} mode={res.mode} ber={res.ber:.4g} wer={res.wer:.4g} "
          f"wer_ci={res.wer_ci:.3g} trials={res.trials} time={res.wall_time:.1f}s")
    if args.out:
        write_results(args.out, [res])


def cmd_sweep(args):
    if not args.sigmas:
        results = []
    else:
        results = sweep(_sim_config(args, args.sigmas[0], args.modes[0]), args.sigmas, args.modes, args.n_jobs)
    for r in results:
        _emit(" ".join(str(v) for v in r.row()))
    if args.out:
        write_results(args.out, results)


def _add_channel(p):
    g = p.add_argument_group("channel")
    g.add_argument("--r0", type=float, default=1000.0, help="HRS resistance (ohm)")
    g.add_argument("--r1", type=float, default=100.0, help="LRS resistance (ohm)")
    g.add_argument("--rs", type=float, default=250.0, help="sneak-path resistance (ohm)")


def _add_de(p):
    p.add_argument("--check-mean", choices=("paper-literal", "conditional"), default="paper-literal")
    p.add_argument("--variable-average", choices=("mi", "mean", "phi"), default="mi")
    p.add_argument("--no-ira-aware", action="store_true",
                   help="ignore the accumulator parity nodes in DE")


def build_parser():
    top = argparse.ArgumentParser(prog="sneakpath", description=__doc__,
                                  formatter_class=argparse.RawDescriptionHelpFormatter, epilog=CODE_SCHEMA)
    top.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    top.add_argument("--log-level", default="WARNING")
    sub = top.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, epilog=CODE_SCHEMA,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.set_defaults(func=func)
        p.add_argument("--out", help="output file")
        _add_channel(p)
        return p

    p = add("spstats", cmd_spstats, "SP-rate statistics")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--design-lambda", action="store_true", help="print only mean + 3 std")
    p.add_argument("--samples", type=int, default=0, help="Monte Carlo arrays for a histogram")
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = add("capacity", cmd_capacity, "capacity and dispersion of the lambda-Gaussian channel")
    p.add_argument("--lambda", dest="lam", type=_floats, required=True)
    p.add_argument("--sigma", type=_floats, required=True)
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--exact", action="store_true", help="also integrate the full mixture")

    p = add("shannon-limit", cmd_shannon_limit, "largest sigma whose capacity supports the rate")
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--q", type=float, default=0.5)

    p = add("ppv-bound", cmd_ppv_bound, "normal-approximation word-error bound")
    p.add_argument("--n", type=int, required=True, help="array side")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--sigma", type=_floats, required=True)
    p.add_argument("--nodes", type=int, default=201)

    p = add("de-threshold", cmd_de_threshold, "DE decoding threshold of a code profile")
    p.add_argument("--code", required=True)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--target", type=float, default=1e-7)
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--resolution", type=float, default=0.5)
    p.add_argument("--trace-sigma", type=float, help="run DE once at this sigma and write the trace")
    _add_de(p)

    p = add("optimize", cmd_optimize, "search the degree distribution with the best threshold")
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--dc", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--degrees", type=_ints, default=[3, 10, 36])
    p.add_argument("--step", type=float, default=0.005)
    p.add_argument("--refine", action="store_true")
    p.add_argument("--n", type=int, default=128, help="array side stored in the code file")
    p.add_argument("--scan", help="CSV of every scanned profile")
    p.add_argument("--n-jobs", type=int, default=1)
    _add_de(p)

    p = add("build-code", cmd_build_code, "build an IRA graph and write its code file")
    p.add_argument("--code", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)

    for name, func in (("simulate", cmd_simulate), ("sweep", cmd_sweep)):
        p = add(name, func, "Monte Carlo BER/WER" if name == "simulate" else "BER/WER over a sigma list")
        p.add_argument("--code", required=True)
        p.add_argument("--k-sf", type=int)
        p.add_argument("--trials", type=int, default=1000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-iters", type=int, default=100)
        p.add_argument("--lambda-source", choices=("estimated", "genie"), default="estimated")
        p.add_argument("--n-jobs", type=int, default=1)
        if name == "simulate":
            p.add_argument("--sigma", type=float, required=True)
            p.add_argument("--mode", choices=MODES, default="reram")
        else:
            p.add_argument("--sigmas", type=_floats, required=True)
            p.add_argument("--modes", type=lambda t: t.split(","), default=["reram", "mixed"])
    return top


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    opts = {k: v for k, v in vars(args).items() if k != "func"}
    log.info("sneakpath %s %s %s", __version__, args.command, opts)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"sneakpath {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"sneakpath {args.command}: computation failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
