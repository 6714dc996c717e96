"""Command-line interface.

JSON goes to stdout, CSV to ``--out``.  Exit codes: 0 success, 2 input error,
3 numerical-domain error.  With ``BAYESMI_TEST_MODE=1`` in the environment
every randomized command must be given ``--seed``.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import __version__, dataio, distfit, filters, mc, missing, moments, seqnb
from .errors import BayesMIError, InputError, NumericalDomainError
from .tables import CountTable, PriorSpec, with_prior

SCHEMA_VERSION = 1
TEST_MODE_ENV = "BAYESMI_TEST_MODE"


def _clean(obj):
    """Make ``obj`` JSON-safe: numpy scalars/arrays to Python, NaN/inf to None."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def _emit(command: str, payload: dict):
    doc = {"schema_version": SCHEMA_VERSION, "command": command}
    doc.update(payload)
    json.dump(_clean(doc), sys.stdout, indent=2, sort_keys=False)
    sys.stdout.write("\n")


def _vector(text):
    if text is None:
        return None
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise InputError(f"malformed vector {text!r}") from None


def _add_table_args(p, csv_ok=True):
    p.add_argument("--counts", help="inline joint counts 'a,b;c,d' (rows separated by ';')")
    p.add_argument("--row-missing", help="comma list of n_i? (row observed, column missing)")
    p.add_argument("--col-missing", help="comma list of n_?j (column observed, row missing)")
    if csv_ok:
        p.add_argument("--csv", help="categorical dataset; use with --attr")
        p.add_argument("--attr", help="attribute index or name for --csv (default: %(default)s)", default="0")
        p.add_argument("--delimiter", default=",", help="CSV delimiter (default: %(default)r)")
        p.add_argument("--missing-token", default="?", help="missing-value marker (default: %(default)r)")
    p.add_argument("--prior", type=float, default=0.0, help="pseudo-count per joint cell (default: %(default)s)")


def _attr(text):
    return int(text) if text.lstrip("-").isdigit() else text


def _table(args) -> CountTable:
    if getattr(args, "csv", None):
        if args.counts:
            raise InputError("give either --counts or --csv, not both")
        ds = dataio.read_csv(args.csv, delimiter=args.delimiter, missing_token=args.missing_token)
        return dataio.attribute_class_table(ds, _attr(args.attr))
    if not args.counts:
        raise InputError("one of --counts or --csv is required")
    return CountTable.parse(args.counts, _vector(args.row_missing), _vector(args.col_missing))


def _require_seed(args, always: bool):
    if args.seed is None and (always or os.environ.get(TEST_MODE_ENV) == "1"):
        raise InputError("--seed is required for this command")


# -- subcommands -----------------------------------------------------------

def cmd_moments(args):
    table = _table(args)
    prior = PriorSpec(args.prior)
    summary = moments.summarize(table, prior)
    out = {"input": {"counts": table.counts, "row_missing": table.row_missing,
                     "col_missing": table.col_missing, "prior": prior.pseudo_count_per_cell},
           "result": summary.to_dict()}
    t = with_prior(table, prior)
    if t.is_complete and np.all(t.counts > 0):
        st = moments.core_stats(t)
        out["stats"] = {k: getattr(st, k) for k in ("J", "K", "L", "M", "P", "Q")}
    out["result"]["empirical_mi"] = moments.empirical_mi(t)
    _emit("moments", out)


def cmd_fit(args):
    table = with_prior(_table(args), PriorSpec(args.prior))
    mean, var = filters.posterior_moments(table)
    fams = distfit.FAMILIES if args.family == "all" else (args.family,)
    fits = {f: distfit.fit_with_fallback(mean, var, table.i_max, f) for f in fams}
    payload = {"moments": {"mean": mean, "variance": var, "i_max": table.i_max},
               "fits": {f: d.to_dict() for f, d in fits.items()}}
    x = np.linspace(0.0, table.i_max, args.grid)
    columns = {"x": x}
    for f, d in fits.items():
        columns[f"pdf_{f}"] = np.atleast_1d(d.pdf(x))
        columns[f"cdf_{f}"] = np.atleast_1d(d.cdf(x))
    if args.compare_mc:
        _require_seed(args, always=False)
        seed = 0 if args.seed is None else args.seed
        res = mc.mi_posterior_mc(table, args.samples, seed, workers=args.workers, bins=args.grid - 1)
        payload["mc"] = res.to_dict()
        payload["sup_distance"] = {f: res.sup_distance(d.cdf) for f, d in fits.items()}
        centers = 0.5 * (res.histogram_edges[1:] + res.histogram_edges[:-1])
        columns["mc_density"] = np.interp(x, centers, res.histogram_density)
        columns["mc_cdf"] = res.ecdf(x)
    if args.out:
        _write_columns(args.out, columns)
        payload["curve_csv"] = args.out
    _emit("fit", payload)


def _write_columns(path, columns: dict):
    names = list(columns)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for i in range(len(columns[names[0]])):
            w.writerow([repr(float(columns[k][i])) for k in names])


def cmd_mc(args):
    _require_seed(args, always=True)
    table = with_prior(_table(args), PriorSpec(args.prior))
    res = mc.mi_posterior_mc(table, args.samples, args.seed, workers=args.workers, bins=args.bins)
    payload = {"result": res.to_dict()}
    if args.tail_probe:
        probe = mc.tail_exponent_probe(table, args.samples, args.seed, workers=args.workers,
                                       values=res.sorted_samples)
        payload["tail_probe"] = {"exponent": probe.exponent, "expected": probe.expected,
                                 "conclusive": probe.conclusive, "bins_used": probe.bins_used}
    if args.out:
        mc.write_histogram_csv(args.out, res)
        payload["histogram_csv"] = args.out
    if args.cdf_out:
        mc.write_cdf_csv(args.cdf_out, res)
        payload["cdf_csv"] = args.cdf_out
    _emit("mc", payload)


def cmd_em(args):
    table = with_prior(_table(args), PriorSpec(args.prior))
    mle = missing.em_mle(table, tol=args.tol, max_iter=args.max_iter)
    both = np.any(table.row_missing > 0) and np.any(table.col_missing > 0)
    var = missing.variance_general(table, mle) if both else missing.variance_one_side(table, mle)
    _emit("em", {
        "pi_hat": mle.pi_hat,
        "iterations": mle.iterations,
        "final_residual": mle.final_residual,
        "log_likelihood": mle.loglik_trace[-1],
        "mean_leading": missing.mean_leading(mle),
        "variance_leading": var,
    })


def _config(args, kind):
    return filters.FilterConfig(kind=kind, epsilon=args.epsilon, p_bar=args.pbar, family=args.family,
                                prior=args.filter_prior)


def _kinds(text):
    kinds = [k.strip() for k in text.split(",") if k.strip()]
    for k in kinds:
        if k not in filters.KINDS:
            raise InputError(f"unknown filter {k!r}; choose from {', '.join(filters.KINDS)}")
    return kinds


def cmd_filter(args):
    kinds = _kinds(args.filters)
    if args.csv:
        ds = dataio.read_csv(args.csv, delimiter=args.delimiter, missing_token=args.missing_token)
        tables = {name: dataio.attribute_class_table(ds, k) for k, name in enumerate(ds.attribute_names)}
    else:
        if not args.counts:
            raise InputError("one of --counts or --csv is required")
        tables = {"table": CountTable.parse(args.counts, _vector(args.row_missing), _vector(args.col_missing))}
    decisions = []
    for kind in kinds:
        decisions.extend(filters.decide_all(tables, _config(args, kind)))
    if args.out:
        filters.write_decision_log(args.out, decisions)
    selected = {kind: [d.attribute for d in decisions if d.kind == kind and d.include] for kind in kinds}
    _emit("filter", {"config": {"epsilon": args.epsilon, "p_bar": args.pbar, "family": args.family,
                                "prior": args.filter_prior},
                     "decisions": filters.decision_rows(decisions), "selected": selected})


def cmd_seqlearn(args):
    _require_seed(args, always=True)
    kinds = _kinds(args.filters)
    if args.csv:
        ds = dataio.read_csv(args.csv, delimiter=args.delimiter, missing_token=args.missing_token)
    elif args.synthetic:
        ds = dataio.generate_stream(n=args.synthetic, seed=args.seed, missing_rate=args.missing_rate)
    else:
        raise InputError("one of --csv or --synthetic is required")
    if args.order == "shuffle":
        perm = np.random.default_rng(args.seed).permutation(ds.n)
        ds = dataio.Dataset(ds.attribute_names, ds.domains, ds.class_name, ds.class_domain, ds.X[perm], ds.y[perm])
    res = seqnb.run_sequential(ds, kinds, _config(args, kinds[0]))
    if args.out:
        seqnb.write_accuracy_csv(args.out, res, kinds)
    if args.usage_out:
        seqnb.write_usage_csv(args.usage_out, res, kinds)
    payload = {"n": ds.n, "order": args.order, "seed": args.seed,
               "runs": {k: {"accuracy": r.accuracy, "mean_attributes": r.mean_attributes,
                            "unseen_events": r.unseen_events} for k, r in res.items()}}
    if len(kinds) >= 2:
        tt = seqnb.paired_t_test(res[kinds[0]].correct, res[kinds[1]].correct)
        payload["t_test"] = {"pair": kinds[:2], "t": tt.t, "p_value": tt.p_value,
                             "significant": tt.significant, "degenerate": tt.degenerate}
    _emit("seqlearn", payload)


def cmd_version(args):
    _emit("version", {"version": __version__})


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="bayesmi", description="Posterior of mutual information from count data.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", help="posterior moments of I", formatter_class=fmt)
    _add_table_args(p)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("fit", help="moment-matched distributions and curve export", formatter_class=fmt)
    _add_table_args(p)
    p.add_argument("--family", choices=distfit.FAMILIES + ("all",), default="beta", help="approximating family")
    p.add_argument("--grid", type=int, default=201, help="curve grid points")
    p.add_argument("--compare-mc", action="store_true", help="overlay a Monte Carlo histogram and cdf")
    p.add_argument("--samples", type=int, default=1_000_000, help="Monte Carlo draws for --compare-mc")
    p.add_argument("--seed", type=int, default=None, help="Monte Carlo seed for --compare-mc")
    p.add_argument("--workers", type=int, default=1, help="sampling threads")
    p.add_argument("--out", help="curve CSV path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("mc", help="Monte Carlo posterior of I", formatter_class=fmt)
    _add_table_args(p)
    p.add_argument("--samples", type=int, default=1_000_000, help="posterior draws")
    p.add_argument("--seed", type=int, default=None, help="required")
    p.add_argument("--workers", type=int, default=1, help="sampling threads; output does not depend on it")
    p.add_argument("--bins", type=int, default=200, help="histogram bins on [0, i_max]")
    p.add_argument("--tail-probe", action="store_true", help="estimate the small-I density exponent")
    p.add_argument("--out", help="histogram CSV path")
    p.add_argument("--cdf-out", help="empirical cdf CSV path")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("em", help="maximum-likelihood chances under missing data", formatter_class=fmt)
    _add_table_args(p)
    p.add_argument("--tol", type=float, default=1e-10, help="max-abs change in chances at convergence")
    p.add_argument("--max-iter", type=int, default=10_000, help="EM iteration cap")
    p.set_defaults(func=cmd_em)

    for name, func, help_ in (("filter", cmd_filter, "apply F/FF/BF filters"),
                              ("seqlearn", cmd_seqlearn, "sequential naive Bayes evaluation")):
        p = sub.add_parser(name, help=help_, formatter_class=fmt)
        if name == "filter":
            p.add_argument("--counts", help="single attribute-by-class table 'a,b;c,d'")
            p.add_argument("--row-missing", help="comma list of n_i? (row observed, column missing)")
            p.add_argument("--col-missing", help="comma list of n_?j (column observed, row missing)")
        else:
            p.add_argument("--synthetic", type=int, help="generate a synthetic stream of this many instances")
            p.add_argument("--missing-rate", type=float, default=0.0, help="for --synthetic")
            p.add_argument("--seed", type=int, default=None, help="required; orders instances")
            p.add_argument("--order", choices=("shuffle", "file"), default="shuffle", help="instance order")
            p.add_argument("--usage-out", help="attribute-usage CSV path")
        p.add_argument("--csv", help="categorical dataset, class in the last column")
        p.add_argument("--delimiter", default=",", help="CSV delimiter")
        p.add_argument("--missing-token", default="?", help="missing-value marker")
        p.add_argument("--filters", default="F,FF,BF", help="comma list of filter kinds")
        p.add_argument("--epsilon", type=float, default=0.003, help="MI threshold")
        p.add_argument("--pbar", type=float, default=0.95, help="posterior probability required by FF and BF")
        p.add_argument("--family", choices=distfit.FAMILIES, default="beta", help="approximating family for FF and BF")
        p.add_argument("--filter-prior", type=float, default=1.0, help="pseudo-count added before filtering")
        p.add_argument("--out", help="CSV path (decision log or accuracy curve)")
        p.set_defaults(func=func)

    p = sub.add_parser("version", help="print the package version")
    p.set_defaults(func=cmd_version)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except NumericalDomainError as exc:
        print(f"bayesmi: numerical error: {exc}", file=sys.stderr)
        return 3
    except (BayesMIError, ValueError, OSError) as exc:
        print(f"bayesmi: input error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
