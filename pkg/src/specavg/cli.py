"""Command line interface.

Subcommands: bounds, estimate, sweep, pagerank-sweep, blowup, speedup,
synth, gen-graph.  Every subcommand accepts --seed, --workers and
--out-format {csv,json}; report-producing subcommands also accept
--fig PATH to render a matplotlib figure next to the delimited output.

Exit codes: 0 ok, 2 parse error (bad input files or arguments),
3 solver non-convergence, 4 infeasible configuration.

The CSV column schema of each subcommand is frozen (golden-file tested):

    bounds          mu,alpha,alpha_min,bound_am07,bound_incoherence,
                    admissible,margin
    sweep           p,n_samples,alignment_avg,alignment_median,
                    alignment_std,pert_fraction
    pagerank-sweep  p,variant,n_samples,rho_avg,rho_median,rho_std,
                    pert_fraction
    blowup          n,p,draw,max_T_over_n,opnorm,k_over_2np,
                    tail_lower_bound_log
    speedup         p,t_sample,t_eig_sub,t_eig_full,ratio,nnz_frac,regime
"""

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import figures
from .blowup import blowup_experiment
from .errors import (
    AllDrawsFailed,
    DomainError,
    InfeasibleSupports,
    InvalidVn,
    NoConvergence,
    NodeIdOverflow,
    ParseError,
)
from .estimator import AveragingPlan, estimate
from .incoherence import (
    incoherence,
    incoherence_bound,
    max_entry_bound,
    perturbation_admissible,
    spectral_model_from_dense,
)
from .experiments import (
    SyntheticSpec,
    generate_power_law_graph,
    load_edge_list,
    speedup_benchmark,
    sweep_alignment,
    sweep_pagerank,
    sweep_sample_count,
    synth_symmetric,
    write_edge_list,
)
from .matrix_market import read_matrix_market, write_matrix_market

BOUNDS_COLUMNS = ["mu", "alpha", "alpha_min", "bound_am07",
                  "bound_incoherence", "admissible", "margin"]
SWEEP_COLUMNS = ["p", "n_samples", "alignment_avg", "alignment_median",
                 "alignment_std", "pert_fraction"]
PAGERANK_COLUMNS = ["p", "variant", "n_samples", "rho_avg", "rho_median",
                    "rho_std", "pert_fraction"]
BLOWUP_COLUMNS = ["n", "p", "draw", "max_T_over_n", "opnorm", "k_over_2np",
                  "tail_lower_bound_log"]
SPEEDUP_COLUMNS = ["p", "t_sample", "t_eig_sub", "t_eig_full", "ratio",
                   "nnz_frac", "regime"]


def _write_rows(rows, columns, out_format, path):
    """Serialize a list of row dicts as CSV (frozen column order) or
    JSON."""
    if out_format == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row[c]) for c in columns])
        text = buf.getvalue()
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return ";".join(repr(float(v)) for v in value)
    return value


def _float_list(text):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad numeric list {text!r}")


def _int_list(text):
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}")


def _common_flags(sub):
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--workers", type=int, default=1)
    sub.add_argument("--out-format", choices=["csv", "json"], default="csv")
    sub.add_argument("--out", default=None, help="output path (default stdout)")
    sub.add_argument("--fig", default=None, help="also render a figure here")


def _synth_flags(sub):
    sub.add_argument("--n", type=int, help="synthetic dimension")
    sub.add_argument("--spectrum", type=_float_list,
                     help="comma-separated eigenvalues, decreasing")
    sub.add_argument("--supports", type=_int_list, default=None,
                     help="per-eigenvector support sizes (default dense)")
    sub.add_argument("--gap-ratio", type=float, default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="specavg",
        description="Eigenvector estimation by averaging subsampled "
                    "spectral problems.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("bounds", help="incoherence report for a matrix")
    _common_flags(p)
    p.add_argument("--input", required=True, help="Matrix Market file")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--ratio-threshold", type=float, default=0.1)

    p = subs.add_parser("estimate", help="averaged eigenvector of "
                                         "subsampled copies")
    _common_flags(p)
    p.add_argument("--input", required=True, help="Matrix Market file")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--gauge", choices=["avg-norm", "norm-avg"],
                   default="avg-norm")
    p.add_argument("--report", default=None, help="JSON report path")
    p.add_argument("--no-truth", action="store_true",
                   help="skip the dense ground-truth comparison")

    p = subs.add_parser("sweep", help="alignment sweep over p or over "
                                      "sample count")
    _common_flags(p)
    p.add_argument("--input", default=None, help="Matrix Market file "
                   "(alternative to the synthetic flags)")
    _synth_flags(p)
    p.add_argument("--p-grid", type=_float_list, default=None)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--sample-grid", type=_int_list, default=None,
                   help="sweep sample count at fixed --p instead")
    p.add_argument("--p", type=float, default=None,
                   help="fixed p for --sample-grid mode")

    p = subs.add_parser("pagerank-sweep", help="ranking robustness under "
                                               "subsampling")
    _common_flags(p)
    p.add_argument("--edges", default=None, help="edge list file")
    p.add_argument("--gen-nodes", type=int, default=None,
                   help="generate a power-law graph of this size instead")
    p.add_argument("--out-degree", type=int, default=3)
    p.add_argument("--c", type=float, default=0.85)
    p.add_argument("--p-grid", type=_float_list, required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--variant", choices=["damped", "adjacency", "both"],
                   default="both")

    p = subs.add_parser("blowup", help="operator norm divergence at tiny p")
    _common_flags(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--n-grid", type=_int_list, required=True)
    p.add_argument("--draws", type=int, default=5)
    p.add_argument("--csv", default=None,
                   help="CSV output path (same as --out)")
    p.add_argument("--regime", choices=["blowup", "contrast"],
                   default="blowup")

    p = subs.add_parser("speedup", help="timing ratio of subsampled vs "
                                        "full eigensolve")
    _common_flags(p)
    p.add_argument("--input", default=None, help="Matrix Market file")
    _synth_flags(p)
    p.add_argument("--p-grid", type=_float_list, required=True)
    p.add_argument("--reps", type=int, default=5)

    p = subs.add_parser("synth", help="emit a synthetic matrix as Matrix "
                                      "Market")
    _common_flags(p)
    _synth_flags(p)

    p = subs.add_parser("gen-graph", help="emit a power-law edge list")
    _common_flags(p)
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--out-degree", type=int, default=3)

    return parser


def _load_symmetric(path):
    return read_matrix_market(path, want="dense")


def _synth_from_args(args):
    if args.n is None or args.spectrum is None:
        raise InfeasibleSupports("synthetic input needs --n and --spectrum")
    spec = SyntheticSpec(
        n=args.n,
        spectrum=tuple(args.spectrum),
        support_sizes=None if args.supports is None else tuple(args.supports),
        gap_ratio=args.gap_ratio,
        seed=args.seed,
    )
    return synth_symmetric(spec)


def _matrix_and_model(args):
    if args.input is not None:
        m = _load_symmetric(args.input)
        return m, spectral_model_from_dense(m)
    return _synth_from_args(args)


def _cmd_bounds(args):
    m = _load_symmetric(args.input)
    model = spectral_model_from_dense(m)
    mu = incoherence(model)
    report = incoherence_bound(model, args.p,
                               ratio_threshold=args.ratio_threshold,
                               delta=args.delta)
    adm = perturbation_admissible(model, args.p, k=args.k,
                                  ratio_threshold=args.ratio_threshold,
                                  delta=args.delta)
    row = {
        "mu": mu,
        "alpha": [float(a) for a in model.alpha],
        "alpha_min": report.alpha_min,
        "bound_am07": max_entry_bound(m, args.p),
        "bound_incoherence": report.value,
        "admissible": adm.ok,
        "margin": adm.margin,
    }
    if args.out_format == "json":
        text = json.dumps(row, indent=2) + "\n"
        if args.out is None or args.out == "-":
            sys.stdout.write(text)
        else:
            with open(args.out, "w") as fh:
                fh.write(text)
    else:
        _write_rows([row], BOUNDS_COLUMNS, "csv", args.out)
    return 0


def _cmd_estimate(args):
    m = _load_symmetric(args.input)
    model = None if args.no_truth else spectral_model_from_dense(m)
    plan = AveragingPlan(p=args.p, num_samples=args.samples, k=args.k,
                         seed=args.seed, gauge=args.gauge)
    report = estimate(m, plan, model=model, workers=args.workers)
    payload = report.to_dict()
    text = json.dumps(payload, indent=2) + "\n"
    target = args.report or args.out
    if target is None or target == "-":
        sys.stdout.write(text)
    else:
        with open(target, "w") as fh:
            fh.write(text)
    if args.fig:
        figures.save_estimate_figure(report, args.fig)
    return 0


def _sweep_rows_to_dicts(rows):
    return [
        {
            "p": r.p,
            "n_samples": r.n_samples,
            "alignment_avg": r.alignment,
            "alignment_median": r.alignment_median,
            "alignment_std": r.alignment_std,
            "pert_fraction": r.pert_fraction,
        }
        for r in rows
    ]


def _cmd_sweep(args):
    m, model = _matrix_and_model(args)
    if args.sample_grid is not None:
        if args.p is None:
            raise InfeasibleSupports("--sample-grid mode needs --p")
        rows = sweep_sample_count(m, model, args.p, args.sample_grid,
                                  args.seed)
    else:
        if args.p_grid is None:
            raise InfeasibleSupports("need --p-grid (or --sample-grid)")
        rows = sweep_alignment(m, model, args.p_grid, args.samples,
                               args.seed, workers=args.workers)
    _write_rows(_sweep_rows_to_dicts(rows), SWEEP_COLUMNS, args.out_format,
                args.out)
    if args.fig:
        figures.save_sweep_figure(rows, args.fig)
    return 0


def _cmd_pagerank_sweep(args):
    if (args.edges is None) == (args.gen_nodes is None):
        raise InfeasibleSupports("give exactly one of --edges / --gen-nodes")
    if args.edges is not None:
        graph = load_edge_list(args.edges)
    else:
        graph = generate_power_law_graph(args.gen_nodes,
                                         out_degree=args.out_degree,
                                         seed=args.seed)
    variants = ["damped", "adjacency"] if args.variant == "both" \
        else [args.variant]
    rows = []
    for variant in variants:
        rows.extend(
            sweep_pagerank(graph, args.c, args.p_grid, args.samples,
                           args.seed, variant=variant)
        )
    dicts = [
        {
            "p": r.p,
            "variant": r.variant,
            "n_samples": r.n_samples,
            "rho_avg": r.rho,
            "rho_median": r.rho_median,
            "rho_std": r.rho_std,
            "pert_fraction": r.pert_fraction,
        }
        for r in rows
    ]
    _write_rows(dicts, PAGERANK_COLUMNS, args.out_format, args.out)
    if args.fig:
        figures.save_pagerank_figure(rows, args.fig)
    return 0


def _cmd_blowup(args):
    traces = blowup_experiment(args.delta, args.n_grid, args.draws,
                               args.seed, regime=args.regime)
    dicts = [
        {
            "n": t.n,
            "p": t.p,
            "draw": t.draw,
            "max_T_over_n": t.max_T_over_n,
            "opnorm": t.opnorm_estimate,
            "k_over_2np": t.k_over_2np,
            "tail_lower_bound_log": t.tail_lower_bound_log,
        }
        for t in traces
    ]
    _write_rows(dicts, BLOWUP_COLUMNS, args.out_format,
                args.csv or args.out)
    if args.fig:
        figures.save_blowup_figure(traces, args.fig)
    return 0


def _cmd_speedup(args):
    if args.input is not None:
        m = _load_symmetric(args.input)
    else:
        m, _ = _synth_from_args(args)
    rows = speedup_benchmark(m, args.p_grid, args.seed, reps=args.reps)
    _write_rows(rows, SPEEDUP_COLUMNS, args.out_format, args.out)
    if args.fig:
        figures.save_speedup_figure(rows, args.fig)
    return 0


def _cmd_synth(args):
    m, _ = _synth_from_args(args)
    if args.out is None:
        raise InfeasibleSupports("synth needs --out for the Matrix Market "
                                 "file")
    write_matrix_market(args.out, m)
    return 0


def _cmd_gen_graph(args):
    graph = generate_power_law_graph(args.nodes, out_degree=args.out_degree,
                                     seed=args.seed)
    if args.out is None:
        raise InfeasibleSupports("gen-graph needs --out for the edge list")
    write_edge_list(graph, args.out)
    return 0


_COMMANDS = {
    "bounds": _cmd_bounds,
    "estimate": _cmd_estimate,
    "sweep": _cmd_sweep,
    "pagerank-sweep": _cmd_pagerank_sweep,
    "blowup": _cmd_blowup,
    "speedup": _cmd_speedup,
    "synth": _cmd_synth,
    "gen-graph": _cmd_gen_graph,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, NodeIdOverflow, FileNotFoundError) as exc:
        print(f"specavg: parse error: {exc}", file=sys.stderr)
        return 2
    except (NoConvergence, AllDrawsFailed) as exc:
        print(f"specavg: no convergence: {exc}", file=sys.stderr)
        return 3
    except (InfeasibleSupports, InvalidVn, DomainError, ValueError) as exc:
        print(f"specavg: infeasible configuration: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
