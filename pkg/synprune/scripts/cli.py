#!/usr/bin/env python
"""Command line interface of synprune.

Train single runs, sweep strategies x thresholds x seeds, and summarise the
results.  Help for every subcommand is printed by::

  $ synprune <subcommand> -h

Every experiment option can be set with a flag of the same name, in a YAML
file passed with --config, or in the file named by SYNPRUNE_CONFIG.

"""

from __future__ import print_function

import argparse
import sys

import synprune
from synprune import config, harness
from synprune.utils import _shout, parse_list


def train_cmd(args):
    cfg = config.config_from_args(args)
    seed = cfg.seeds[0] if args.seed is None else args.seed
    _shout("Training %s (S=%s) with seed %d..." % (
        cfg.strategy, cfg.sparsity_threshold, seed), args.verbose)
    result = harness.run_experiment(cfg, seed)
    run_dir = harness.write_run(result, cfg.output_dir)
    _shout("Wrote %s" % run_dir, args.verbose)
    print("%s: %s" % (result.name, result.status))
    for key, value in result.summary.items():
        print("  %-22s %s" % (key, value))
    return 0 if result.status == 'ok' else 2


def sweep_cmd(args):
    cfg = config.config_from_args(args)
    workers = config.workers(args.workers)
    summary, results = harness.sweep(cfg, workers, args.verbose)
    failed = sum(1 for r in results if r.status != 'ok')
    print("%d runs, %d failed; summary in %s" % (
        len(results), failed, cfg.output_dir))
    if args.verbose:
        print(summary['mean_accuracy'].to_pandas())
    return 0


def report_cmd(args):
    if args.plots:
        from synprune import plotting
        plotting.use_noninteractive()
    tables = harness.report(args.results_dir, args.threshold, args.out_dir,
                            plots=args.plots, verbose=args.verbose)
    print(tables['table_means'])
    return 0


def similarity_cmd(args):
    if args.plots:
        from synprune import plotting
        plotting.use_noninteractive()
    selection = parse_list(args.runs, str) if args.runs else None
    metric = args.metric or config.load_config(args.config).similarity_metric
    matrix = harness.similarity_report(args.results_dir, selection, metric,
                                       args.out_dir, plots=args.plots,
                                       verbose=args.verbose)
    print(matrix.to_pandas())
    return 0


def dag_prune_cmd(args):
    removed = harness.dag_prune_file(args.network, args.output)
    _shout("Removed %d redundant connections, wrote %s" % (
        len(removed), args.output), args.verbose)
    print(' '.join('%d:%d:%d' % c for c in removed) or '-')
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog='synprune',
        description="Sparse training with connection synthesis and pruning.")
    parser.add_argument(
        "--version", action="version", version=synprune.__version__)
    parser.add_argument(
        "-v", "--verbose", action="store_true",
        help="Print progress messages.")
    sub = parser.add_subparsers(dest="command")
    sub.required = True

    p = sub.add_parser("train", help="Train one network.")
    p.add_argument(
        "--seed", type=int, default=None,
        help="Model seed (default: the first of --seeds).")
    config.add_arguments(p)
    p.set_defaults(func=train_cmd)

    p = sub.add_parser("sweep", help="Run strategies x thresholds x seeds.")
    p.add_argument(
        "--workers", type=int, default=None,
        help="Worker processes (default: $%s or 1)." % config.WORKERS_ENV)
    config.add_arguments(p)
    p.set_defaults(func=sweep_cmd)

    p = sub.add_parser("report", help="Summary tables of a results dir.")
    p.add_argument("results_dir", help="Directory with run results.")
    p.add_argument(
        "--threshold", type=float, default=None,
        help="Threshold of the means table (default: the largest one).")
    p.add_argument(
        "-o", "--out-dir", default=None,
        help="Where tables go (default: the results dir).")
    p.add_argument(
        "--plots", action="store_true",
        help="Also write the threshold boxplots as PNG.")
    p.set_defaults(func=report_cmd)

    p = sub.add_parser("similarity",
                       help="Similarity matrix of final masks.")
    p.add_argument("results_dir", help="Directory with run results.")
    p.add_argument(
        "--runs", default=None,
        help=("Comma separated run names (default: the best run of "
              "each strategy)."))
    p.add_argument(
        "--metric", "--similarity_metric", dest="metric", default=None,
        choices=('jaccard', 'overlap'),
        help=("Similarity metric (default: the similarity_metric option "
              "of the configuration)."))
    p.add_argument(
        "--config", default=None,
        help=("YAML file with option values (overrides $%s)." %
              config.CONFIG_ENV))
    p.add_argument(
        "-o", "--out-dir", default=None,
        help="Where the matrix goes (default: the results dir).")
    p.add_argument(
        "--plots", action="store_true",
        help="Also write the matrix as a heatmap PNG.")
    p.set_defaults(func=similarity_cmd)

    p = sub.add_parser("dag-prune",
                       help="Remove redundant connections of a network.")
    p.add_argument("network", help="Network file (e.g. a run's final.net).")
    p.add_argument("output", help="Where the pruned network goes.")
    p.set_defaults(func=dag_prune_cmd)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (IOError, KeyError, ValueError) as e:
        parser.exit(1, "synprune %s: error: %s\n" % (args.command, e))


if __name__ == '__main__':
    sys.exit(main())
