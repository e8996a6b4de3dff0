"""
Experiment orchestration: single runs, sweeps, reports.

RESULT LAYOUT
=============

    Every run writes its own directory below the output directory, named
    ``<strategy>-<threshold>-s<seed>`` (threshold ``any`` for the dense and
    sub-network strategies, which do not depend on it)::

      summary.yml    config echo, status and summary statistics
      trace.csv      epoch,train_loss,val_accuracy,val_auc,sparsity
      events.log     structural events, one per line
      initial.net    network at the start of training
      final.net      network at the end of training

    A sweep adds ``sweep.csv``, the flattened sweep summary.  `report`
    and `similarity_report` read these directories back.

"""

from __future__ import division

from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
import functools
import os
import warnings

import numpy as np
import pandas as pd
import yaml

from synprune import formats, metrics
from synprune.analysis import (
    dag_prune, dag_prune_network, find_redundant, similarity_matrix)
from synprune.compression import (
    Strategy, apply_cycle, init_subnetwork_mask, sparsity)
from synprune.config import ExperimentConfig
from synprune.data_pipeline import load_dataset
from synprune.network import Architecture, DivergenceError, init_dense, train
from synprune.utils import _shout, seeded_rng, threshold_key

SUMMARY_FILE = 'summary.yml'
TRACE_FILE = 'trace.csv'
EVENTS_FILE = 'events.log'
INITIAL_FILE = 'initial.net'
FINAL_FILE = 'final.net'
SWEEP_FILE = 'sweep.csv'

# per-cell statistics of a SweepSummary, besides n_runs and n_failed
CELL_STATS = ['mean_accuracy', 'max_accuracy', 'min_accuracy',
              'q1_accuracy', 'median_accuracy', 'q3_accuracy',
              'mean_auc', 'max_auc', 'mean_sparsity', 'min_epoch_accuracy']


def run_name(strategy, threshold, seed):
    return '%s-%s-s%d' % (Strategy(strategy).value, threshold_key(threshold),
                          seed)


def _nan_if_empty(series, reduce):
    return float(reduce(series)) if len(series) else float('nan')


class RunResult(object):
    """Everything one (strategy, threshold, seed) run produced.

    `summary` is computed from the trace, the events and the final network
    only, so it can always be reproduced from the files of a run.
    """

    def __init__(self, config, strategy, threshold, seed, trace, events,
                 initial=None, final=None, status='ok', message=None):
        self.config = config
        self.strategy = Strategy(strategy)
        self.threshold = None if threshold is None else float(threshold)
        self.seed = int(seed)
        self.trace = trace
        self.events = list(events)
        self.initial = initial
        self.final = final
        self.status = status
        self.message = message

    @property
    def name(self):
        return run_name(self.strategy, self.threshold, self.seed)

    @property
    def final_mask(self):
        return None if self.final is None else self.final.mask

    @property
    def summary(self):
        trace = self.trace
        acc = trace['val_accuracy']
        summary = OrderedDict([
            ('epochs_completed', int(len(trace))),
            ('final_val_accuracy', _nan_if_empty(acc, lambda s: s.iloc[-1])),
            ('final_val_auc', _nan_if_empty(trace['val_auc'],
                                            lambda s: s.iloc[-1])),
            ('final_sparsity', _nan_if_empty(trace['sparsity'],
                                             lambda s: s.iloc[-1])),
            ('min_val_accuracy', _nan_if_empty(acc, np.min)),
            ('max_val_accuracy', _nan_if_empty(acc, np.max)),
            ('prune_events', sum(1 for e in self.events if e.kind == 'prune')),
            ('synthesize_events', sum(1 for e in self.events
                                      if e.kind == 'synthesize')),
        ])
        if self.final is not None:
            mask = self.final.mask
            arch = self.final.architecture
            summary['enabled_connections'] = mask.enabled_count
            summary['redundant_connections'] = len(find_redundant(mask, arch))
            summary['dag_pruned_sparsity'] = float(
                sparsity(dag_prune(mask, arch)))
        return summary

    def record(self):
        """One flat row for sweep tables."""
        row = OrderedDict([
            ('run', self.name),
            ('strategy', self.strategy.value),
            ('threshold', np.nan if self.threshold is None else self.threshold),
            ('seed', self.seed),
            ('status', self.status),
        ])
        row.update(self.summary)
        return row

    def __repr__(self):
        return "RunResult(%s, status=%s)" % (self.name, self.status)


@functools.lru_cache(maxsize=None)
def _shared_start(layer_widths, seed):
    """Dense network and walk mask of `seed`, generated once per process."""
    arch = Architecture(layer_widths)
    return init_dense(arch, seed), init_subnetwork_mask(arch, seed)


@functools.lru_cache(maxsize=8)
def _cached_dataset(path, ratio, seed):
    return load_dataset(path, ratio, seed)


def start_network(cfg, strategy, seed):
    """Initial network of `strategy` for `seed`.

    All strategies share the seed's dense weights; all but dense and
    prune_only start from the seed's walk mask applied to them.
    """
    dense, walk = _shared_start(tuple(cfg.layer_widths), seed)
    net = dense.copy()
    if not Strategy(strategy).starts_dense:
        net.apply_mask(walk.copy())
    return net


def run_experiment(cfg, seed, strategy=None, threshold=None, data=None):
    """Train one network of `strategy` at `threshold` for `seed`.

    `strategy` and `threshold` default to the single-run options of `cfg`
    and `data` (a SplitDataset) to the configured dataset.  Divergence is
    recorded as a failed result, not raised.
    """
    strategy = Strategy(strategy or cfg.strategy)
    if strategy.threshold_independent:
        threshold = None
    elif threshold is None:
        threshold = cfg.sparsity_threshold
    if data is None:
        data = _cached_dataset(cfg.dataset, cfg.split_ratio, cfg.split_seed)
    schedule = cfg.schedule(strategy, threshold)
    net = start_network(cfg, strategy, seed)
    initial = net.copy()
    rng = seeded_rng(seed, 'cycle')

    def compress(net, epoch):
        # events without connections are not logged
        return [e for e in apply_cycle(net, schedule, epoch, rng) if len(e)]

    hooks = [compress] if (strategy.prunes or strategy.synthesis) else []
    try:
        result = train(net, data, cfg.train_config(seed), hooks)
    except DivergenceError as e:
        warnings.warn("run %s diverged: %s" % (
            run_name(strategy, threshold, seed), e))
        return RunResult(cfg, strategy, threshold, seed, e.trace, e.events,
                         initial, net, status='failed', message=str(e))
    return RunResult(cfg, strategy, threshold, seed, result.trace,
                     result.events, initial, net)


def _plain(value):
    """Python scalars for YAML output."""
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    return value


def write_run(result, output_dir):
    """Write the files of `result` into its run directory; return its path."""
    run_dir = os.path.join(output_dir, result.name)
    if not os.path.isdir(run_dir):
        os.makedirs(run_dir)
    content = OrderedDict([
        ('run', result.name),
        ('strategy', result.strategy.value),
        ('threshold', result.threshold),
        ('seed', result.seed),
        ('status', result.status),
        ('message', result.message),
        ('summary', dict((k, _plain(v)) for k, v in result.summary.items())),
        ('config', result.config.to_dict()),
    ])
    with open(os.path.join(run_dir, SUMMARY_FILE), 'w') as f:
        yaml.safe_dump(dict(content), f, default_flow_style=False)
    formats.write_trace(result.trace, os.path.join(run_dir, TRACE_FILE))
    formats.write_events(result.events, os.path.join(run_dir, EVENTS_FILE))
    for net, filename in ((result.initial, INITIAL_FILE),
                          (result.final, FINAL_FILE)):
        if net is not None:
            formats.write_network(net, os.path.join(run_dir, filename))
    return run_dir


def read_run(run_dir, networks=True):
    """Read a run directory written by `write_run`.

    Raises IOError when a file is missing and ValueError, naming the file,
    when one cannot be parsed.
    """
    def path(filename):
        p = os.path.join(run_dir, filename)
        if not os.path.isfile(p):
            raise IOError("missing result file: %s" % p)
        return p

    summary_file = path(SUMMARY_FILE)
    try:
        with open(summary_file) as f:
            content = yaml.safe_load(f)
        config = ExperimentConfig(**content['config'])
        strategy, threshold = content['strategy'], content['threshold']
        seed, status = content['seed'], content['status']
        message = content.get('message')
    except (yaml.YAMLError, KeyError, TypeError, ValueError) as e:
        raise ValueError("corrupt result file %s: %s" % (summary_file, e))
    trace_file = path(TRACE_FILE)
    events_file = path(EVENTS_FILE)
    try:
        trace = formats.read_trace(trace_file)
    except (ValueError, pd.errors.ParserError) as e:
        raise ValueError("corrupt result file %s: %s" % (trace_file, e))
    try:
        events = formats.read_events(events_file)
    except ValueError as e:
        raise ValueError("corrupt result file %s: %s" % (events_file, e))
    initial = final = None
    if networks:
        initial = formats.read_network(path(INITIAL_FILE))
        final = formats.read_network(path(FINAL_FILE))
    return RunResult(config, strategy, threshold, seed, trace, events,
                     initial, final, status=status, message=message)


def load_results(results_dir, networks=True):
    """All runs below `results_dir`, sorted by run name."""
    if not os.path.isdir(results_dir):
        raise IOError("results directory not found: %s" % results_dir)
    run_dirs = sorted(
        os.path.join(results_dir, d) for d in os.listdir(results_dir)
        if os.path.isfile(os.path.join(results_dir, d, SUMMARY_FILE)))
    if not run_dirs:
        raise IOError("no run results found in %s" % results_dir)
    return [read_run(d, networks) for d in run_dirs]


def grid(cfg):
    """(strategy, threshold, seed) of every run of a sweep of `cfg`.

    Raises ValueError when two cells would share a run directory, e.g.
    thresholds that agree to 4 significant digits or a repeated seed.
    """
    cells = []
    names = {}
    for strategy in cfg.strategies:
        strategy = Strategy(strategy)
        thresholds = ([None] if strategy.threshold_independent
                      else sorted(set(cfg.thresholds)))
        for threshold in thresholds:
            for seed in cfg.seeds:
                cell = (strategy.value, threshold, seed)
                name = run_name(*cell)
                if name in names:
                    raise ValueError(
                        "sweep cells %r and %r would both be written to %s" %
                        (names[name], cell, name))
                names[name] = cell
                cells.append(cell)
    return cells


def _sweep_task(cfg, strategy, threshold, seed, output_dir):
    """Run and write one sweep cell; any failure becomes a failed result."""
    try:
        result = run_experiment(cfg, seed, strategy, threshold)
    except Exception as e:
        result = RunResult(cfg, strategy, threshold, seed,
                           metrics.trace_frame([]), [], status='failed',
                           message='%s: %s' % (type(e).__name__, e))
    write_run(result, output_dir)
    return result


def _cell_stats(group):
    acc = group['final_val_accuracy'].values
    q1, median, q3 = metrics.exclusive_quartiles(acc)
    return pd.Series(OrderedDict([
        ('mean_accuracy', acc.mean()),
        ('max_accuracy', acc.max()),
        ('min_accuracy', acc.min()),
        ('q1_accuracy', q1),
        ('median_accuracy', median),
        ('q3_accuracy', q3),
        ('mean_auc', group['final_val_auc'].mean()),
        ('max_auc', group['final_val_auc'].max()),
        ('mean_sparsity', group['final_sparsity'].mean()),
        ('min_epoch_accuracy', group['min_val_accuracy'].min()),
    ]))


def expand_thresholds(runs, thresholds):
    """Replicate rows of threshold-independent runs for every threshold."""
    fixed = runs[runs['threshold'].notnull()]
    free = runs[runs['threshold'].isnull()]
    copies = [free.assign(threshold=t) for t in thresholds]
    return pd.concat([fixed] + copies, ignore_index=True)


def summarize(runs, strategies, thresholds):
    """SweepSummary: per (strategy, threshold) statistics of run records.

    `runs` holds one `RunResult.record` per row.  Failed runs are counted
    in n_failed and left out of every other statistic.
    """
    thresholds = sorted(set(float(t) for t in thresholds))
    frame = expand_thresholds(runs, thresholds)
    keys = ['strategy', 'threshold']
    grouped = frame.groupby(keys)
    table = pd.DataFrame({
        'n_runs': grouped.size(),
        'n_failed': grouped['status'].apply(lambda s: int((s != 'ok').sum())),
    })
    ok = frame[frame['status'] == 'ok']
    if len(ok):
        table = table.join(ok.groupby(keys).apply(_cell_stats))
    table = table.reindex(columns=['n_runs', 'n_failed'] + CELL_STATS)
    summary = table.to_xarray().reindex(
        strategy=[Strategy(s).value for s in strategies], threshold=thresholds)
    summary['n_runs'] = summary['n_runs'].fillna(0).astype(int)
    summary['n_failed'] = summary['n_failed'].fillna(0).astype(int)
    summary.attrs['description'] = 'final validation metrics per sweep cell'
    return summary


def sweep(cfg, workers=1, verbose=False):
    """Run every (strategy, threshold, seed) cell of `cfg`.

    Runs go to a pool of `workers` processes (serial for 1) and each one
    writes its own directory.  The aggregate is computed afterwards from
    results sorted by cell, so it does not depend on the execution order.
    Returns the SweepSummary and the list of RunResults.
    """
    cells = grid(cfg)
    if not cells:
        raise ValueError("the sweep grid is empty")
    output_dir = cfg.output_dir
    if not os.path.isdir(output_dir):
        os.makedirs(output_dir)
    # the dataset is validated once, before any worker starts
    _cached_dataset(cfg.dataset, cfg.split_ratio, cfg.split_seed)
    _shout("Running %d runs with %d worker(s)..." % (len(cells), workers),
           verbose)
    args = [(cfg,) + cell + (output_dir,) for cell in cells]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_sweep_task, *a) for a in args]
            results = [f.result() for f in futures]
    else:
        results = []
        for a in args:
            results.append(_sweep_task(*a))
            _shout("  %s: %s" % (results[-1].name, results[-1].status),
                   verbose)
    failed = [r.name for r in results if r.status != 'ok']
    if failed:
        warnings.warn("%d of %d runs failed: %s" % (
            len(failed), len(results), ', '.join(failed)))
    runs = pd.DataFrame([r.record() for r in results])
    summary = summarize(runs, cfg.strategies, cfg.thresholds)
    summary.to_dataframe().to_csv(os.path.join(output_dir, SWEEP_FILE),
                                  float_format='%.17g')
    return summary, results


def _boxplot_rows(frame):
    rows = []
    for (strategy, threshold), group in frame.groupby(['strategy',
                                                      'threshold']):
        stats = metrics.boxplot_summary(group['final_val_accuracy'].values)
        row = OrderedDict([('strategy', strategy), ('threshold', threshold),
                           ('n', len(group))])
        row.update(stats)
        row['outliers'] = ';'.join(repr(o) for o in stats['outliers'])
        rows.append(row)
    return pd.DataFrame(rows)


def _notes(frame, summary):
    """Synthesize-event counts and sub-network comparison per threshold."""
    lines = []
    means = summary['mean_accuracy']
    strategies = list(summary['strategy'].values)
    for threshold in summary['threshold'].values:
        lines.append("threshold %s" % threshold_key(threshold))
        for strategy in strategies:
            if Strategy(strategy).synthesis is None:
                continue
            cell = frame[(frame['strategy'] == strategy) &
                         (frame['threshold'] == threshold)]
            line = "  %s: %d synthesize events over %d runs" % (
                strategy, cell['synthesize_events'].sum(), len(cell))
            if Strategy.SUBNET_ONLY.value in strategies:
                own = float(means.sel(strategy=strategy, threshold=threshold))
                sub = float(means.sel(strategy=Strategy.SUBNET_ONLY.value,
                                      threshold=threshold))
                line += "; mean accuracy %s the sub-network row" % (
                    'equals' if own == sub else 'differs from')
            lines.append(line)
    return '\n'.join(lines) + '\n'


def report(results_dir, threshold=None, out_dir=None, plots=False,
           verbose=False):
    """Write the summary tables of the runs below `results_dir`.

    Tables (CSV, in `out_dir`, default `results_dir`):

    ======================   ===========================================
    table_means              means per strategy at `threshold` (default
                             the largest threshold present)
    table_max_accuracy       max final accuracy, strategy x threshold
    table_max_auc            max final AUC, strategy x threshold
    table_false_starts       lowest per-epoch accuracy per strategy
    boxplot                  boxplot statistics of final accuracy per cell
    notes.txt                synthesize events vs the sub-network row
    ======================   ===========================================

    Every table is computed before the first file is written, so a corrupt
    result leaves no partial output.  Returns the tables as DataFrames.
    """
    results = load_results(results_dir, networks=False)
    runs = pd.DataFrame([r.record() for r in results])
    thresholds = sorted(set(runs['threshold'].dropna()))
    if not thresholds:
        # only threshold-independent runs, report them under their config
        thresholds = sorted(set(results[0].config.thresholds))
    strategies = [s.value for s in Strategy
                  if s.value in set(runs['strategy'])]
    summary = summarize(runs, strategies, thresholds)
    if threshold is None:
        threshold = thresholds[-1]
    elif float(threshold) not in thresholds:
        raise ValueError("no runs at threshold %r (have %s)" % (
            threshold, ', '.join(threshold_key(t) for t in thresholds)))
    threshold = float(threshold)

    frame = expand_thresholds(runs, thresholds)
    ok = frame[frame['status'] == 'ok']
    at = summary.sel(threshold=threshold)
    tables = OrderedDict()
    tables['table_means'] = pd.DataFrame(OrderedDict([
        ('n_runs', at['n_runs'].values),
        ('mean_accuracy', at['mean_accuracy'].values),
        ('mean_auc', at['mean_auc'].values),
        ('mean_sparsity', at['mean_sparsity'].values),
    ]), index=pd.Index(strategies, name='strategy'))
    tables['table_max_accuracy'] = summary['max_accuracy'].to_pandas()
    tables['table_max_auc'] = summary['max_auc'].to_pandas()
    # threshold-independent runs counted once here
    own = runs[runs['status'] == 'ok']
    rows = []
    for strategy in strategies:
        cell = own[own['strategy'] == strategy]
        if len(cell):
            worst = cell.loc[cell['min_val_accuracy'].idxmin()]
            rows.append((strategy, worst['min_val_accuracy'],
                         cell['min_val_accuracy'].mean(), worst['run']))
    tables['table_false_starts'] = pd.DataFrame(
        rows, columns=['strategy', 'min_accuracy', 'mean_min_accuracy',
                       'worst_run']).set_index('strategy')
    tables['boxplot'] = _boxplot_rows(ok)
    notes = _notes(ok, summary)

    out_dir = out_dir or results_dir
    if not os.path.isdir(out_dir):
        os.makedirs(out_dir)
    for name, table in tables.items():
        table.to_csv(os.path.join(out_dir, name + '.csv'),
                     float_format='%.17g')
        _shout("Wrote %s.csv" % name, verbose)
    with open(os.path.join(out_dir, 'notes.txt'), 'w') as f:
        f.write(notes)
    if plots:
        from synprune import plotting
        plotting.save(plotting.plot_threshold_boxplots(ok),
                      os.path.join(out_dir, 'boxplot.png'))
    return tables


def select_representatives(results):
    """Highest final accuracy run per strategy (first by name on ties)."""
    best = OrderedDict()
    for strategy in Strategy:
        candidates = [r for r in results
                      if r.strategy == strategy and r.status == 'ok']
        if candidates:
            best[strategy.value] = max(
                candidates, key=lambda r: r.summary['final_val_accuracy'])
    return list(best.values())


def similarity_report(results_dir, selection=None, metric='jaccard',
                      out_dir=None, plots=False, verbose=False):
    """Similarity matrix of the final masks of selected runs.

    `selection` lists run names; by default one representative per
    strategy (see `select_representatives`).  The matrix is written as
    ``similarity_<metric>.csv`` with the metric name in the corner cell.
    """
    results = load_results(results_dir, networks=True)
    if selection:
        by_name = dict((r.name, r) for r in results)
        missing = [s for s in selection if s not in by_name]
        if missing:
            raise KeyError("runs not found in %s: %s" % (
                results_dir, ', '.join(missing)))
        chosen = [by_name[s] for s in selection]
    else:
        chosen = select_representatives(results)
    matrix = similarity_matrix([r.final_mask for r in chosen],
                               [r.name for r in chosen], metric)
    out_dir = out_dir or results_dir
    if not os.path.isdir(out_dir):
        os.makedirs(out_dir)
    table = pd.DataFrame(matrix.values, index=list(matrix['run'].values),
                         columns=list(matrix['other'].values))
    filename = os.path.join(out_dir, 'similarity_%s.csv' % metric)
    table.to_csv(filename, index_label=metric, float_format='%.17g')
    _shout("Wrote %s" % filename, verbose)
    if plots:
        from synprune import plotting
        plotting.save(plotting.plot_similarity(matrix),
                      os.path.join(out_dir, 'similarity_%s.png' % metric))
    return matrix


def dag_prune_file(network_file, output_file):
    """DAG-prune a saved network; return the removed connections."""
    net = formats.read_network(network_file)
    pruned, removed = dag_prune_network(net)
    formats.write_network(pruned, output_file)
    return removed
