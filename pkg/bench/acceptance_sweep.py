"""
Desk-scale sweep over a real dataset, checking the soft quantitative
targets (dense and sub-network accuracy, synthesis vs sub-network
ordering, structural identity of random synthesis at S = 0.99 and the
similarity report).  Every check is reported, none asserted.

Usage:

$ python bench/acceptance_sweep.py heart.csv [results_dir] [workers]

The CSV must have the 13 clinical attributes plus the `target` column.

"""

from __future__ import print_function

import sys
import time

import numpy as np

import synprune as sp
from synprune import harness
from synprune.compression import sparsity


def check(label, ok, detail):
    print("%-55s %s  (%s)" % (label, 'ok  ' if ok else 'MISS', detail))


def main(dataset, output_dir='acceptance-results', workers=1):
    cfg = sp.load_config(dataset=dataset, output_dir=output_dir)
    tic = time.time()
    summary, results = harness.sweep(cfg, workers=workers, verbose=True)
    print("Sweep of %d runs took %.1f s" % (len(results), time.time() - tic))

    mean = summary['mean_accuracy']
    dense = float(mean.sel(strategy='dense', threshold=0.9))
    subnet = float(mean.sel(strategy='subnet_only', threshold=0.9))
    strategic = float(mean.sel(strategy='strategic_synth', threshold=0.9))
    subnet_sparsity = float(summary['mean_sparsity'].sel(
        strategy='subnet_only', threshold=0.9))

    check("dense mean accuracy 84.83% +- 5", abs(dense - 0.8483) <= 0.05,
          "%.4f" % dense)
    check("sub-network mean accuracy 77.31% +- 8",
          abs(subnet - 0.7731) <= 0.08, "%.4f" % subnet)
    check("sub-network mean sparsity in [0.85, 0.95]",
          0.85 <= subnet_sparsity <= 0.95, "%.4f" % subnet_sparsity)
    check("strategic synthesis beats sub-network by 2 points at S = 0.9",
          strategic - subnet >= 0.02, "%.4f vs %.4f" % (strategic, subnet))
    if strategic - subnet < 0.02:
        for strategy in ('subnet_only', 'strategic_synth'):
            cell = summary.sel(strategy=strategy, threshold=0.9)
            print("    %s: q1 %.4f median %.4f q3 %.4f min %.4f max %.4f" % (
                strategy, cell['q1_accuracy'], cell['median_accuracy'],
                cell['q3_accuracy'], cell['min_accuracy'],
                cell['max_accuracy']))

    offenders = []
    for r in results:
        if (r.strategy == 'random_synth' and r.threshold == 0.99 and
                r.status == 'ok' and sparsity(r.initial.mask) < 0.99 and
                r.summary['synthesize_events']):
            offenders.append(r.name)
    check("random synthesis idle at S = 0.99", not offenders,
          ', '.join(offenders) or 'no synthesize events')

    tables = harness.report(output_dir, threshold=0.99)
    print(open('%s/notes.txt' % output_dir).read().rstrip())
    print(tables['table_means'])

    matrix = harness.similarity_report(output_dir, metric=cfg.similarity_metric)
    values = matrix.values
    check("similarity matrix symmetric with unit diagonal",
          np.allclose(values, values.T) and np.allclose(np.diag(values), 1),
          "%d runs" % len(values))
    off = values[~np.eye(len(values), dtype=bool)]
    if len(off):
        print("    mean off-diagonal %s similarity: %.4f" % (
            cfg.similarity_metric, off.mean()))


if __name__ == '__main__':
    if len(sys.argv) < 2:
        print(__doc__)
        sys.exit(1)
    args = sys.argv[1:]
    main(args[0], *args[1:2], workers=int(args[2]) if len(args) > 2 else 1)
