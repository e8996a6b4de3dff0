"""
Plots of sweep results.

Every function returns a "FIGURE" Structure with attributes `fig` and
`ax` (a list of axes for multi-panel figures); use `save` to write it.
"""

from __future__ import division

import matplotlib
import matplotlib.pyplot as plt
import numpy as np

from synprune import metrics
from synprune.utils import Structure, threshold_key


def _get_figure(fig_par=None, ncols=1):
    fig_par = fig_par or {}
    fig_par.setdefault('figsize', (4.0 * ncols, 4.0))
    figure = Structure()
    figure.fig, axes = plt.subplots(1, ncols, squeeze=False, **fig_par)
    figure.ax = list(axes[0])
    return figure


def _bxp_stats(values, label):
    """matplotlib `bxp` input from our own (exclusive median) statistics."""
    s = metrics.boxplot_summary(values)
    return {
        'label': label,
        'med': s['median'],
        'q1': s['q1'],
        'q3': s['q3'],
        'whislo': s['whisker_low'],
        'whishi': s['whisker_high'],
        'mean': s['mean'],
        'fliers': s['outliers'],
    }


def plot_threshold_boxplots(runs, column='final_val_accuracy',
                            fig_par=None):
    """One boxplot panel per threshold, one box per strategy.

    `runs` is a DataFrame of run records (see `harness.RunResult.record`)
    with the thresholds already filled in.  Means are marked 'x' and
    outliers (beyond 1.5 IQR) 'o'.
    """
    if not len(runs):
        raise ValueError("no runs to plot")
    thresholds = sorted(set(runs['threshold']))
    figure = _get_figure(fig_par, ncols=len(thresholds))
    for ax, threshold in zip(figure.ax, thresholds):
        cell = runs[runs['threshold'] == threshold]
        stats = [_bxp_stats(group[column].values, strategy)
                 for strategy, group in cell.groupby('strategy', sort=False)]
        ax.bxp(stats, showmeans=True,
               meanprops={'marker': 'x', 'markeredgecolor': 'k'},
               flierprops={'marker': 'o', 'markerfacecolor': 'none'})
        ax.set_title('S = %s' % threshold_key(threshold))
        ax.tick_params(axis='x', labelrotation=90)
    figure.ax[0].set_ylabel(column.replace('_', ' '))
    figure.fig.tight_layout()
    return figure


def plot_similarity(matrix, cmap='viridis', fig_par=None):
    """Heatmap of a similarity matrix (an xarray DataArray run x other)."""
    figure = _get_figure(fig_par)
    ax = figure.ax[0]
    values = np.asarray(matrix.values)
    im = ax.imshow(values, vmin=0.0, vmax=1.0, cmap=cmap)
    labels = [str(v) for v in matrix['run'].values]
    ax.set_xticks(range(len(labels)))
    ax.set_yticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=90)
    ax.set_yticklabels(labels)
    for i in range(values.shape[0]):
        for j in range(values.shape[1]):
            ax.text(j, i, '%.2f' % values[i, j], ha='center', va='center',
                    color='w' if values[i, j] < 0.5 else 'k', fontsize=8)
    figure.fig.colorbar(im, ax=ax)
    ax.set_title('%s similarity' % matrix.attrs.get('metric', ''))
    figure.fig.tight_layout()
    return figure


def save(figure, filename):
    figure.fig.savefig(filename)
    plt.close(figure.fig)
    return filename


def use_noninteractive():
    """Select a file-only backend, for runs without a display."""
    matplotlib.use('Agg')
