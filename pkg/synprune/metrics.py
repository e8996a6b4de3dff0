"""
Validation metrics and the per-epoch metric trace.
"""

from __future__ import division

import numpy as np
import pandas as pd
from scipy.stats import rankdata


TRACE_COLUMNS = ['epoch', 'train_loss', 'val_accuracy', 'val_auc', 'sparsity']


def _pair(scores, labels):
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels, dtype=float).ravel()
    if scores.shape != labels.shape:
        raise ValueError("scores and labels differ in length ({} vs {})".format(
            scores.size, labels.size))
    if scores.size == 0:
        raise ValueError("empty scores")
    return scores, labels


def accuracy(scores, labels, cutoff=0.5):
    """Fraction of samples whose class (score >= cutoff) equals the label."""
    scores, labels = _pair(scores, labels)
    return float(np.mean((scores >= cutoff) == (labels > 0.5)))


def roc_auc(scores, labels):
    """Area under the ROC curve as the Mann-Whitney concordance.

    Over all (positive, negative) pairs, the fraction where the positive
    sample scores higher; ties count one half.  Computed from average
    ranks, which is the same number as the pairwise count.
    """
    scores, labels = _pair(scores, labels)
    positive = labels > 0.5
    npos = int(positive.sum())
    nneg = positive.size - npos
    if npos == 0 or nneg == 0:
        raise ValueError("AUC is undefined with a single class "
                         "({} positives, {} negatives)".format(npos, nneg))
    ranks = rankdata(scores)   # ties get their average rank
    u = ranks[positive].sum() - npos * (npos + 1) / 2.0
    return float(u / (npos * nneg))


def trace_frame(rows):
    """Build the MetricTrace DataFrame from a list of per-epoch dicts."""
    return pd.DataFrame(list(rows), columns=TRACE_COLUMNS)


def exclusive_quartiles(values):
    """(Q1, median, Q3) with the exclusive-median method.

    The median splits the sorted sample; with an odd count the median
    itself belongs to neither half.  Q1 and Q3 are the medians of the
    lower and upper halves.
    """
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    if n == 0:
        raise ValueError("no values to summarise")
    median = float(np.median(v))
    if n == 1:
        return median, median, median
    half = n // 2
    lower = v[:half]
    upper = v[half + (n % 2):]
    return float(np.median(lower)), median, float(np.median(upper))


def boxplot_summary(values, whisker=1.5):
    """Boxplot statistics for one cell of a sweep.

    Outliers lie more than `whisker` IQRs outside the quartiles; the
    whisker ends are the extreme values that are not outliers.
    """
    v = np.asarray(values, dtype=float)
    q1, median, q3 = exclusive_quartiles(v)
    iqr = q3 - q1
    low, high = q1 - whisker * iqr, q3 + whisker * iqr
    outliers = np.sort(v[(v < low) | (v > high)])
    inliers = v[(v >= low) & (v <= high)]
    return {
        'min': float(v.min()),
        'q1': q1,
        'median': median,
        'q3': q3,
        'max': float(v.max()),
        'mean': float(v.mean()),
        'whisker_low': float(inliers.min()),
        'whisker_high': float(inliers.max()),
        'outliers': [float(o) for o in outliers],
    }
