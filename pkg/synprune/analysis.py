"""
Structural analysis of trained sparse networks.

Similarity of connection masks, detection of redundant connections (those
on no complete input -> output path) and DAG pruning, which removes them.
"""

from __future__ import division

import numpy as np
import xarray as xr

from synprune.network import ConnectionMask, forward


METRICS = ('jaccard', 'overlap')


def _check_same(a, b):
    if [m.shape for m in a.layers] != [m.shape for m in b.layers]:
        raise ValueError("masks of different architectures: {} vs {}".format(
            [m.shape for m in a.layers], [m.shape for m in b.layers]))


def mask_similarity(a, b, metric='jaccard'):
    """Similarity of the enabled-connection sets of masks `a` and `b`.

    'jaccard' is |a & b| / |a | b|, 'overlap' is |a & b| / min(|a|, |b|).
    Two empty masks are identical (1.0).
    """
    if metric not in METRICS:
        raise ValueError("similarity metric '%s' is not a valid one" % metric)
    _check_same(a, b)
    inter = sum(int(np.sum(x & y)) for x, y in zip(a.layers, b.layers))
    if metric == 'jaccard':
        denom = sum(int(np.sum(x | y)) for x, y in zip(a.layers, b.layers))
    else:
        denom = min(a.enabled_count, b.enabled_count)
        if denom == 0 and a.enabled_count != b.enabled_count:
            return 0.0
    if denom == 0:
        return 1.0
    return inter / denom


def similarity_matrix(masks, labels, metric='jaccard'):
    """Pairwise `mask_similarity` as a labelled, symmetric DataArray."""
    if len(masks) < 2:
        raise ValueError("a similarity matrix needs at least two masks")
    if len(labels) != len(masks):
        raise ValueError("one label per mask is needed")
    for m in masks[1:]:
        _check_same(masks[0], m)
    n = len(masks)
    values = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            values[i, j] = values[j, i] = mask_similarity(masks[i], masks[j],
                                                          metric)
    return xr.DataArray(values, dims=('run', 'other'),
                        coords={'run': list(labels), 'other': list(labels)},
                        name='similarity', attrs={'metric': metric})


def _reachability(mask):
    """Neurons fed from the input layer, and neurons that feed the output."""
    layers = mask.layers
    fed = [np.ones(layers[0].shape[0], dtype=bool)]
    for m in layers:
        fed.append(np.any(m[fed[-1]], axis=0))
    feeds = [np.ones(layers[-1].shape[1], dtype=bool)]
    for m in reversed(layers):
        feeds.insert(0, np.any(m[:, feeds[0]], axis=1))
    return fed, feeds


def _redundant_layers(mask):
    fed, feeds = _reachability(mask)
    return [m & ~np.outer(fed[k], feeds[k + 1])
            for k, m in enumerate(mask.layers)]


def find_redundant(mask, arch):
    """Enabled connections that lie on no enabled input -> output path.

    A connection (k, i, j) is on a complete path exactly when neuron i of
    layer k is reachable from the input layer and neuron j of layer k+1
    reaches the output layer.
    """
    mask.check(arch)
    return ConnectionMask(_redundant_layers(mask)).connections()


def dag_prune(mask, arch):
    """Copy of `mask` with every redundant connection disabled.

    Removing a connection that is on no complete path cannot break a
    complete path, so a single pass is already the fixed point.
    """
    mask.check(arch)
    redundant = _redundant_layers(mask)
    return ConnectionMask([m & ~r for m, r in zip(mask.layers, redundant)])


def dag_prune_network(net):
    """DAG-prune a network, keeping its output.

    Redundant weights are zeroed.  Neurons unreachable from the input emit
    a constant (ReLU of their bias chain); what they sent to neurons that
    stay connected is folded into those neurons' biases.  Outputs are
    unchanged up to rounding, and bit for bit when those constants are 0.
    Returns the pruned copy and the removed connections.
    """
    arch = net.architecture
    fed, feeds = _reachability(net.mask)
    pruned_mask = dag_prune(net.mask, arch)
    # activations of input-unreachable neurons do not depend on the input
    activations, _ = forward(net, np.zeros((1, arch.layer_widths[0])))
    out = net.copy()
    removed = []
    for k, (m, keep) in enumerate(zip(net.mask.layers, pruned_mask.layers)):
        gone = m & ~keep
        if not gone.any():
            continue
        origins, termini = np.nonzero(gone)
        removed.extend((k, int(i), int(j)) for i, j in zip(origins, termini))
        constant = np.where(fed[k], 0.0, activations[k][0])
        folded = np.where(feeds[k + 1],
                          constant.dot(np.where(gone, net.weights[k], 0.0)),
                          0.0)
        out.biases[k] = out.biases[k] + folded
    out.apply_mask(pruned_mask)
    return out, sorted(removed)
