"""
Masked feedforward networks.

A `MaskedNetwork` holds, for each pair of adjacent layers k, k+1, a weight
matrix of shape (widths[k], widths[k+1]) and a boolean mask of the same
shape.  Disabled connections always store a literal 0 weight, take no part
in the forward pass and receive a zero gradient, so they stay 0 through
training.  Hidden layers are rectified-linear, the output is a logistic
sigmoid trained with binary cross-entropy.
"""

from __future__ import division

import warnings

import numpy as np
from scipy.special import expit

from synprune import metrics
from synprune.utils import seeded_rng


# scores are clamped to [EPS, 1 - EPS] inside the loss
EPS = 1e-12


class Architecture(object):
    """Layer widths, input first and output last (default 27-16-8-1)."""

    def __init__(self, layer_widths=(27, 16, 8, 1)):
        widths = tuple(int(w) for w in layer_widths)
        if len(widths) < 2:
            raise ValueError("an architecture needs at least an input and an "
                             "output layer, got {}".format(list(widths)))
        if any(w < 1 for w in widths):
            raise ValueError("layer widths must be positive, got {}".format(
                list(widths)))
        self.layer_widths = widths

    @property
    def n_pairs(self):
        return len(self.layer_widths) - 1

    @property
    def shapes(self):
        w = self.layer_widths
        return [(w[k], w[k + 1]) for k in range(self.n_pairs)]

    @property
    def total_connections(self):
        return sum(a * b for a, b in self.shapes)

    def init_limit(self, k):
        """Bound of the uniform dense initialisation for layer pair `k`."""
        fan_in, fan_out = self.shapes[k]
        return np.sqrt(6.0 / (fan_in + fan_out))

    def __eq__(self, other):
        return (isinstance(other, Architecture) and
                self.layer_widths == other.layer_widths)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.layer_widths)

    def __repr__(self):
        return "Architecture(%s)" % list(self.layer_widths)


class ConnectionMask(object):
    """Per layer pair boolean matrices; True marks an enabled connection."""

    def __init__(self, layers):
        self.layers = [np.array(m, dtype=bool) for m in layers]
        if not self.layers:
            raise ValueError("a mask needs at least one layer pair")
        for k in range(1, len(self.layers)):
            if self.layers[k].shape[0] != self.layers[k - 1].shape[1]:
                raise ValueError(
                    "mask layer pair {} has {} origins but layer pair {} has "
                    "{} termini".format(k, self.layers[k].shape[0], k - 1,
                                        self.layers[k - 1].shape[1]))

    @classmethod
    def full(cls, arch, value=True):
        return cls([np.full(shape, value, dtype=bool) for shape in arch.shapes])

    @classmethod
    def from_connections(cls, arch, connections):
        mask = cls.full(arch, False)
        for k, i, j in connections:
            mask.layers[k][i, j] = True
        return mask

    @property
    def architecture(self):
        return Architecture([self.layers[0].shape[0]] +
                            [m.shape[1] for m in self.layers])

    def check(self, arch):
        """Raise ValueError unless the mask has exactly the shapes of `arch`."""
        if [m.shape for m in self.layers] != arch.shapes:
            raise ValueError("mask shapes {} do not match {!r}".format(
                [m.shape for m in self.layers], arch))

    @property
    def total_count(self):
        return sum(m.size for m in self.layers)

    @property
    def enabled_count(self):
        return int(sum(m.sum() for m in self.layers))

    @property
    def disabled_count(self):
        return self.total_count - self.enabled_count

    def connections(self):
        """Enabled (layer_pair, origin, terminus) triples, lexicographic."""
        out = []
        for k, m in enumerate(self.layers):
            origins, termini = np.nonzero(m)
            out.extend((k, int(i), int(j)) for i, j in zip(origins, termini))
        return out

    def copy(self):
        return ConnectionMask([m.copy() for m in self.layers])

    def __eq__(self, other):
        return (isinstance(other, ConnectionMask) and
                len(self.layers) == len(other.layers) and
                all(a.shape == b.shape and np.array_equal(a, b)
                    for a, b in zip(self.layers, other.layers)))

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return "ConnectionMask(%d of %d enabled)" % (
            self.enabled_count, self.total_count)


class MaskedNetwork(object):
    """Weights, biases and the connection mask of a feedforward network."""

    def __init__(self, architecture, weights, biases, mask):
        self.architecture = architecture
        self.weights = [np.array(w, dtype=float) for w in weights]
        self.biases = [np.array(b, dtype=float) for b in biases]
        self.mask = mask
        if [w.shape for w in self.weights] != architecture.shapes:
            raise ValueError("weight shapes do not match {!r}".format(
                architecture))
        if [b.shape for b in self.biases] != \
                [(w,) for w in architecture.layer_widths[1:]]:
            raise ValueError("bias shapes do not match {!r}".format(
                architecture))
        mask.check(architecture)

    def apply_mask(self, mask=None):
        """Set `mask` (or re-apply the current one), zeroing disabled weights."""
        if mask is not None:
            mask.check(self.architecture)
            self.mask = mask
        for w, m in zip(self.weights, self.mask.layers):
            w[~m] = 0.0
        return self

    def effective_weights(self):
        return [np.where(m, w, 0.0) for w, m in zip(self.weights,
                                                    self.mask.layers)]

    def is_consistent(self):
        """True when disabled weights are 0 and every parameter is finite."""
        for w, m in zip(self.weights, self.mask.layers):
            if np.any(w[~m] != 0) or not np.all(np.isfinite(w)):
                return False
        return all(np.all(np.isfinite(b)) for b in self.biases)

    def copy(self):
        return MaskedNetwork(self.architecture,
                             [w.copy() for w in self.weights],
                             [b.copy() for b in self.biases],
                             self.mask.copy())

    def __repr__(self):
        return "MaskedNetwork(%r, %d of %d connections enabled)" % (
            self.architecture, self.mask.enabled_count,
            self.mask.total_count)


class TrainConfig(object):
    """Plain mini-batch gradient descent settings."""

    def __init__(self, learning_rate=0.01, epochs=200, batch_size=32,
                 rng_seed=0):
        self.learning_rate = float(learning_rate)
        self.epochs = int(epochs)
        self.batch_size = int(batch_size)
        self.rng_seed = int(rng_seed)
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be non-negative")
        if self.epochs < 1:
            raise ValueError("epochs must be a positive integer")
        if self.batch_size < 1:
            raise ValueError("batch_size must be a positive integer")

    def __repr__(self):
        return ("TrainConfig(learning_rate=%r, epochs=%d, batch_size=%d, "
                "rng_seed=%d)" % (self.learning_rate, self.epochs,
                                  self.batch_size, self.rng_seed))


class DivergenceError(FloatingPointError):
    """The training loss stopped being finite."""

    def __init__(self, message, epoch, batch, trace=None, events=None):
        super(DivergenceError, self).__init__(message)
        self.epoch = epoch
        self.batch = batch
        self.trace = trace
        self.events = events or []


class TrainResult(object):
    """What `train` hands back: the metric trace and the structural events."""

    def __init__(self, trace, events):
        self.trace = trace
        self.events = events


def init_dense(arch, seed):
    """Fully enabled network; uniform weights in +-sqrt(6/(fan_in+fan_out)).

    Every strategy run for a given `seed` starts from this network.
    """
    rng = seeded_rng(seed, 'dense')
    weights = []
    for k, shape in enumerate(arch.shapes):
        limit = arch.init_limit(k)
        weights.append(rng.uniform(-limit, limit, size=shape))
    biases = [np.zeros(w) for w in arch.layer_widths[1:]]
    return MaskedNetwork(arch, weights, biases, ConnectionMask.full(arch))


def _check_batch(net, batch):
    batch = np.asarray(batch, dtype=float)
    if batch.ndim == 1:
        batch = batch[np.newaxis, :]
    if batch.ndim != 2 or batch.shape[1] != net.architecture.layer_widths[0]:
        raise ValueError("batch of shape {} does not fit an input layer of "
                         "width {}".format(batch.shape,
                                           net.architecture.layer_widths[0]))
    return batch


def _scores(output):
    return output[:, 0] if output.shape[1] == 1 else output


def forward(net, batch):
    """Return (activations per layer, output scores) for `batch`.

    activations[0] is the input itself and activations[-1] the sigmoid
    output.  Scores are a vector when the output layer has one neuron.
    """
    a = _check_batch(net, batch)
    activations = [a]
    weights = net.effective_weights()
    last = len(weights) - 1
    for k, (w, b) in enumerate(zip(weights, net.biases)):
        z = a.dot(w) + b
        a = expit(z) if k == last else np.maximum(z, 0.0)
        activations.append(a)
    return activations, _scores(a)


def loss(scores, labels):
    """Mean binary cross-entropy of `scores` against 0/1 `labels`."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels differ in length ({} vs {})".format(
            scores.shape, labels.shape))
    if scores.size == 0:
        raise ValueError("cannot compute the loss of an empty batch")
    p = np.clip(scores, EPS, 1 - EPS)
    return float(-np.mean(labels * np.log(p) + (1 - labels) * np.log1p(-p)))


def backward(net, batch, labels, activations=None):
    """Exact gradients of `loss` w.r.t. weights and biases.

    Returns (weight gradients, bias gradients) shaped like the network's
    parameters; the gradient of every disabled connection is exactly 0.
    """
    if activations is None:
        activations, _ = forward(net, batch)
    labels = np.asarray(labels, dtype=float).reshape(-1, 1)
    n = activations[0].shape[0]
    if activations[-1].shape[1] != 1:
        raise ValueError("backward needs a single output neuron")
    if labels.shape[0] != n:
        raise ValueError("labels of length {} do not fit a batch of {} "
                         "samples".format(labels.shape[0], n))
    weights = net.effective_weights()
    # sigmoid + cross-entropy: dL/dz at the output
    delta = (activations[-1] - labels) / n
    gw = [None] * len(weights)
    gb = [None] * len(weights)
    for k in range(len(weights) - 1, -1, -1):
        gw[k] = np.where(net.mask.layers[k], activations[k].T.dot(delta), 0.0)
        gb[k] = delta.sum(axis=0)
        if k > 0:
            delta = delta.dot(weights[k].T) * (activations[k] > 0)
    return gw, gb


def evaluate(net, dataset):
    """(validation accuracy, validation AUC) of `net` on `dataset`."""
    _, scores = forward(net, dataset.features)
    acc = metrics.accuracy(scores, dataset.labels)
    try:
        auc = metrics.roc_auc(scores, dataset.labels)
    except ValueError:
        auc = np.nan
    return acc, auc


def train(net, data, cfg, hooks=()):
    """Mini-batch gradient descent on `data.train`, in place on `net`.

    After every epoch each hook is called as ``hook(net, epoch)`` (epochs
    count from 1) and may return a list of structural events; then the
    validation metrics and the sparsity are recorded.  Raises
    `DivergenceError` as soon as a batch loss is not finite.
    """
    train_set = data.train
    n = len(train_set)
    if cfg.batch_size > n:
        raise ValueError("batch_size {} exceeds the {} training samples".format(
            cfg.batch_size, n))
    if len(np.unique(data.validation.labels)) < 2:
        warnings.warn("the validation set holds a single class; val_auc "
                      "will be NaN")
    rng = seeded_rng(cfg.rng_seed, 'shuffle')
    rows = []
    events = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for ibatch, start in enumerate(range(0, n, cfg.batch_size)):
            index = order[start:start + cfg.batch_size]
            x = train_set.features[index]
            y = train_set.labels[index]
            activations, scores = forward(net, x)
            batch_loss = loss(scores, y)
            if not np.isfinite(batch_loss):
                raise DivergenceError(
                    "loss became {} at epoch {}, batch {}".format(
                        batch_loss, epoch, ibatch), epoch, ibatch,
                    metrics.trace_frame(rows), events)
            total += batch_loss * len(index)
            gw, gb = backward(net, x, y, activations)
            for w, g in zip(net.weights, gw):
                w -= cfg.learning_rate * g
            for b, g in zip(net.biases, gb):
                b -= cfg.learning_rate * g
        for hook in hooks:
            events.extend(hook(net, epoch) or [])
        acc, auc = evaluate(net, data.validation)
        rows.append({
            'epoch': epoch,
            'train_loss': total / n,
            'val_accuracy': acc,
            'val_auc': auc,
            'sparsity': net.mask.disabled_count / net.mask.total_count,
        })
    return TrainResult(metrics.trace_frame(rows), events)
