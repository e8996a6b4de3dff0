"""
Structural mutation of masked networks.

All changes of a network's connectivity happen here: the random-walk
sub-network initialisation, constant-sparsity magnitude pruning, random
and strategic synthesis of new connections, and the per-epoch scheduler
that orders them (prune first, then synthesize).

The sparsity threshold S is a target: pruning only removes connections
while the enabled count is above the budget floor((1 - S) * total), and
synthesis only adds connections while it is below.
"""

from __future__ import division

from enum import Enum
import math
import warnings

import numpy as np
from scipy.stats import norm

from synprune.network import ConnectionMask
from synprune.utils import seeded_rng


class Strategy(str, Enum):
    DENSE = 'dense'
    PRUNE_ONLY = 'prune_only'
    SUBNET_ONLY = 'subnet_only'
    RANDOM_SYNTH = 'random_synth'
    STRATEGIC_SYNTH = 'strategic_synth'
    RANDOM_SYNTH_PRUNE = 'random_synth_prune'
    STRATEGIC_SYNTH_PRUNE = 'strategic_synth_prune'

    @property
    def prunes(self):
        return self in (Strategy.PRUNE_ONLY, Strategy.RANDOM_SYNTH_PRUNE,
                        Strategy.STRATEGIC_SYNTH_PRUNE)

    @property
    def synthesis(self):
        """'random', 'strategic' or None."""
        if self in (Strategy.RANDOM_SYNTH, Strategy.RANDOM_SYNTH_PRUNE):
            return 'random'
        if self in (Strategy.STRATEGIC_SYNTH, Strategy.STRATEGIC_SYNTH_PRUNE):
            return 'strategic'
        return None

    @property
    def starts_dense(self):
        return self in (Strategy.DENSE, Strategy.PRUNE_ONLY)

    @property
    def threshold_independent(self):
        return self in (Strategy.DENSE, Strategy.SUBNET_ONLY)


class FocalJuncture(object):
    """An enabled connection among the top-N by |weight|."""

    __slots__ = ('layer_pair', 'origin', 'terminus', 'magnitude')

    def __init__(self, layer_pair, origin, terminus, magnitude):
        self.layer_pair = layer_pair
        self.origin = origin
        self.terminus = terminus
        self.magnitude = magnitude

    @property
    def connection(self):
        return (self.layer_pair, self.origin, self.terminus)

    def __eq__(self, other):
        return (isinstance(other, FocalJuncture) and
                self.connection == other.connection and
                self.magnitude == other.magnitude)

    def __repr__(self):
        return "FocalJuncture(%d, %d, %d, %r)" % (
            self.layer_pair, self.origin, self.terminus, self.magnitude)


class SynthesisPolicy(object):
    """How new connections are chosen and initialised.

    Parameters
    ----------
    mode : {'random', 'strategic'}
    n_targets : int
        Number of focal junctures ranked per strategic cycle.
    max_resamples : int
        Extra terminus draws allowed when the drawn connection exists.
    init_strategy : {'copy', 'uniform'} or None
        Weight of a new connection: the focal juncture's weight ('copy')
        or a draw from the dense-init range ('uniform').  None picks
        'copy' for strategic and 'uniform' for random synthesis.
    random_count : int
        Connections added per cycle by random synthesis.
    """

    def __init__(self, mode='strategic', n_targets=4, max_resamples=10,
                 init_strategy=None, random_count=4):
        if mode not in ('random', 'strategic'):
            raise ValueError("synthesis mode '%s' is not a valid one" % mode)
        if init_strategy is None:
            init_strategy = 'copy' if mode == 'strategic' else 'uniform'
        if init_strategy not in ('copy', 'uniform'):
            raise ValueError("init_strategy '%s' is not a valid one"
                             % init_strategy)
        if mode == 'random' and init_strategy == 'copy':
            raise ValueError("random synthesis has no juncture to copy from")
        for name, value in (('n_targets', n_targets),
                            ('max_resamples', max_resamples),
                            ('random_count', random_count)):
            if int(value) < 1:
                raise ValueError("%s must be a positive integer" % name)
        self.mode = mode
        self.n_targets = int(n_targets)
        self.max_resamples = int(max_resamples)
        self.init_strategy = init_strategy
        self.random_count = int(random_count)

    def __repr__(self):
        return ("SynthesisPolicy(mode=%r, n_targets=%d, max_resamples=%d, "
                "init_strategy=%r, random_count=%d)" % (
                    self.mode, self.n_targets, self.max_resamples,
                    self.init_strategy, self.random_count))


class CompressionSchedule(object):
    """When and how structure changes during training.

    Synthesis runs on epochs that are multiples of `cycle_period`; pruning
    runs on epochs where ``(epoch - prune_offset) % prune_period == 0``
    (by default the same epochs).  Nothing changes once
    ``epoch >= total_epochs - stop_delay``.
    """

    def __init__(self, strategy, sparsity_threshold, total_epochs,
                 cycle_period=1, stop_delay=0, policy=None,
                 prune_period=None, prune_offset=0):
        self.strategy = Strategy(strategy)
        self.sparsity_threshold = float(sparsity_threshold)
        self.total_epochs = int(total_epochs)
        self.cycle_period = int(cycle_period)
        self.stop_delay = int(stop_delay)
        self.prune_period = int(prune_period or cycle_period)
        self.prune_offset = int(prune_offset)
        if not 0 <= self.sparsity_threshold <= 1:
            raise ValueError("sparsity_threshold must be in [0, 1]")
        if self.cycle_period < 1 or self.prune_period < 1:
            raise ValueError("cycle periods must be at least 1 epoch")
        if self.stop_delay < 0:
            raise ValueError("stop_delay must be non-negative")
        if policy is None and self.strategy.synthesis:
            policy = SynthesisPolicy(self.strategy.synthesis)
        if policy is not None and self.strategy.synthesis and \
                policy.mode != self.strategy.synthesis:
            raise ValueError("strategy %s needs a %s synthesis policy" % (
                self.strategy.value, self.strategy.synthesis))
        self.policy = policy

    def frozen(self, epoch):
        return epoch >= self.total_epochs - self.stop_delay

    def prune_due(self, epoch):
        return (self.strategy.prunes and
                (epoch - self.prune_offset) % self.prune_period == 0)

    def synthesis_due(self, epoch):
        return (self.strategy.synthesis is not None and
                epoch % self.cycle_period == 0)

    def __repr__(self):
        return ("CompressionSchedule(%s, S=%r, total_epochs=%d, "
                "cycle_period=%d, stop_delay=%d)" % (
                    self.strategy.value, self.sparsity_threshold,
                    self.total_epochs, self.cycle_period, self.stop_delay))


class StructuralEvent(object):
    """Connections disabled ('prune') or enabled ('synthesize') at an epoch."""

    def __init__(self, epoch, kind, connections, sparsity_after):
        if kind not in ('prune', 'synthesize'):
            raise ValueError("event kind '%s' is not a valid one" % kind)
        self.epoch = int(epoch)
        self.kind = kind
        self.connections = [tuple(int(c) for c in conn)
                            for conn in connections]
        self.sparsity_after = float(sparsity_after)

    def __len__(self):
        return len(self.connections)

    def __eq__(self, other):
        return (isinstance(other, StructuralEvent) and
                (self.epoch, self.kind, self.connections,
                 self.sparsity_after) ==
                (other.epoch, other.kind, other.connections,
                 other.sparsity_after))

    def __repr__(self):
        return "StructuralEvent(epoch=%d, %s, %d connections, sparsity=%.4f)" % (
            self.epoch, self.kind, len(self.connections), self.sparsity_after)


def sparsity(mask):
    """Fraction of disabled connections."""
    return mask.disabled_count / mask.total_count


def enabled_budget(S, total):
    """Maximum enabled connections allowed at sparsity threshold `S`."""
    if not 0 <= S <= 1:
        raise ValueError("sparsity threshold must be in [0, 1], got %r" % S)
    # rounding guards against (1 - S) * total landing just below an integer
    return int(math.floor(round((1.0 - S) * total, 9)))


def init_subnetwork_mask(arch, seed):
    """One uniformly random walk input -> output per input neuron.

    Every connection on some walk is enabled; shared walk edges are kept
    once.  Every input therefore reaches the output.
    """
    rng = seeded_rng(seed, 'walk')
    mask = ConnectionMask.full(arch, False)
    widths = arch.layer_widths
    for origin in range(widths[0]):
        node = origin
        for k in range(arch.n_pairs):
            nxt = int(rng.integers(widths[k + 1]))
            mask.layers[k][node, nxt] = True
            node = nxt
    return mask


def _ranked(net):
    """Enabled connections sorted by |weight| descending.

    Ties keep lexicographic (layer_pair, origin, terminus) order, since the
    candidates are listed lexicographically and the sort is stable.
    """
    coords = []
    mags = []
    for k, (w, m) in enumerate(zip(net.weights, net.mask.layers)):
        origins, termini = np.nonzero(m)
        coords.extend((k, int(i), int(j)) for i, j in zip(origins, termini))
        mags.append(np.abs(w[origins, termini]))
    mags = np.concatenate(mags) if mags else np.zeros(0)
    order = np.argsort(-mags, kind='stable')
    return [coords[i] for i in order], mags[order]


def _event(net, epoch, kind, connections):
    return StructuralEvent(epoch, kind, connections, sparsity(net.mask))


def prune_constant(net, S, epoch=0):
    """Disable the smallest-|weight| connections down to the budget of `S`.

    The ranking is global across layer pairs.  When the network is already
    within budget the returned event is empty and nothing changes.
    """
    budget = enabled_budget(S, net.mask.total_count)
    if net.mask.enabled_count <= budget:
        return _event(net, epoch, 'prune', [])
    coords, _ = _ranked(net)
    removed = sorted(coords[budget:])
    for k, i, j in removed:
        net.mask.layers[k][i, j] = False
        net.weights[k][i, j] = 0.0
    return _event(net, epoch, 'prune', removed)


def rank_focal_junctures(net, n):
    """The min(n, enabled) enabled connections of largest |weight|."""
    if n < 1:
        raise ValueError("the number of focal junctures must be at least 1")
    coords, mags = _ranked(net)
    if not coords:
        raise ValueError("the network has no enabled connection to rank")
    return [FocalJuncture(k, i, j, float(mag))
            for (k, i, j), mag in zip(coords[:n], mags[:n])]


def gaussian_terminus_density(beta, width):
    """Standard normal density of |x - beta| for x in 0..width-1."""
    if width < 1:
        raise ValueError("terminus layer width must be at least 1")
    if beta < 0:
        raise ValueError("origin index must be non-negative")
    x = np.arange(width)
    return norm.pdf(np.abs(x - beta), loc=0.0, scale=1.0)


def gaussian_terminus_distribution(beta, width):
    """Probabilities of each terminus index, peaked at the origin index."""
    raw = gaussian_terminus_density(beta, width)
    total = raw.sum()
    if total == 0:
        # every index is far beyond the origin: the nearest one takes it all
        warnings.warn("terminus density underflows for origin %d in a layer "
                      "of width %d" % (beta, width))
        raw = np.zeros(width)
        raw[min(int(beta), width - 1)] = 1.0
        total = 1.0
    return raw / total


def _uniform_weight(net, k, rng):
    limit = net.architecture.init_limit(k)
    return rng.uniform(-limit, limit)


def synthesize_strategic(net, policy, S, rng, epoch=0):
    """Grow new connections from the origins of the top focal junctures.

    For each juncture in rank order, while the budget allows, a terminus
    in the next layer is drawn from the Gaussian over index distance to the
    juncture's origin.  A drawn connection that already exists is redrawn
    up to `policy.max_resamples` times before moving to the next juncture.
    """
    budget = enabled_budget(S, net.mask.total_count)
    if net.mask.enabled_count >= budget or net.mask.enabled_count == 0:
        return _event(net, epoch, 'synthesize', [])
    widths = net.architecture.layer_widths
    added = []
    for juncture in rank_focal_junctures(net, policy.n_targets):
        if net.mask.enabled_count >= budget:
            break
        k, i = juncture.layer_pair, juncture.origin
        probs = gaussian_terminus_distribution(i, widths[k + 1])
        layer = net.mask.layers[k]
        for _ in range(policy.max_resamples + 1):
            x = int(rng.choice(widths[k + 1], p=probs))
            if layer[i, x]:
                continue
            if policy.init_strategy == 'copy':
                value = net.weights[k][i, juncture.terminus]
            else:
                value = _uniform_weight(net, k, rng)
            layer[i, x] = True
            net.weights[k][i, x] = value
            added.append((k, i, x))
            break
    return _event(net, epoch, 'synthesize', added)


def synthesize_random(net, count, S, rng, epoch=0):
    """Enable up to `count` uniformly chosen disabled connections.

    New weights are drawn from the layer's dense-initialisation range and
    the budget of `S` is never exceeded.
    """
    budget = enabled_budget(S, net.mask.total_count)
    headroom = budget - net.mask.enabled_count
    candidates = []
    for k, m in enumerate(net.mask.layers):
        origins, termini = np.nonzero(~m)
        candidates.extend((k, int(i), int(j)) for i, j in zip(origins, termini))
    nnew = min(int(count), headroom, len(candidates))
    if nnew <= 0:
        return _event(net, epoch, 'synthesize', [])
    picks = rng.choice(len(candidates), size=nnew, replace=False)
    added = []
    for p in picks:
        k, i, j = candidates[p]
        net.mask.layers[k][i, j] = True
        net.weights[k][i, j] = _uniform_weight(net, k, rng)
        added.append((k, i, j))
    return _event(net, epoch, 'synthesize', added)


def apply_cycle(net, schedule, epoch, rng):
    """Run the structural operations due at `epoch`, prune before synthesize.

    Every operation that is due contributes one event, even when it had
    nothing to do.
    """
    events = []
    if schedule.frozen(epoch):
        return events
    S = schedule.sparsity_threshold
    if schedule.prune_due(epoch):
        events.append(prune_constant(net, S, epoch))
    if schedule.synthesis_due(epoch):
        policy = schedule.policy
        if policy.mode == 'strategic':
            events.append(synthesize_strategic(net, policy, S, rng, epoch))
        else:
            events.append(synthesize_random(net, policy.random_count, S, rng,
                                            epoch))
    return events
