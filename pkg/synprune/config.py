"""
Experiment configuration.

DESCRIPTION
===========

    Every option has a parser and a help text in `OPTIONS`.  Values are
    looked up in this order, the later ones winning:

    1. the packaged ``defaults.yml``;
    2. the YAML file named by the SYNPRUNE_CONFIG environment variable;
    3. a YAML file given explicitly (the ``--config`` flag);
    4. keyword overrides (the ``--<option>`` flags).

    Files are flat ``key: value`` mappings.  Lists may be YAML lists or
    comma separated strings; integer lists also take ``start:stop`` ranges::

      $ export SYNPRUNE_CONFIG=$HOME/experiments/quick.yml
      $ cat $HOME/experiments/quick.yml
      seeds: "0:5"
      epochs: 50

    The size of the worker pool of a sweep comes from SYNPRUNE_WORKERS
    (default 1, that is, serial).

"""

import os

import yaml

from synprune.compression import (
    CompressionSchedule, Strategy, SynthesisPolicy)
from synprune.network import Architecture, TrainConfig
from synprune.utils import parse_list


CONFIG_ENV = 'SYNPRUNE_CONFIG'
WORKERS_ENV = 'SYNPRUNE_WORKERS'
DEFAULTS_FILE = os.path.join(os.path.dirname(__file__), 'defaults.yml')


def _strategy(value):
    return Strategy(str(value).strip()).value


def _strategies(value):
    return [_strategy(v) for v in parse_list(value, str)]


def _int_list(value):
    return parse_list(value, int)


def _float_list(value):
    return parse_list(value, float)


def _optional_int(value):
    if value is None or str(value).lower() in ('', 'none', 'null'):
        return None
    return int(value)


def _choice(*allowed):
    def parse(value):
        if value is None or str(value).lower() in ('none', 'null'):
            value = None
        if value not in allowed:
            raise ValueError("value {!r} not in {}".format(value, allowed))
        return value
    return parse


OPTIONS = {
    'strategy': [_strategy, '''Strategy of a single run: dense, prune_only, subnet_only,
        random_synth, strategic_synth, random_synth_prune or strategic_synth_prune.'''],
    'strategies': [_strategies, '''Strategies of a sweep, comma separated.'''],
    'sparsity_threshold': [float, '''Sparsity threshold S of a single run. The enabled budget
        is floor((1 - S) * total connections).'''],
    'thresholds': [_float_list, '''Sparsity thresholds of a sweep, comma separated.'''],
    'seeds': [_int_list, '''Model seeds, comma separated or as a start:stop range. Each
        seed fixes the dense initialisation, the walk mask, the batch order and the
        structural draws of a run.'''],
    'layer_widths': [_int_list, '''Layer widths, input first and output last.'''],
    'learning_rate': [float, '''Step size of mini-batch gradient descent.'''],
    'epochs': [int, '''Number of training epochs.'''],
    'batch_size': [int, '''Mini-batch size.'''],
    'cycle_period': [int, '''Synthesis runs on epochs that are multiples of this.'''],
    'stop_delay': [int, '''Structure changes only at epochs before epochs - stop_delay (default 0).'''],
    'prune_period': [_optional_int, '''Pruning period in epochs; null means cycle_period.'''],
    'prune_offset': [int, '''Pruning runs on epochs where (epoch - prune_offset) is a
        multiple of prune_period.'''],
    'n_targets': [int, '''Focal junctures ranked per strategic synthesis cycle.'''],
    'random_count': [int, '''Connections added per random synthesis cycle.'''],
    'max_resamples': [int, '''Extra terminus draws when a strategic draw hits an existing
        connection.'''],
    'init_strategy': [_choice(None, 'copy', 'uniform'), '''Weight of a synthesized
        connection: copy (the focal juncture weight) or uniform (dense-init range).
        null picks copy for strategic and uniform for random synthesis.'''],
    'split_ratio': [float, '''Fraction of the records used for training.'''],
    'split_seed': [int, '''Seed of the train/validation permutation.'''],
    'dataset': [str, '''Path of the heart-disease CSV file.'''],
    'output_dir': [str, '''Directory receiving run results, tables and plots.'''],
    'similarity_metric': [_choice('jaccard', 'overlap'), '''Mask similarity metric:
        jaccard (intersection over union) or overlap (intersection over the smaller
        set).'''],
}


def _read_yaml(filename):
    try:
        with open(filename) as f:
            content = yaml.safe_load(f)
    except (IOError, OSError):
        raise IOError("Could not open config file: %s" % filename)
    if content is None:
        return {}
    if not isinstance(content, dict):
        raise ValueError("config file %s is not a key: value mapping" % filename)
    return content


_DEFAULTS = None


def packaged_defaults():
    global _DEFAULTS
    if _DEFAULTS is None:
        _DEFAULTS = _read_yaml(DEFAULTS_FILE)
    return dict(_DEFAULTS)


class ExperimentConfig(object):
    """All the settings of runs and sweeps.

    Options not given take the packaged defaults.  Use `help` to get the
    description of an option.
    """

    def __init__(self, **options):
        for key in options:
            if key not in OPTIONS:
                raise KeyError("option {} not known".format(key))
        values = packaged_defaults()
        values.update(options)
        for key, (parse, _) in OPTIONS.items():
            try:
                setattr(self, key, parse(values.get(key)))
            except (TypeError, ValueError) as e:
                raise ValueError("invalid value {!r} for option {}: {}".format(
                    values.get(key), key, e))
        self._validate()

    def _validate(self):
        for S in [self.sparsity_threshold] + self.thresholds:
            if not 0 <= S <= 1:
                raise ValueError("sparsity thresholds must be in [0, 1], "
                                 "got %r" % S)
        if not self.seeds:
            raise ValueError("at least one seed is needed")
        if not self.strategies:
            raise ValueError("at least one strategy is needed")
        if not 0 < self.split_ratio < 1:
            raise ValueError("split_ratio must be in (0, 1)")
        if self.stop_delay > self.epochs:
            raise ValueError("stop_delay ({}) exceeds the {} epochs".format(
                self.stop_delay, self.epochs))
        # the remaining checks live with the objects built from the options
        Architecture(self.layer_widths)
        self.train_config(self.seeds[0])

    @staticmethod
    def help(key):
        if key in OPTIONS:
            return ' '.join(OPTIONS[key][1].split())
        else:
            return 'no help available'

    @property
    def architecture(self):
        return Architecture(self.layer_widths)

    def train_config(self, seed):
        return TrainConfig(self.learning_rate, self.epochs, self.batch_size,
                           rng_seed=seed)

    def policy(self, strategy):
        mode = Strategy(strategy).synthesis
        if mode is None:
            return None
        init = self.init_strategy
        if mode == 'random' and init == 'copy':
            # only strategic synthesis has a juncture weight to copy
            init = None
        return SynthesisPolicy(mode, n_targets=self.n_targets,
                               max_resamples=self.max_resamples,
                               init_strategy=init,
                               random_count=self.random_count)

    def schedule(self, strategy=None, threshold=None):
        """CompressionSchedule of `strategy` at `threshold`.

        Both default to the single-run options.
        """
        strategy = Strategy(strategy or self.strategy)
        if threshold is None:
            threshold = self.sparsity_threshold
        return CompressionSchedule(strategy, threshold, self.epochs,
                                   cycle_period=self.cycle_period,
                                   stop_delay=self.stop_delay,
                                   policy=self.policy(strategy),
                                   prune_period=self.prune_period,
                                   prune_offset=self.prune_offset)

    def to_dict(self):
        return dict((key, getattr(self, key)) for key in sorted(OPTIONS))

    def replace(self, **changes):
        options = self.to_dict()
        options.update(changes)
        return ExperimentConfig(**options)

    def __eq__(self, other):
        return (isinstance(other, ExperimentConfig) and
                self.to_dict() == other.to_dict())

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return "ExperimentConfig(%s)" % ', '.join(
            '%s=%r' % kv for kv in self.to_dict().items())


def load_config(path=None, **overrides):
    """Merge the configuration layers into an `ExperimentConfig`.

    Overrides that are None are ignored, so parsed but absent CLI flags
    can be passed through as they are.
    """
    options = {}
    if CONFIG_ENV in os.environ:
        options.update(_read_yaml(os.environ[CONFIG_ENV]))
    if path is not None:
        options.update(_read_yaml(path))
    options.update((k, v) for k, v in overrides.items() if v is not None)
    return ExperimentConfig(**options)


def workers(value=None):
    """Worker pool size from `value` or else from SYNPRUNE_WORKERS."""
    if value is None:
        value = os.environ.get(WORKERS_ENV, 1)
    try:
        n = int(value)
    except ValueError:
        raise ValueError("%s must be an integer, got %r" % (WORKERS_ENV, value))
    if n < 1:
        raise ValueError("the number of workers must be at least 1")
    return n


def add_arguments(parser):
    """Add ``--config`` plus a ``--<option>`` flag per option to `parser`."""
    parser.add_argument(
        "--config", default=None,
        help="YAML file with option values (overrides %s)." % CONFIG_ENV)
    for key in sorted(OPTIONS):
        # argparse formats help with %, so escape it
        parser.add_argument("--" + key, default=None,
                            help=ExperimentConfig.help(key).replace('%', '%%'))


def config_from_args(args):
    """ExperimentConfig out of argparse results built by `add_arguments`."""
    overrides = dict((key, getattr(args, key, None)) for key in OPTIONS)
    return load_config(args.config, **overrides)
