# General utilities live here

import sys

import numpy as np


# Independent random streams derived from one integer seed.  The stream
# number is mixed into the SeedSequence so that, e.g., the walk mask of a
# seed does not depend on how many numbers the dense initialisation drew.
STREAMS = {
    'dense': 0,
    'walk': 1,
    'shuffle': 2,
    'cycle': 3,
}


def seeded_rng(seed, stream):
    """Return a numpy Generator for `seed` on the named `stream`."""
    try:
        stream_id = STREAMS[stream]
    except KeyError:
        raise KeyError("random stream {} not known".format(stream))
    return np.random.default_rng([int(seed), stream_id])


class Structure(dict):
    """Basically a dictionary whose keys are attributes too."""

    def __getattr__(self, attr):
        try:
            return self[attr]
        except KeyError:
            raise AttributeError(attr)

    def __setattr__(self, attr, value):
        self[attr] = value


def parse_list(text, kind=float):
    """Parse a comma separated list, e.g. '0.8,0.9' or '27,16,8,1'.

    Integer ranges may be written as 'start:stop' (stop excluded), so the
    default seed list can be given as '0:50'.
    """
    if isinstance(text, (list, tuple)):
        return [kind(v) for v in text]
    if not isinstance(text, str):
        return [kind(text)]
    values = []
    for item in text.split(','):
        item = item.strip()
        if not item:
            continue
        if ':' in item:
            start, stop = item.split(':')
            values.extend(range(int(start), int(stop)))
        else:
            values.append(kind(item))
    return values


def threshold_key(threshold):
    """ label used for a threshold in run names and tables """
    if threshold is None:
        return 'any'
    return '%.4g' % threshold


def _shout(string, verbose=True):
    """ write a string to stdout if 'verbose' flag given """
    w = sys.stdout.write
    if string[-1] != '\n':
        string += '\n'
    if verbose:
        w(string)
