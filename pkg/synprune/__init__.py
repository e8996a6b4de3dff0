WELCOME = """
DESCRIPTION
===========

    synprune: sparse feedforward networks that rewire while they train.

    Networks start either dense or from a random-walk sub-network and,
    during training, have their smallest weights pruned to a constant
    sparsity budget and/or new connections synthesized, at random or
    near their strongest existing connections.  The harness sweeps these
    strategies over sparsity thresholds and seeds and summarises the
    results.


EXAMPLES
========

    Train one network from the command line::

      $ synprune train --dataset heart.csv --strategy strategic_synth \\
            --sparsity_threshold 0.9 --seed 0

    or from Python::

      >>> import synprune as sp
      >>> cfg = sp.load_config(dataset='heart.csv', seeds='0:5')
      >>> result = sp.run_experiment(cfg, seed=0)
      >>> result.summary['final_val_accuracy']

    Have a look at the tests in synprune/tests for more hints on how to use
    the package.

LICENSE
=======

    This package follows creative commons usage.

"""

import os
from .version import __version__

this_dir = __path__[0]


def _get_git_description(path_):
    """ Get the output of git describe when executed in a given path. """
    import subprocess

    try:
        out = subprocess.check_output(
            ["git", "describe", "--always", "--dirty"], cwd=path_,
            stderr=subprocess.STDOUT).strip()
        return out.decode('ascii', 'replace')
    except OSError:  # in case git wasn't found
        pass
    except subprocess.CalledProcessError:  # not in a git repo
        pass


_git_description = _get_git_description(this_dir)


def print_versions():
    """Print all the versions for packages that synprune relies on."""
    import numpy
    import pandas
    import scipy
    import sys
    import xarray
    print("-=" * 38)
    print("synprune version:  %s" % __version__)
    if _git_description:
        print("synprune git:      %s" % _git_description)
    print("NumPy version:     %s" % numpy.__version__)
    print("SciPy version:     %s" % scipy.__version__)
    print("pandas version:    %s" % pandas.__version__)
    print("xarray version:    %s" % xarray.__version__)
    print("Python version:    %s" % sys.version)
    if os.name == "posix":
        (sysname, nodename, release, version, machine) = os.uname()
        print("Platform:          %s-%s" % (sys.platform, machine))
    print("Byte-ordering:     %s" % sys.byteorder)
    print("-=" * 38)


# Import the public functions here
from .analysis import (
    mask_similarity, similarity_matrix, find_redundant, dag_prune,
    dag_prune_network)
from .compression import (
    Strategy, SynthesisPolicy, CompressionSchedule, StructuralEvent,
    FocalJuncture, init_subnetwork_mask, prune_constant, rank_focal_junctures,
    gaussian_terminus_distribution, synthesize_strategic, synthesize_random,
    apply_cycle, sparsity, enabled_budget)
from .config import ExperimentConfig, load_config
from .data_pipeline import (
    load_csv, encode, split, load_dataset, decode_categories, RecordError)
from .formats import read_network, write_network
from .harness import (
    RunResult, run_experiment, sweep, report, similarity_report, read_run,
    write_run)
from .metrics import accuracy, roc_auc, boxplot_summary
from .network import (
    Architecture, ConnectionMask, MaskedNetwork, TrainConfig, DivergenceError,
    init_dense, forward, backward, loss, train, evaluate)
from .tests.all import test
from .utils import Structure
