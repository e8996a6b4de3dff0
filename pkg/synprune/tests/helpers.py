"""
Synthetic data and small networks shared by the tests.

The heart-disease table is not shipped, so tests build records of the same
shape whose label depends on a few of the fields.
"""

import numpy as np
import pandas as pd

from synprune.data_pipeline import COLUMNS
from synprune.network import Architecture, ConnectionMask, MaskedNetwork


def synthetic_frame(n=120, seed=0):
    """DataFrame with the 14 heart-disease columns and valid values."""
    rng = np.random.default_rng(seed)
    target = rng.integers(0, 2, n)
    frame = pd.DataFrame({
        'age': rng.integers(29, 78, n),
        'sex': rng.integers(0, 2, n),
        'cp': np.where(target == 1, rng.integers(1, 4, n),
                       rng.integers(0, 2, n)),
        'trestbps': rng.integers(94, 200, n),
        'chol': rng.integers(126, 564, n),
        'fbs': rng.integers(0, 2, n),
        'restecg': rng.integers(0, 3, n),
        'thalach': 150 + 20 * target + rng.integers(-30, 30, n),
        'exang': (1 - target) * rng.integers(0, 2, n),
        'oldpeak': np.round(rng.uniform(0, 4, n) * (1.5 - target), 1),
        'slope': rng.integers(0, 3, n),
        'ca': rng.integers(0, 5, n),
        'thal': rng.integers(0, 4, n),
        'target': target,
    }, columns=list(COLUMNS))
    return frame


def write_synthetic_csv(path, n=120, seed=0):
    synthetic_frame(n, seed).to_csv(str(path), index=False)
    return str(path)


def random_network(widths, rng, density=0.5, bias_scale=0.5):
    """Masked network with random weights, biases and mask."""
    arch = Architecture(widths)
    layers = [rng.random(shape) < density for shape in arch.shapes]
    weights = [rng.normal(size=shape) for shape in arch.shapes]
    biases = [bias_scale * rng.normal(size=w) for w in widths[1:]]
    net = MaskedNetwork(arch, weights, biases, ConnectionMask(layers))
    return net.apply_mask()


def random_mask(widths, rng, density=0.5):
    arch = Architecture(widths)
    return ConnectionMask([rng.random(shape) < density
                           for shape in arch.shapes])


def all_paths(widths):
    """Every input -> output path as a tuple of neuron indices."""
    paths = [(i,) for i in range(widths[0])]
    for w in widths[1:]:
        paths = [p + (j,) for p in paths for j in range(w)]
    return paths


def redundant_by_enumeration(mask, widths):
    """Enabled connections on no fully enabled input -> output path."""
    on_path = set()
    for path in all_paths(widths):
        edges = [(k, path[k], path[k + 1]) for k in range(len(path) - 1)]
        if all(mask.layers[k][i, j] for k, i, j in edges):
            on_path.update(edges)
    return sorted(c for c in mask.connections() if c not in on_path)
