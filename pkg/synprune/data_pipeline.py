"""
Loading and encoding of the heart-disease table.

DESCRIPTION
===========

    The CSV has 13 raw fields plus the `target` label.  They are encoded
    into 27 model inputs with a fixed column order, so that neuron indices
    mean the same thing in every run:

    ============   =======   =========================================
    block          width     fields
    ============   =======   =========================================
    continuous     5         age, trestbps, chol, thalach, oldpeak
                             (z-scored with training statistics)
    binary         3         sex, fbs, exang (passed as 0/1)
    one-hot        19        cp(4), restecg(3), slope(3), ca(5), thal(4)
    ============   =======   =========================================

"""

from collections import OrderedDict, namedtuple
import os

import numpy as np
import pandas as pd


COLUMNS = ('age', 'sex', 'cp', 'trestbps', 'chol', 'fbs', 'restecg',
           'thalach', 'exang', 'oldpeak', 'slope', 'ca', 'thal', 'target')
CONTINUOUS = ('age', 'trestbps', 'chol', 'thalach', 'oldpeak')
BINARY = ('sex', 'fbs', 'exang')
CATEGORICAL = OrderedDict([
    ('cp', 4), ('restecg', 3), ('slope', 3), ('ca', 5), ('thal', 4)])
# continuous fields that must be strictly positive (oldpeak may be negative)
POSITIVE = ('age', 'trestbps', 'chol', 'thalach')

FEATURE_NAMES = (
    list(CONTINUOUS) + list(BINARY) +
    ['%s_%d' % (name, v) for name, n in CATEGORICAL.items()
     for v in range(n)])
N_FEATURES = len(FEATURE_NAMES)   # 27

# widest line read from a CSV; anything wider is rejected as well
MAX_FIELDS = 64


RawRecord = namedtuple('RawRecord', COLUMNS)


class RecordError(ValueError):
    """A value of the CSV cannot be parsed or is out of its domain."""

    def __init__(self, message, row=None, column=None):
        super(RecordError, self).__init__(message)
        self.row = row
        self.column = column


def _check_value(name, value, row):
    """Range-check one parsed value and return it with its proper type."""
    if not np.isfinite(value):
        raise RecordError(
            "row {}, column '{}': value {!r} is not a finite number".format(
                row, name, value), row, name)
    if name in CONTINUOUS:
        if name in POSITIVE and value <= 0:
            raise RecordError(
                "row {}, column '{}': value {!r} out of range (must be "
                "positive)".format(row, name, value), row, name)
        return float(value)
    if name in CATEGORICAL:
        domain = range(CATEGORICAL[name])
    else:
        domain = (0, 1)  # binary fields and the label
    if value != int(value) or int(value) not in domain:
        raise RecordError(
            "row {}, column '{}': value {!r} out of range (allowed: {})".format(
                row, name, value, ', '.join(str(v) for v in domain)),
            row, name)
    return int(value)


def load_csv(path):
    """Read the heart-disease CSV at `path` into a list of `RawRecord`.

    The header must hold exactly the 14 expected column names (any order)
    and every data row exactly 14 fields.  Rows are numbered from 1 (the
    first data row) in error messages.
    """
    if not os.path.isfile(path):
        raise IOError("No such file: {0}".format(path))
    try:
        # the header is read as a data row so that no row can have its
        # surplus fields taken as an index or cut away
        df = pd.read_csv(path, header=None, names=range(MAX_FIELDS),
                         index_col=False, dtype=str, keep_default_na=False,
                         skipinitialspace=True, encoding='utf-8')
    except pd.errors.EmptyDataError:
        df = pd.DataFrame()
    except pd.errors.ParserError as e:
        raise RecordError("file {} is malformed: {}".format(path, e))
    if len(df) == 0:
        raise RecordError("file {} has no header row".format(path))
    # fields absent from a line are NaN, empty ones are ''
    nfields = df.notnull().sum(axis=1).values

    columns = [c.strip() for c in df.iloc[0, :nfields[0]]]
    unknown = [c for c in columns if c not in COLUMNS]
    if unknown:
        raise RecordError("unknown column(s) {} in {}".format(unknown, path),
                          column=unknown[0])
    missing = [c for c in COLUMNS if c not in columns]
    if missing:
        raise RecordError("missing column(s) {} in {}".format(missing, path),
                          column=missing[0])
    if len(columns) != len(COLUMNS):
        raise RecordError("header of {} has {} fields, expected {}".format(
            path, len(columns), len(COLUMNS)))

    records = []
    for irow in range(1, len(df)):
        if nfields[irow] != len(COLUMNS):
            raise RecordError("row {}: {} fields, expected {}".format(
                irow, nfields[irow], len(COLUMNS)), irow)
        values = {}
        for name, text in zip(columns, df.iloc[irow, :len(COLUMNS)]):
            try:
                value = float(text)
            except (TypeError, ValueError):
                raise RecordError(
                    "row {}, column '{}': cannot parse {!r}".format(
                        irow, name, text), irow, name)
            values[name] = _check_value(name, value, irow)
        records.append(RawRecord(**values))
    return records


class Standardizer(object):
    """Mean / standard deviation of the continuous fields.

    Statistics are fitted on the training records and reused verbatim for
    the validation records.  The population deviation (ddof=0) is used so
    that standardised training columns have unit variance.
    """

    def __init__(self, mean, std):
        self.mean = np.asarray(mean, dtype=float)
        self.std = np.asarray(std, dtype=float)
        if self.mean.shape != (len(CONTINUOUS),) or \
                self.std.shape != (len(CONTINUOUS),):
            raise ValueError("standardizer needs {} statistics".format(
                len(CONTINUOUS)))
        for name, s in zip(CONTINUOUS, self.std):
            if not s > 0:
                raise ValueError(
                    "zero variance in continuous column '{}'".format(name))

    @classmethod
    def fit(cls, records):
        if len(records) == 0:
            raise ValueError("cannot fit a standardizer on no records")
        data = np.array([[getattr(r, c) for c in CONTINUOUS] for r in records],
                        dtype=float)
        return cls(data.mean(axis=0), data.std(axis=0))

    def transform(self, data):
        return (data - self.mean) / self.std

    def __repr__(self):
        return "Standardizer(mean=%r, std=%r)" % (
            self.mean.tolist(), self.std.tolist())


class EncodedDataset(object):
    """The 27-wide feature matrix, the labels and the feature names."""

    def __init__(self, features, labels, standardizer=None):
        self.features = np.asarray(features, dtype=float)
        self.labels = np.asarray(labels, dtype=float)
        self.feature_names = list(FEATURE_NAMES)
        self.standardizer = standardizer
        if self.features.ndim != 2 or self.features.shape[1] != N_FEATURES:
            raise ValueError("features must be {} wide, got shape {}".format(
                N_FEATURES, self.features.shape))
        if len(self.labels) != len(self.features):
            raise ValueError("features and labels differ in length")

    def __len__(self):
        return len(self.labels)

    def subset(self, index):
        return EncodedDataset(self.features[index], self.labels[index],
                              self.standardizer)

    def __repr__(self):
        return "EncodedDataset(samples=%d, positives=%d)" % (
            len(self), int(self.labels.sum()))


class SplitDataset(object):
    """Train / validation partition of an `EncodedDataset`."""

    def __init__(self, train, validation, split_seed, ratio=None):
        self.train = train
        self.validation = validation
        self.split_seed = split_seed
        self.ratio = ratio

    def __repr__(self):
        return "SplitDataset(train=%d, validation=%d, split_seed=%d)" % (
            len(self.train), len(self.validation), self.split_seed)


def encode(records, standardizer=None):
    """Encode `records` into an `EncodedDataset`.

    When `standardizer` is None the statistics are fitted on `records`
    themselves (this is what is done for the training portion).
    """
    if len(records) == 0:
        raise ValueError("cannot encode an empty record list")
    if standardizer is None:
        standardizer = Standardizer.fit(records)

    n = len(records)
    continuous = np.array([[getattr(r, c) for c in CONTINUOUS]
                           for r in records], dtype=float)
    blocks = [standardizer.transform(continuous),
              np.array([[getattr(r, c) for c in BINARY] for r in records],
                       dtype=float)]
    for name, width in CATEGORICAL.items():
        onehot = np.zeros((n, width))
        onehot[np.arange(n), [getattr(r, name) for r in records]] = 1.0
        blocks.append(onehot)
    labels = np.array([r.target for r in records], dtype=float)
    return EncodedDataset(np.hstack(blocks), labels, standardizer)


def decode_categories(ds):
    """Recover the categorical values from the one-hot blocks of `ds`.

    Returns a dict mapping each categorical field to an integer array.
    """
    out = OrderedDict()
    start = len(CONTINUOUS) + len(BINARY)
    for name, width in CATEGORICAL.items():
        block = ds.features[:, start:start + width]
        out[name] = block.argmax(axis=1)
        start += width
    return out


def _split_index(n, ratio, seed):
    if not 0 < ratio < 1:
        raise ValueError("split ratio must be in (0, 1), got {}".format(ratio))
    ntrain = int(np.floor(ratio * n))
    if ntrain == 0 or ntrain == n:
        raise ValueError(
            "degenerate split: {} samples with ratio {} leaves an empty "
            "side".format(n, ratio))
    order = np.random.default_rng(seed).permutation(n)
    return order[:ntrain], order[ntrain:]


def split(ds, ratio, seed):
    """Seeded shuffle of `ds`, then a prefix (train) / suffix split."""
    itrain, ival = _split_index(len(ds), ratio, seed)
    return SplitDataset(ds.subset(itrain), ds.subset(ival), seed, ratio)


def load_dataset(path, ratio=0.8, seed=0):
    """Read `path` and return a `SplitDataset` with train-fitted scaling.

    Membership is the same as ``split(encode(records), ratio, seed)``;
    only the continuous statistics differ (training portion only).
    """
    records = load_csv(path)
    itrain, ival = _split_index(len(records), ratio, seed)
    train = [records[i] for i in itrain]
    validation = [records[i] for i in ival]
    standardizer = Standardizer.fit(train)
    return SplitDataset(encode(train, standardizer),
                        encode(validation, standardizer), seed, ratio)
