# -*- coding: utf-8 -*-

## --------------------------------------------------------------------
## IMWA - Long-tailed datasets and per-model loaders
##
## License   : GPL Version 2
## --------------------------------------------------------------------

from __future__ import absolute_import, division

import csv
import io
import math
import mimetypes
import os
from logging import debug, info, warning

import numpy as np

from .Exceptions import DatasetError, ParameterError
from .Network import Batch

__all__ = ["LongTailSpec", "Dataset", "LoaderState", "class_counts",
           "generate_gaussian_mixture", "ingest_csv", "export_csv",
           "new_loader", "next_batch", "DEFAULT_TEST_PER_CLASS"]

DEFAULT_TEST_PER_CLASS = 200

try:
    import magic
    try:
        ## https://github.com/ahupp/python-magic
        magic_ = magic.Magic(mime=True)
        def mime_magic_file(file):
            return magic_.from_file(file)
    except (TypeError, AttributeError):
        ## file-5.11 built-in python bindings
        magic_ = magic.open(magic.MAGIC_MIME_TYPE)
        magic_.load()
        def mime_magic_file(file):
            return magic_.file(file)

except (ImportError, OSError) as e:
    error_str = str(e)
    if 'magic' in error_str:
        magic_message = "Module python-magic is not available."
    else:
        magic_message = "Module python-magic can't be used (%s)." % error_str
    magic_message += " Guessing CSV file types based on file extensions."
    magic_warned = False
    def mime_magic_file(file):
        global magic_warned
        if (not magic_warned):
            warning(magic_message)
            magic_warned = True
        return mimetypes.guess_type(file)[0] or "text/plain"

## libmagic reports CSV files under several names depending on version
TEXT_MIME_TYPES = ("application/csv", "application/x-csv")


class LongTailSpec(object):
    """C classes whose counts decay from head_count by the imbalance ratio"""

    def __init__(self, num_classes, head_count, imbalance_ratio):
        if int(num_classes) != num_classes or num_classes < 2:
            raise ParameterError("Number of classes must be an integer >= 2, not %r" % num_classes)
        if int(head_count) != head_count or head_count < 1:
            raise ParameterError("Head class count must be an integer >= 1, not %r" % head_count)
        if not (imbalance_ratio >= 1.0) or math.isinf(imbalance_ratio):
            raise ParameterError("Imbalance ratio must be a finite value >= 1, not %r" % imbalance_ratio)
        self.num_classes = int(num_classes)
        self.head_count = int(head_count)
        self.imbalance_ratio = float(imbalance_ratio)

    def with_ratio(self, imbalance_ratio):
        return LongTailSpec(self.num_classes, self.head_count, imbalance_ratio)

    def __repr__(self):
        return "<LongTailSpec C=%d n1=%d gamma=%g>" % (self.num_classes, self.head_count, self.imbalance_ratio)


def class_counts(spec):
    """
    n_c = round(n_1 * gamma ** (-(c - 1) / (C - 1))) for c = 1..C,
    rounding half away from zero.
    """
    counts = []
    for c in range(spec.num_classes):
        exact = spec.head_count * spec.imbalance_ratio ** (-c / (spec.num_classes - 1))
        counts.append(int(math.floor(exact + 0.5)))
    if counts[-1] < 1:
        raise DatasetError("Class %d gets zero samples with n1=%d and gamma=%g; "
                           "use a larger head count or a smaller imbalance ratio"
                           % (spec.num_classes - 1, spec.head_count, spec.imbalance_ratio))
    return counts


class Dataset(object):
    """Immutable labelled feature matrix"""

    def __init__(self, features, labels, num_classes=None):
        features = np.array(features, dtype=np.float64)
        labels = np.array(labels, dtype=np.int64).ravel()
        if features.ndim != 2:
            raise DatasetError("Features must be a 2-D matrix, got shape %r" % (features.shape,))
        if features.shape[0] != labels.shape[0]:
            raise DatasetError("%d feature rows but %d labels" % (features.shape[0], labels.shape[0]))
        if labels.size and labels.min() < 0:
            raise DatasetError("Labels must be non-negative")
        if num_classes is None:
            num_classes = int(labels.max()) + 1 if labels.size else 0
        if labels.size and labels.max() >= num_classes:
            raise DatasetError("Label %d out of range for %d classes" % (labels.max(), num_classes))
        features.flags.writeable = False
        labels.flags.writeable = False
        self.features = features
        self.labels = labels
        self.num_classes = int(num_classes)
        self.class_counts = [int(n) for n in np.bincount(labels, minlength=self.num_classes)]

    def __len__(self):
        return self.labels.shape[0]

    @property
    def feature_dim(self):
        return self.features.shape[1]

    def batch(self, indices):
        return Batch(self.features[indices], self.labels[indices])

    def as_batch(self):
        return Batch(self.features, self.labels)

    def __repr__(self):
        return "<Dataset %d samples, d=%d, counts=%s>" % (len(self), self.feature_dim, self.class_counts)


def _place_means(num_classes, d, class_sep, rng):
    ## Random directions on a sphere of radius class_sep, stretched until
    ## the closest pair of means is class_sep apart.
    means = rng.standard_normal((num_classes, d))
    means /= np.linalg.norm(means, axis=1, keepdims=True)
    means *= class_sep
    diffs = means[:, None, :] - means[None, :, :]
    distances = np.sqrt((diffs ** 2).sum(axis=2))
    closest = distances[np.triu_indices(num_classes, k=1)].min()
    if closest < class_sep:
        means *= class_sep / closest
    return means


def generate_gaussian_mixture(spec, d, class_sep, seed, test_per_class=DEFAULT_TEST_PER_CLASS):
    """
    Returns (train, test): a long-tailed training set and a balanced test
    set drawn from the same unit-variance Gaussians. The means, training
    samples and test samples use independent child streams of 'seed'.
    """
    if int(d) != d or d < 2:
        raise ParameterError("Feature dimension must be an integer >= 2, not %r" % d)
    if not class_sep > 0:
        raise ParameterError("Class separation must be > 0, not %r" % class_sep)
    if test_per_class < 1:
        raise ParameterError("Test set needs at least one sample per class")
    counts = class_counts(spec)
    means_seq, train_seq, test_seq = np.random.SeedSequence(int(seed)).spawn(3)
    means = _place_means(spec.num_classes, int(d), float(class_sep), np.random.default_rng(means_seq))

    def draw(rng, per_class):
        features = []
        labels = []
        for c, count in enumerate(per_class):
            features.append(means[c] + rng.standard_normal((count, int(d))))
            labels.append(np.full(count, c, dtype=np.int64))
        return Dataset(np.vstack(features), np.concatenate(labels), spec.num_classes)

    train = draw(np.random.default_rng(train_seq), counts)
    test = draw(np.random.default_rng(test_seq), [int(test_per_class)] * spec.num_classes)
    debug("Generated %r and %r" % (train, test))
    return train, test


def _resolve_label_column(header, label_column, width):
    if label_column is None:
        return width - 1
    try:
        index = int(label_column)
    except ValueError:
        if header is None or label_column not in header:
            raise DatasetError("Label column '%s' not found in header" % label_column)
        return header.index(label_column)
    if index < 0:
        index += width
    if not 0 <= index < width:
        raise DatasetError("Label column %s out of range for %d columns" % (label_column, width))
    return index


def _looks_like_header(row):
    for cell in row:
        try:
            float(cell)
        except ValueError:
            return True
    return False


def ingest_csv(path, label_column=None, has_header=None):
    """
    Read a comma-separated file of numeric features plus one integer label
    column (default: the last one). 'has_header' None means autodetect.
    """
    if not os.path.isfile(path):
        raise DatasetError("No such file", path)
    mimetype = mime_magic_file(path)
    if mimetype == "inode/x-empty" or os.path.getsize(path) == 0:
        raise DatasetError("File is empty", path)
    if mimetype and not (mimetype.startswith("text/") or mimetype in TEXT_MIME_TYPES):
        raise DatasetError("Not a text CSV file (detected %s)" % mimetype, path)

    features = []
    labels = []
    header = None
    label_index = None
    width = None
    with io.open(path, "r", encoding="UTF-8", newline="") as fp:
        for line_no, row in enumerate(csv.reader(fp), 1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if width is None:
                width = len(row)
                if width < 2:
                    raise DatasetError("Need at least one feature and one label column", path, line_no)
                if has_header or (has_header is None and _looks_like_header(row)):
                    header = [cell.strip() for cell in row]
                    label_index = _resolve_label_column(header, label_column, width)
                    continue
                label_index = _resolve_label_column(None, label_column, width)
            if len(row) != width:
                raise DatasetError("Expected %d columns, found %d" % (width, len(row)), path, line_no)
            try:
                label_text = row[label_index].strip()
                label = int(label_text)
                if u"%d" % label != label_text.lstrip("+"):
                    raise ValueError(label_text)
                values = [float(cell) for idx, cell in enumerate(row) if idx != label_index]
            except ValueError as e:
                raise DatasetError("Malformed row (%s)" % e, path, line_no)
            if label < 0:
                raise DatasetError("Negative label %d" % label, path, line_no)
            if not all(math.isfinite(v) for v in values):
                raise DatasetError("Non-finite feature value", path, line_no)
            features.append(values)
            labels.append(label)

    if not labels:
        raise DatasetError("No samples found", path)
    present = set(labels)
    num_classes = max(present) + 1
    missing = sorted(set(range(num_classes)) - present)
    if missing:
        raise DatasetError("Labels are not contiguous, missing classes: %s"
                           % ", ".join("%d" % c for c in missing), path)
    dataset = Dataset(features, labels, num_classes)
    info(u"Loaded %d samples with %d features and %d classes from %s"
         % (len(dataset), dataset.feature_dim, num_classes, path))
    return dataset


def export_csv(dataset, path):
    """Write 'dataset' in the layout ingest_csv() reads (header, label last)"""
    with io.open(path, "w", encoding="UTF-8", newline="") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow([u"f%d" % idx for idx in range(dataset.feature_dim)] + [u"label"])
        for row, label in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [u"%d" % label])
    debug(u"Exported %r to %s" % (dataset, path))


class LoaderState(object):
    """Position of one model's data stream.

    The RNG state is stored as a plain dict so advancing never mutates
    a previous LoaderState.
    """

    def __init__(self, seed, batch_size, permutation, cursor, rng_state, epoch=0):
        self.seed = seed
        self.batch_size = batch_size
        self.epoch_permutation = permutation
        self.cursor = cursor
        self.rng_state = rng_state
        self.epoch = epoch

    def _advance(self, permutation, cursor, rng_state, epoch):
        return LoaderState(self.seed, self.batch_size, permutation, cursor, rng_state, epoch)


def _draw_permutation(rng_state, size):
    bit_generator = np.random.PCG64()
    bit_generator.state = rng_state
    permutation = np.random.Generator(bit_generator).permutation(size)
    permutation.flags.writeable = False
    return permutation, bit_generator.state


def new_loader(dataset, seed, batch_size):
    if len(dataset) == 0:
        raise DatasetError("Cannot iterate over an empty dataset")
    if int(batch_size) != batch_size or batch_size < 1:
        raise ParameterError("Batch size must be an integer >= 1, not %r" % batch_size)
    if batch_size > len(dataset):
        raise ParameterError("Batch size %d exceeds dataset size %d" % (batch_size, len(dataset)))
    rng_state = np.random.PCG64(int(seed)).state
    permutation, rng_state = _draw_permutation(rng_state, len(dataset))
    return LoaderState(int(seed), int(batch_size), permutation, 0, rng_state)


def next_batch(dataset, state):
    """
    Returns (Batch, LoaderState). A batch that runs past the end of the
    permutation continues with a freshly drawn one.
    """
    if len(dataset) == 0:
        raise DatasetError("Cannot iterate over an empty dataset")
    if state.epoch_permutation.shape[0] != len(dataset):
        raise ParameterError("Loader was created for %d samples, dataset has %d"
                             % (state.epoch_permutation.shape[0], len(dataset)))
    permutation = state.epoch_permutation
    cursor = state.cursor
    rng_state = state.rng_state
    epoch = state.epoch
    pieces = []
    needed = state.batch_size
    while needed:
        if cursor == permutation.shape[0]:
            permutation, rng_state = _draw_permutation(rng_state, len(dataset))
            cursor = 0
            epoch += 1
        take = min(needed, permutation.shape[0] - cursor)
        pieces.append(permutation[cursor:cursor + take])
        cursor += take
        needed -= take
    indices = pieces[0] if len(pieces) == 1 else np.concatenate(pieces)
    return dataset.batch(indices), state._advance(permutation, cursor, rng_state, epoch)

# vim:et:ts=4:sts=4:ai
