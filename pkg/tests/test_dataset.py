# -*- coding: utf-8 -*-

import io
import math
import os
import shutil
import sys
import tempfile
import unittest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from IMWA.Dataset import (TEXT_MIME_TYPES, Dataset, LongTailSpec, class_counts, export_csv,
                          generate_gaussian_mixture, ingest_csv, new_loader, next_batch)
from IMWA.Exceptions import DatasetError, ParameterError


def reference_counts(num_classes, head_count, imbalance_ratio):
    ## n_c = n_1 * gamma ^ (-(c-1)/(C-1)), c = 1..C, half rounded up
    return [int(math.floor(head_count * imbalance_ratio ** (-(c - 1.0) / (num_classes - 1.0)) + 0.5))
            for c in range(1, num_classes + 1)]


class ClassCountsTest(unittest.TestCase):
    def test_gamma_100(self):
        counts = class_counts(LongTailSpec(10, 500, 100.0))
        self.assertEqual(counts[0], 500)
        self.assertEqual(counts[4], 65)
        self.assertEqual(counts[9], 5)
        self.assertTrue(all(a >= b for a, b in zip(counts, counts[1:])))

    def test_balanced(self):
        self.assertEqual(class_counts(LongTailSpec(7, 120, 1.0)), [120] * 7)

    def test_matches_reference(self):
        rng = np.random.default_rng(99)
        for _ in range(50):
            spec = LongTailSpec(int(rng.integers(2, 30)), int(rng.integers(50, 1000)),
                                float(rng.uniform(1.0, 50.0)))
            self.assertEqual(class_counts(spec),
                             reference_counts(spec.num_classes, spec.head_count, spec.imbalance_ratio))

    def test_empty_tail_class(self):
        self.assertRaises(DatasetError, class_counts, LongTailSpec(10, 5, 100.0))

    def test_bad_spec(self):
        self.assertRaises(ParameterError, LongTailSpec, 1, 100, 10.0)
        self.assertRaises(ParameterError, LongTailSpec, 10, 0, 10.0)
        self.assertRaises(ParameterError, LongTailSpec, 10, 100, 0.5)


class GaussianMixtureTest(unittest.TestCase):
    def test_shapes_and_counts(self):
        spec = LongTailSpec(10, 500, 10.0)
        train, test = generate_gaussian_mixture(spec, 16, 2.0, seed=0, test_per_class=50)
        self.assertEqual(train.class_counts, class_counts(spec))
        self.assertEqual(test.class_counts, [50] * 10)
        self.assertEqual(train.feature_dim, 16)

    def test_deterministic(self):
        spec = LongTailSpec(4, 30, 3.0)
        a = generate_gaussian_mixture(spec, 5, 2.0, seed=11)
        b = generate_gaussian_mixture(spec, 5, 2.0, seed=11)
        c = generate_gaussian_mixture(spec, 5, 2.0, seed=12)
        self.assertEqual(a[0].features.tobytes(), b[0].features.tobytes())
        self.assertEqual(a[1].features.tobytes(), b[1].features.tobytes())
        self.assertNotEqual(a[0].features.tobytes(), c[0].features.tobytes())

    def test_well_separated_nearest_mean(self):
        train, test = generate_gaussian_mixture(LongTailSpec(3, 100, 5.0), 2, 20.0, seed=3)
        means = np.array([train.features[train.labels == c].mean(axis=0) for c in range(3)])
        distances = ((test.features[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)
        accuracy = np.mean(np.argmin(distances, axis=1) == test.labels)
        self.assertGreater(accuracy, 0.99)

    def test_immutable(self):
        train, _ = generate_gaussian_mixture(LongTailSpec(3, 10, 2.0), 3, 2.0, seed=0)
        with self.assertRaises(ValueError):
            train.features[0, 0] = 1.0


class LoaderTest(unittest.TestCase):
    def setUp(self):
        ## feature 0 holds the sample index
        self.dataset = Dataset(np.arange(20, dtype=np.float64).reshape(10, 2) / 2.0,
                               np.arange(10) % 3)

    def drawn_indices(self, state, count):
        indices = []
        for _ in range(count):
            batch, state = next_batch(self.dataset, state)
            indices.extend(int(v) for v in batch.inputs[:, 0])
        return indices, state

    def test_same_seed_same_stream(self):
        a, _ = self.drawn_indices(new_loader(self.dataset, 3, 4), 6)
        b, _ = self.drawn_indices(new_loader(self.dataset, 3, 4), 6)
        c, _ = self.drawn_indices(new_loader(self.dataset, 4, 4), 6)
        self.assertEqual(a, b)
        self.assertNotEqual(a, c)

    def test_seeds_give_different_first_epochs(self):
        dataset = Dataset(np.zeros((128, 1)), np.arange(128) % 2)
        first = new_loader(dataset, 1, 8).epoch_permutation
        second = new_loader(dataset, 2, 8).epoch_permutation
        self.assertEqual(sorted(first.tolist()), list(range(128)))
        self.assertEqual(sorted(second.tolist()), list(range(128)))
        self.assertNotEqual(first.tolist(), second.tolist())

    def test_epochs_cover_dataset(self):
        ## 3 batches of 4 straddle the first epoch boundary
        indices, state = self.drawn_indices(new_loader(self.dataset, 0, 4), 5)
        self.assertEqual(sorted(indices[:10]), list(range(10)))
        self.assertEqual(sorted(indices[10:20]), list(range(10)))
        self.assertEqual(state.epoch, 1)

    def test_state_is_not_mutated(self):
        state = new_loader(self.dataset, 1, 3)
        first, _ = next_batch(self.dataset, state)
        again, _ = next_batch(self.dataset, state)
        np.testing.assert_array_equal(first.inputs, again.inputs)

    def test_bad_batch_size(self):
        self.assertRaises(ParameterError, new_loader, self.dataset, 0, 0)
        self.assertRaises(ParameterError, new_loader, self.dataset, 0, 11)

    def test_empty_dataset(self):
        empty = Dataset(np.zeros((0, 2)), [], 2)
        self.assertRaises(DatasetError, new_loader, empty, 0, 1)


class CsvTest(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def write(self, name, text):
        path = os.path.join(self.tmpdir, name)
        with io.open(path, "w", encoding="UTF-8") as fp:
            fp.write(text)
        return path

    def test_export_then_ingest(self):
        train, _ = generate_gaussian_mixture(LongTailSpec(3, 12, 3.0), 4, 2.0, seed=5)
        path = os.path.join(self.tmpdir, "train.csv")
        export_csv(train, path)
        back = ingest_csv(path)
        self.assertEqual(back.features.tobytes(), train.features.tobytes())
        self.assertEqual(list(back.labels), list(train.labels))

    def test_headerless_and_label_column(self):
        path = self.write("plain.csv", u"0,1.5,2.5\n1,0.5,1.0\n")
        dataset = ingest_csv(path, label_column=0)
        self.assertEqual(list(dataset.labels), [0, 1])
        self.assertEqual(dataset.features.tolist(), [[1.5, 2.5], [0.5, 1.0]])

    def test_named_label_column(self):
        path = self.write("named.csv", u"y,a,b\n1,1.0,2.0\n0,3.0,4.0\n")
        self.assertEqual(list(ingest_csv(path, label_column="y").labels), [1, 0])

    def test_malformed_row_names_line(self):
        path = self.write("bad.csv", u"a,b,label\n1.0,2.0,0\n1.0,oops,1\n")
        with self.assertRaises(DatasetError) as cm:
            ingest_csv(path)
        self.assertEqual(cm.exception.line, 3)

    def test_wrong_column_count(self):
        path = self.write("short.csv", u"1.0,2.0,0\n1.0,1\n")
        with self.assertRaises(DatasetError) as cm:
            ingest_csv(path)
        self.assertEqual(cm.exception.line, 2)

    def test_missing_class(self):
        path = self.write("gap.csv", u"1.0,0\n2.0,2\n")
        with self.assertRaises(DatasetError) as cm:
            ingest_csv(path)
        self.assertIn("missing classes: 1", str(cm.exception))

    def test_non_finite_value(self):
        path = self.write("nan.csv", u"1.0,0\nnan,1\n")
        self.assertRaises(DatasetError, ingest_csv, path)

    def test_binary_file_refused(self):
        path = os.path.join(self.tmpdir, "blob.bin")
        with open(path, "wb") as fp:
            fp.write(bytes(bytearray(range(256))) * 4)
        self.assertRaises(DatasetError, ingest_csv, path)

    def test_json_file_refused(self):
        self.assertNotIn("application/json", TEXT_MIME_TYPES)
        path = self.write("rows.json", u'{"rows": [[1.0, 2.0, 0], [3.0, 4.0, 1]]}\n')
        self.assertRaises(DatasetError, ingest_csv, path)

    def test_missing_file(self):
        self.assertRaises(DatasetError, ingest_csv, os.path.join(self.tmpdir, "nope.csv"))


if __name__ == "__main__":
    unittest.main()
