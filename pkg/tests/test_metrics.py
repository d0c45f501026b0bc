# -*- coding: utf-8 -*-

import os
import sys
import unittest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from IMWA.Dataset import Dataset, LongTailSpec, generate_gaussian_mixture
from IMWA.Exceptions import ParameterError
from IMWA.Metrics import EvalReport, class_groups, evaluate, improvement
from IMWA.Network import LayerLayout, WeightVector, init_weights


def identity_model(num_classes, scale=1.0):
    ## single affine layer that predicts argmax of the input
    layout = LayerLayout.from_widths([num_classes, num_classes])
    values = np.concatenate([scale * np.eye(num_classes).ravel(), np.zeros(num_classes)])
    return WeightVector(layout, values)


class EvaluateTest(unittest.TestCase):
    def test_perfect_and_confused(self):
        features = np.array([[1, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 1]], dtype=float)
        labels = [0, 0, 1, 2, 1]
        report = evaluate(identity_model(3), Dataset(features, labels, 3))
        self.assertAlmostEqual(report.top1, 4 / 5.0)
        self.assertEqual(report.per_class, [1.0, 0.5, 1.0])
        self.assertEqual(report.confusion.tolist(), [[2, 0, 0], [0, 1, 1], [0, 0, 1]])
        self.assertEqual(report.confusion.sum(), 5)

    def test_ties_go_to_lowest_class(self):
        w = identity_model(3, scale=0.0)
        report = evaluate(w, Dataset(np.ones((3, 3)), [0, 1, 2], 3))
        self.assertEqual(report.confusion[:, 0].tolist(), [1, 1, 1])
        self.assertAlmostEqual(report.top1, 1 / 3.0)

    def test_class_without_samples(self):
        report = evaluate(identity_model(3), Dataset(np.eye(3)[:2], [0, 1], 3))
        self.assertEqual(report.per_class[2], None)
        self.assertEqual(report.top1, 1.0)

    def test_groups_follow_training_counts(self):
        ## class 2 is the head class in training, class 0 the tail
        features = np.array([[1, 0, 0], [0, 1, 0], [1, 0, 0]], dtype=float)
        report = evaluate(identity_model(3), Dataset(features, [0, 1, 2], 3), train_counts=[5, 10, 50])
        self.assertEqual(report.group_acc, (0.0, 1.0, 1.0))

    def test_group_of_absent_classes(self):
        report = evaluate(identity_model(3), Dataset(np.eye(3)[:1], [0], 3), train_counts=[9, 5, 1])
        self.assertEqual(report.group_acc, (1.0, None, None))

    def test_empty_eval_set(self):
        self.assertRaises(ParameterError, evaluate, identity_model(2), Dataset(np.zeros((0, 2)), [], 2))

    def test_record_round_trip(self):
        report = evaluate(identity_model(3), Dataset(np.eye(3), [0, 1, 1], 3))
        back = EvalReport.from_record(report.to_record())
        self.assertEqual(back.to_record(), report.to_record())


class RandomModelTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.train, cls.test = generate_gaussian_mixture(LongTailSpec(10, 200, 10.0), 16, 2.0,
                                                        seed=4, test_per_class=30)
        cls.layout = LayerLayout.from_widths([16, 64, 10])

    def test_sample_order_does_not_matter(self):
        w = init_weights(self.layout, 9)
        order = np.random.default_rng(1).permutation(len(self.test))
        shuffled = Dataset(self.test.features[order], self.test.labels[order], self.test.num_classes)
        self.assertEqual(evaluate(w, shuffled, self.train.class_counts).to_record(),
                         evaluate(w, self.test, self.train.class_counts).to_record())

    def test_confusion_rows_match_class_counts(self):
        report = evaluate(init_weights(self.layout, 2), self.test)
        self.assertEqual(report.confusion.sum(axis=1).tolist(), self.test.class_counts)

    def test_untrained_models_near_chance(self):
        scores = []
        for seed in range(20):
            _, test = generate_gaussian_mixture(LongTailSpec(10, 50, 10.0), 16, 2.0,
                                                seed=seed, test_per_class=50)
            scores.append(evaluate(init_weights(self.layout, seed), test).top1)
        self.assertTrue(all(0.0 <= s <= 1.0 for s in scores))
        self.assertGreaterEqual(np.mean(scores), 0.02)
        self.assertLessEqual(np.mean(scores), 0.25)


class ClassGroupsTest(unittest.TestCase):
    def test_ten_classes(self):
        counts = [500, 300, 300, 120, 80, 60, 40, 20, 10, 5]
        groups = class_groups(counts)
        self.assertEqual([len(g) for g in groups], [4, 3, 3])
        self.assertEqual(groups[0], [0, 1, 2, 3])
        self.assertEqual(groups[2], [7, 8, 9])

    def test_ties_keep_index_order(self):
        self.assertEqual(class_groups([1, 1, 1, 1]), [[0, 1], [2], [3]])

    def test_unsorted_counts(self):
        self.assertEqual(class_groups([1, 9, 5]), [[1], [2], [0]])


class ImprovementTest(unittest.TestCase):
    def test_signed_difference(self):
        base = EvalReport(0.5, [0.5, 0.5], (0.5, None, 0.5), np.zeros((2, 2), dtype=np.int64))
        arm = EvalReport(0.75, [1.0, 0.5], (1.0, None, 0.5), np.zeros((2, 2), dtype=np.int64))
        self.assertEqual(improvement(arm, base), 0.25)
        self.assertEqual(improvement(base, arm), -0.25)

    def test_class_mismatch(self):
        base = EvalReport(0.5, [0.5, 0.5], (0.5, None, 0.5), np.zeros((2, 2), dtype=np.int64))
        arm = EvalReport(0.5, [0.5, 0.5, 0.5], (0.5, 0.5, 0.5), np.zeros((3, 3), dtype=np.int64))
        self.assertRaises(ParameterError, improvement, arm, base)


if __name__ == "__main__":
    unittest.main()
