# -*- coding: utf-8 -*-

import itertools
import os
import sys
import unittest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from IMWA.Averaging import EmaState, average_arrays, average_weights, ema_update, pairwise_l2
from IMWA.Exceptions import ParameterError
from IMWA.Network import LayerLayout, WeightVector, init_weights


class AverageWeightsTest(unittest.TestCase):
    def setUp(self):
        self.layout = LayerLayout.from_widths([5, 7, 3])
        self.models = [init_weights(self.layout, seed) for seed in range(4)]

    def test_identical_models(self):
        w = self.models[0]
        self.assertEqual(average_weights([w, w, w]), w)
        self.assertEqual(average_weights([w, w], [0.25, 0.75]), w)

    def test_single_model(self):
        self.assertIs(average_weights([self.models[1]]), self.models[1])

    def test_within_entry_hull(self):
        rng = np.random.default_rng(3)
        models = [WeightVector(self.layout, rng.normal(0, 10, self.layout.parameter_count))
                  for _ in range(5)]
        stacked = np.vstack([m.values for m in models])
        for coefficients in (None, [0.1, 0.2, 0.3, 0.15, 0.25]):
            avg = average_weights(models, coefficients).values
            self.assertTrue(np.all(avg >= stacked.min(axis=0)))
            self.assertTrue(np.all(avg <= stacked.max(axis=0)))

    def test_permutation_invariant(self):
        expected = average_weights(self.models)
        for order in itertools.permutations(self.models):
            self.assertEqual(average_weights(list(order)).values.tobytes(), expected.values.tobytes())

    def test_weighted_permutation_invariant(self):
        coefficients = [0.4, 0.3, 0.2, 0.1]
        expected = average_weights(self.models, coefficients)
        for order in itertools.permutations(range(4)):
            got = average_weights([self.models[i] for i in order], [coefficients[i] for i in order])
            self.assertEqual(got.values.tobytes(), expected.values.tobytes())

    def test_uniform_mean(self):
        avg = average_weights(self.models[:2])
        np.testing.assert_allclose(avg.values, (self.models[0].values + self.models[1].values) / 2,
                                   rtol=0, atol=1e-15)

    def test_coefficients_must_sum_to_one(self):
        self.assertRaises(ParameterError, average_weights, self.models[:2], [0.5, 0.6])
        self.assertRaises(ParameterError, average_weights, self.models[:2], [1.5, -0.5])
        self.assertRaises(ParameterError, average_weights, self.models[:2], [1.0])

    def test_layout_mismatch(self):
        other = init_weights(LayerLayout.from_widths([5, 3]), 0)
        self.assertRaises(ParameterError, average_weights, [self.models[0], other])
        self.assertRaises(ParameterError, average_weights, [])

    def test_arrays(self):
        self.assertRaises(ParameterError, average_arrays, [np.zeros(3), np.zeros(4)])
        np.testing.assert_array_equal(average_arrays([np.ones(3), 3 * np.ones(3)]), 2 * np.ones(3))


class EmaTest(unittest.TestCase):
    def setUp(self):
        layout = LayerLayout.from_widths([4, 6, 3])
        self.student = init_weights(layout, 1)
        self.start = init_weights(layout, 2)

    def test_closed_form(self):
        ## frozen student: omega_t = theta + lambda^t * (omega_0 - theta)
        for lam in (0.9, 0.999):
            ema = EmaState(self.start, lam)
            for _ in range(200):
                ema = ema_update(ema, self.student)
            expected = self.student.values + lam ** 200 * (self.start.values - self.student.values)
            self.assertLess(np.max(np.abs(ema.weights.values - expected)), 1e-9)

    def test_extreme_lambdas(self):
        self.assertEqual(ema_update(EmaState(self.start, 0.0), self.student).weights, self.student)
        self.assertEqual(ema_update(EmaState(self.start, 1.0), self.student).weights, self.start)

    def test_bad_lambda(self):
        self.assertRaises(ParameterError, EmaState, self.start, 1.5)

    def test_update_does_not_touch_input(self):
        ema = EmaState(self.start, 0.5)
        before = self.start.values.tobytes()
        ema_update(ema, self.student)
        self.assertEqual(ema.weights.values.tobytes(), before)


class PairwiseL2Test(unittest.TestCase):
    def setUp(self):
        layout = LayerLayout.from_widths([3, 2])
        self.a = WeightVector(layout, np.zeros(8))
        self.b = WeightVector(layout, [3.0, 4.0, 0, 0, 0, 0, 0, 0])
        self.c = WeightVector(layout, np.ones(8))

    def test_pair_order_and_values(self):
        distances = pairwise_l2([self.a, self.b, self.c])
        self.assertEqual(len(distances), 3)
        self.assertEqual(distances[0], 5.0)
        self.assertAlmostEqual(distances[1], np.sqrt(8.0))

    def test_symmetric(self):
        self.assertEqual(pairwise_l2([self.b, self.c]), pairwise_l2([self.c, self.b]))
        self.assertEqual(pairwise_l2([self.b, self.b]), [0.0])

    def test_needs_two(self):
        self.assertRaises(ParameterError, pairwise_l2, [self.a])


if __name__ == "__main__":
    unittest.main()
