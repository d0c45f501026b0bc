# -*- coding: utf-8 -*-

## --------------------------------------------------------------------
## IMWA - Weight averaging, EMA and model distances
##
## License   : GPL Version 2
## --------------------------------------------------------------------

from __future__ import absolute_import, division

import itertools

import numpy as np

from .Exceptions import ParameterError
from .Network import WeightVector

__all__ = ["EmaState", "average_weights", "average_arrays", "ema_update",
           "pairwise_l2", "COEFFICIENT_TOLERANCE"]

COEFFICIENT_TOLERANCE = 1e-12


def _check_layouts(models):
    if not models:
        raise ParameterError("Need at least one model")
    layout = models[0].layout
    for idx, model in enumerate(models[1:], 1):
        if model.layout != layout:
            raise ParameterError("Model %d has layout %s, expected %s" % (idx, model.layout, layout))
    return layout


def _check_coefficients(coefficients, count):
    if coefficients is None:
        return None
    coefficients = [float(a) for a in coefficients]
    if len(coefficients) != count:
        raise ParameterError("Got %d coefficients for %d models" % (len(coefficients), count))
    if any(a < 0 or not np.isfinite(a) for a in coefficients):
        raise ParameterError("Averaging coefficients must be finite and >= 0, got %r" % coefficients)
    total = sum(coefficients)
    if abs(total - 1.0) > COEFFICIENT_TOLERANCE:
        raise ParameterError("Averaging coefficients must sum to 1, got %r (sum %.17g)" % (coefficients, total))
    return coefficients


def average_arrays(arrays, coefficients=None):
    """
    Entry-wise convex combination of equally shaped float64 arrays.

    Inputs are sorted into a canonical order (by raw bytes) and summed in
    that order, so the result does not depend on the input order. Each
    entry is clamped to the [min, max] of its inputs.
    """
    arrays = [np.asarray(a, dtype=np.float64) for a in arrays]
    count = len(arrays)
    if not count:
        raise ParameterError("Nothing to average")
    if any(a.shape != arrays[0].shape for a in arrays):
        raise ParameterError("Cannot average arrays of different shapes")
    coefficients = _check_coefficients(coefficients, count)
    if coefficients is None:
        if count == 1:
            return arrays[0].copy()
        order = sorted(range(count), key=lambda idx: arrays[idx].tobytes())
        total = arrays[order[0]].copy()
        for idx in order[1:]:
            total = total + arrays[idx]
        result = total / count
    else:
        order = sorted(range(count), key=lambda idx: (arrays[idx].tobytes(), coefficients[idx]))
        result = coefficients[order[0]] * arrays[order[0]]
        for idx in order[1:]:
            result = result + coefficients[idx] * arrays[idx]
    stacked = np.vstack(arrays)
    return np.clip(result, stacked.min(axis=0), stacked.max(axis=0))


def average_weights(models, coefficients=None):
    """theta_MWA = sum_m alpha_m * theta_m, alpha_m = 1/M by default"""
    layout = _check_layouts(models)
    if len(models) == 1 and coefficients is None:
        return models[0]
    return WeightVector(layout, average_arrays([m.values for m in models], coefficients))


class EmaState(object):
    """Shadow weights omega updated as omega <- lam * omega + (1 - lam) * theta"""

    def __init__(self, weights, ema_lambda):
        if not (0.0 <= ema_lambda <= 1.0):
            raise ParameterError("EMA lambda must be in [0, 1], not %r" % ema_lambda)
        self.weights = weights
        self.ema_lambda = float(ema_lambda)

    def with_weights(self, weights):
        return EmaState(weights, self.ema_lambda)


def ema_update(ema, student):
    if ema.weights.layout != student.layout:
        raise ParameterError("EMA layout %s does not match student layout %s"
                             % (ema.weights.layout, student.layout))
    lam = ema.ema_lambda
    values = lam * ema.weights.values + (1.0 - lam) * student.values
    return ema.with_weights(WeightVector(student.layout, values))


def pairwise_l2(models):
    """Euclidean distances for every pair i < j, in lexicographic pair order"""
    if len(models) < 2:
        raise ParameterError("Need at least two models for pairwise distances")
    _check_layouts(models)
    return [float(np.linalg.norm(a.values - b.values))
            for (a, b) in itertools.combinations(models, 2)]

# vim:et:ts=4:sts=4:ai
