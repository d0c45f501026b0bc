# -*- coding: utf-8 -*-

## --------------------------------------------------------------------
## IMWA - Evaluation metrics
##
## License   : GPL Version 2
## --------------------------------------------------------------------

from __future__ import absolute_import, division

import numpy as np

from .Exceptions import ParameterError
from .Network import forward
from .Utils import split_evenly

__all__ = ["EvalReport", "GROUP_NAMES", "evaluate", "improvement", "class_groups"]

GROUP_NAMES = ("many", "medium", "few")


class EvalReport(object):
    def __init__(self, top1, per_class, group_acc, confusion):
        self.top1 = float(top1)
        self.per_class = list(per_class)
        self.group_acc = tuple(group_acc)
        self.confusion = confusion

    @property
    def num_classes(self):
        return len(self.per_class)

    def to_record(self):
        return {
            "top1": self.top1,
            "per_class": self.per_class,
            "group_acc": dict(zip(GROUP_NAMES, self.group_acc)),
            "confusion": [[int(n) for n in row] for row in self.confusion],
        }

    @classmethod
    def from_record(cls, record):
        return cls(record["top1"], record["per_class"],
                   [record["group_acc"][name] for name in GROUP_NAMES],
                   np.array(record["confusion"], dtype=np.int64))

    def __repr__(self):
        return "<EvalReport top1=%.4f>" % self.top1


def class_groups(train_counts):
    """
    Split class indices into many/medium/few thirds by training count,
    largest first. Equal counts keep class index order and leftover
    classes go to the earlier groups.
    """
    order = sorted(range(len(train_counts)), key=lambda c: (-train_counts[c], c))
    groups = []
    start = 0
    for size in split_evenly(len(order), len(GROUP_NAMES)):
        groups.append(order[start:start + size])
        start += size
    return groups


def _mean_or_none(values):
    values = [v for v in values if v is not None]
    if not values:
        return None
    return float(sum(values) / len(values))


def evaluate(w, eval_set, train_counts=None):
    """
    Top-1 accuracy of argmax predictions (ties go to the lowest class
    index), per-class accuracy, many/medium/few group accuracy and the
    confusion matrix (rows: true class, columns: prediction).
    """
    if len(eval_set) == 0:
        raise ParameterError("Cannot evaluate on an empty dataset")
    num_classes = w.layout.output_width
    if eval_set.num_classes > num_classes:
        raise ParameterError("Evaluation set has %d classes, model predicts %d"
                             % (eval_set.num_classes, num_classes))
    predictions = np.argmax(forward(w, eval_set.features), axis=1)
    confusion = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(confusion, (eval_set.labels, predictions), 1)

    row_sums = confusion.sum(axis=1)
    per_class = []
    for c in range(num_classes):
        if row_sums[c]:
            per_class.append(float(confusion[c, c] / row_sums[c]))
        else:
            per_class.append(None)

    if train_counts is None:
        train_counts = list(eval_set.class_counts) + [0] * (num_classes - eval_set.num_classes)
    if len(train_counts) != num_classes:
        raise ParameterError("Got %d training counts for %d classes" % (len(train_counts), num_classes))
    group_acc = [_mean_or_none([per_class[c] for c in group]) for group in class_groups(train_counts)]

    top1 = float(np.trace(confusion) / confusion.sum())
    return EvalReport(top1, per_class, group_acc, confusion)


def improvement(arm, baseline):
    """Signed top-1 difference arm - baseline"""
    if arm.num_classes != baseline.num_classes:
        raise ParameterError("Cannot compare reports over %d and %d classes"
                             % (arm.num_classes, baseline.num_classes))
    return arm.top1 - baseline.top1

# vim:et:ts=4:sts=4:ai
