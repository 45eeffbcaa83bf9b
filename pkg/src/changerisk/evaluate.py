"""Holdout evaluation: train/test split, confusion counts, and metrics.

A prediction counts as positive when the assigned class is any fault-prone
class (possibly or highly); ground truth is the boolean fault label.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Sequence, TypeVar

from .dfp import HIGHLY_FAULT_PRONE, POSSIBLY_FAULT_PRONE
from .errors import DataError
from .validation import check_fraction

POSITIVE_CLASSES = frozenset({POSSIBLY_FAULT_PRONE, HIGHLY_FAULT_PRONE})

T = TypeVar("T")


@dataclass(frozen=True)
class ConfusionCounts:
    t_plus: int
    f_plus: int
    f_minus: int
    t_minus: int

    @property
    def total(self) -> int:
        return self.t_plus + self.f_plus + self.f_minus + self.t_minus


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    precision: float
    recall: float
    f_measure: float


def split(items: Sequence[T], train_fraction: float,
          seed: int = 0) -> tuple[list[T], list[T]]:
    """Deterministic shuffled partition; both sides stay non-empty."""
    if not items:
        raise DataError("cannot split an empty corpus", stage="evaluate")
    check_fraction("train_fraction", train_fraction)
    order = list(items)
    random.Random(seed).shuffle(order)
    n_train = round(len(order) * train_fraction)
    n_train = max(1, min(len(order) - 1, n_train)) if len(order) > 1 else 1
    return order[:n_train], order[n_train:]


def confusion(predictions: Mapping[str, str],
              truth: Mapping[str, bool]) -> ConfusionCounts:
    missing = sorted(set(predictions) - set(truth))
    if missing:
        raise DataError("missing ground truth for: " + ", ".join(missing),
                        stage="evaluate")
    t_plus = f_plus = f_minus = t_minus = 0
    for rid, predicted_class in predictions.items():
        positive = predicted_class in POSITIVE_CLASSES
        if positive and truth[rid]:
            t_plus += 1
        elif positive:
            f_plus += 1
        elif truth[rid]:
            f_minus += 1
        else:
            t_minus += 1
    return ConfusionCounts(t_plus=t_plus, f_plus=f_plus,
                           f_minus=f_minus, t_minus=t_minus)


def f_measure(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def metrics(c: ConfusionCounts) -> MetricSet:
    """Accuracy, precision, recall and F-measure; empty denominators give 0."""
    if c.total <= 0:
        raise DataError("confusion counts are empty", stage="evaluate")
    accuracy = (c.t_plus + c.t_minus) / c.total
    precision = c.t_plus / (c.t_plus + c.f_plus) if c.t_plus + c.f_plus else 0.0
    recall = c.t_plus / (c.t_plus + c.f_minus) if c.t_plus + c.f_minus else 0.0
    return MetricSet(accuracy=accuracy, precision=precision, recall=recall,
                     f_measure=f_measure(precision, recall))


def precision_alt(c: ConfusionCounts) -> float:
    """Share of true positives among all correct predictions, t+/(t+ + t-).

    An alternative precision reading some published evaluations use; it is
    reported alongside the standard definition, never in place of it.
    """
    denominator = c.t_plus + c.t_minus
    return c.t_plus / denominator if denominator else 0.0
