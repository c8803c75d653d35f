"""Evaluation metrics: per-class coverage, class-averaged coverage, outlier
abstention rate, and cross-repetition aggregation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import OUTLIER
from .conformal import PredictionSet

CLASS_COVERAGE = "class_coverage"
MEAN_COVERAGE = "mean_coverage"
ABSTENTION_RATE = "abstention_rate"
METRIC_NAMES = (CLASS_COVERAGE, MEAN_COVERAGE, ABSTENTION_RATE)


@dataclass(frozen=True)
class EvaluationFrame:
    """Prediction sets paired with ground truth (classes or OUTLIER marks)."""

    sets: tuple
    truth: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "sets", tuple(self.sets))
        truth = np.asarray(self.truth, dtype=np.int64)
        object.__setattr__(self, "truth", truth)
        if len(self.sets) == 0:
            raise ValueError("frame must contain at least one row")
        if truth.shape != (len(self.sets),):
            raise ValueError("sets and truth must have equal length")


@dataclass(frozen=True)
class MetricRecord:
    metric_name: str
    value: float
    class_label: int | None = None

    def __post_init__(self) -> None:
        if self.metric_name not in METRIC_NAMES:
            raise ValueError(f"unknown metric {self.metric_name!r}")
        if (self.class_label is not None) != (self.metric_name == CLASS_COVERAGE):
            raise ValueError("class_label present iff metric is class_coverage")
        if not 0.0 <= self.value <= 1.0:
            raise ValueError("metric value must lie in [0, 1]")


def class_coverage(frame: EvaluationFrame, k: int) -> float:
    """Fraction of true-class-k rows whose prediction set contains k."""
    rows = np.nonzero(frame.truth == k)[0]
    if rows.size == 0:
        raise ValueError("class absent from evaluation")
    hits = sum(1 for i in rows if k in frame.sets[i])
    return hits / rows.size


def mean_coverage(frame: EvaluationFrame) -> float:
    """Unweighted mean of class_coverage over the inlier classes present."""
    classes = sorted(set(frame.truth[frame.truth != OUTLIER].tolist()))
    if not classes:
        raise ValueError("no inlier rows in frame")
    return float(np.mean([class_coverage(frame, k) for k in classes]))


def abstention_rate(frame: EvaluationFrame) -> float:
    """Fraction of outlier rows with an empty prediction set."""
    rows = np.nonzero(frame.truth == OUTLIER)[0]
    if rows.size == 0:
        raise ValueError("no outliers in frame")
    empty = sum(1 for i in rows if frame.sets[i].is_abstention)
    return empty / rows.size


def evaluate(sets, truth) -> list[MetricRecord]:
    """All metrics computable on one (sets, truth) pair, classes ascending."""
    frame = EvaluationFrame(tuple(sets), truth)
    records = []
    for k in sorted(set(frame.truth[frame.truth != OUTLIER].tolist())):
        records.append(MetricRecord(CLASS_COVERAGE, class_coverage(frame, k), class_label=int(k)))
    if records:
        records.append(MetricRecord(MEAN_COVERAGE, mean_coverage(frame)))
    if np.any(frame.truth == OUTLIER):
        records.append(MetricRecord(ABSTENTION_RATE, abstention_rate(frame)))
    return records


@dataclass(frozen=True)
class SummaryRow:
    phi: float
    metric_name: str
    class_label: int | None
    mean: float
    sd: float  # sample sd; 0 by convention when n_reps == 1
    n_reps: int


def aggregate(records) -> list[SummaryRow]:
    """Group (repetition, phi, MetricRecord) triples by (phi, metric, class).

    Output is ordered by phi ascending, then metric name, then class.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to aggregate")
    groups: dict = {}
    for _rep, phi, rec in records:
        groups.setdefault((phi, rec.metric_name, rec.class_label), []).append(rec.value)

    def sort_key(key):
        phi, name, label = key
        return (phi, name, -1 if label is None else label)

    out = []
    for key in sorted(groups, key=sort_key):
        values = np.asarray(groups[key], dtype=np.float64)
        sd = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
        out.append(
            SummaryRow(
                phi=key[0],
                metric_name=key[1],
                class_label=key[2],
                mean=float(values.mean()),
                sd=sd,
                n_reps=int(values.size),
            )
        )
    return out
