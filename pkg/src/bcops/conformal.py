"""BCOPS: transductive per-class scoring, split-conformal calibration,
prediction sets, and abstention.

Train and test rows are each split 50/50. For every class k and fold f a
binary forest separates fold-f class-k training rows (target 1) from fold-f
test rows (target 0). That model scores the opposite test fold and is
calibrated on class-k rows of the opposite training fold, so no point is
ranked against a calibration set its own model trained on. A class enters
C(x) iff its rank-based p-value exceeds alpha; an empty set is an
abstention.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import LabeledDataset, RngStream, UnlabeledDataset, split_in_two
from .forest import (
    BinaryTrainingSet,
    ForestConfig,
    ForestModel,
    predict_probability_batch,
    train_forest,
)


@dataclass(frozen=True)
class PredictionSet:
    """Subset of the K training classes assigned to one test point.

    The empty set is meaningful: the model abstains from predicting.
    """

    members: frozenset

    @property
    def is_abstention(self) -> bool:
        return not self.members

    def __contains__(self, k: int) -> bool:
        return k in self.members


@dataclass(frozen=True)
class BcopsModel:
    alpha: float
    class_count: int
    # keyed by (class k, training fold f); classifier may be None when the
    # class was absent from fold f (fail-open: p-value 1 for that side)
    classifiers: dict
    calibration_scores: dict  # (k, f) -> ascending np.ndarray
    fold_assignment: np.ndarray  # per test row, its test fold in {1, 2}
    test_features: np.ndarray
    warnings: tuple


def conformal_p_value(score: float, calibration) -> float:
    """(1 + #{c in calibration : c <= score}) / (|calibration| + 1).

    Weak inequality keeps ties conservative. An empty calibration list
    yields 1 (fail-open: the class is always included).
    """
    calibration = np.asarray(calibration, dtype=np.float64)
    n = calibration.size
    if n == 0:
        return 1.0
    return float(1 + np.searchsorted(calibration, score, side="right")) / (n + 1)


def fit_bcops(
    train: LabeledDataset,
    test: UnlabeledDataset,
    forest_config: ForestConfig,
    alpha: float,
    rng: RngStream,
    imbalance_cap: float = 5.0,
) -> BcopsModel:
    """Fit the transductive BCOPS model on a train/test pair.

    imbalance_cap bounds |test fold| / |class-k fold rows| in each binary
    training set; larger test folds are subsampled without replacement.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if test.n_rows == 0:
        raise ValueError("test set must be non-empty")
    k_count = train.class_count
    for k in range(1, k_count + 1):
        if not np.any(train.labels == k):
            raise ValueError(f"class {k} absent from the training set")

    d1, d2 = split_in_two(np.arange(train.n_rows), rng.derive(1))
    t1, t2 = split_in_two(np.arange(test.n_rows), rng.derive(2))
    train_folds = {1: d1, 2: d2}
    test_folds = {1: t1, 2: t2}
    fold_assignment = np.zeros(test.n_rows, dtype=np.int8)
    fold_assignment[t1] = 1
    fold_assignment[t2] = 2

    classifiers: dict = {}
    calibration: dict = {}
    warnings: list[str] = []

    for k in range(1, k_count + 1):
        for f in (1, 2):
            cell_rng = rng.derive(10 * k + f)
            own = train_folds[f][train.labels[train_folds[f]] == k]
            opp = train_folds[3 - f][train.labels[train_folds[3 - f]] == k]
            if own.size == 0:
                classifiers[(k, f)] = None
                calibration[(k, f)] = np.empty(0)
                warnings.append(
                    f"class {k} absent from training fold {f}; "
                    f"p-values for (class {k}, fold {f}) fixed at 1"
                )
                continue

            tf = test_folds[f]
            cap = int(imbalance_cap * own.size)
            if tf.size > cap > 0:
                g = cell_rng.derive(1).generator()
                tf = np.sort(g.choice(tf, size=cap, replace=False))
            if tf.size == 0:
                classifiers[(k, f)] = None
                calibration[(k, f)] = np.empty(0)
                warnings.append(
                    f"empty test fold {f}; p-values for (class {k}, fold {f}) fixed at 1"
                )
                continue

            binary = BinaryTrainingSet(
                np.vstack([train.features[own], test.features[tf]]),
                np.concatenate([np.ones(own.size, dtype=np.int8), np.zeros(tf.size, dtype=np.int8)]),
            )
            model = train_forest(binary, replace(forest_config, seed_stream=cell_rng.derive(2)))
            classifiers[(k, f)] = model

            if opp.size:
                cal = predict_probability_batch(model, train.features[opp])
            else:
                # fall back to in-sample rows rather than silently under-cover
                cal = predict_probability_batch(model, train.features[own])
                warnings.append(
                    f"class {k} absent from training fold {3 - f}; "
                    f"calibrating (class {k}, fold {f}) on its own fold"
                )
            calibration[(k, f)] = np.sort(cal)

    return BcopsModel(
        alpha=alpha,
        class_count=k_count,
        classifiers=classifiers,
        calibration_scores=calibration,
        fold_assignment=fold_assignment,
        test_features=test.features,
        warnings=tuple(warnings),
    )


def conformal_p_values(model: BcopsModel) -> np.ndarray:
    """(n_test, K) matrix of per-class conformal p-values, rows in test order.

    A row in test fold t is scored by the model of training fold 3-t.
    """
    m = model.test_features.shape[0]
    pv = np.ones((m, model.class_count))
    for tag in (1, 2):
        rows = np.nonzero(model.fold_assignment == tag)[0]
        if rows.size == 0:
            continue
        f = 3 - tag
        x = model.test_features[rows]
        for k in range(1, model.class_count + 1):
            clf = model.classifiers[(k, f)]
            cal = model.calibration_scores[(k, f)]
            if clf is None or cal.size == 0:
                pv[rows, k - 1] = 1.0
                continue
            scores = predict_probability_batch(clf, x)
            pv[rows, k - 1] = (1 + np.searchsorted(cal, scores, side="right")) / (cal.size + 1)
    return pv


def predict_all(model: BcopsModel, alpha: float | None = None) -> list[PredictionSet]:
    """Prediction set for every test row, in input order."""
    a = model.alpha if alpha is None else alpha
    pv = conformal_p_values(model)
    include = pv > a
    return [
        PredictionSet(frozenset(np.nonzero(row)[0] + 1)) for row in include
    ]


def predict_set(model: BcopsModel, test_row: int, alpha: float | None = None) -> PredictionSet:
    """Prediction set for one fitted test row."""
    m = model.test_features.shape[0]
    if not 0 <= test_row < m:
        raise IndexError(f"test_row {test_row} outside fitted test set of size {m}")
    a = model.alpha if alpha is None else alpha
    f = 3 - int(model.fold_assignment[test_row])
    x = model.test_features[test_row : test_row + 1]
    members = []
    for k in range(1, model.class_count + 1):
        clf = model.classifiers[(k, f)]
        cal = model.calibration_scores[(k, f)]
        if clf is None or cal.size == 0:
            p = 1.0
        else:
            p = conformal_p_value(float(predict_probability_batch(clf, x)[0]), cal)
        if p > a:
            members.append(k)
    return PredictionSet(frozenset(members))
