"""Accuracy-, precision-, recall- and F1-reject curves.

Every curve is evaluated on the accepted set ``X_theta`` for each achievable
threshold and plotted against the acceptance rate ``|X_theta| / |X|``. One
descending sort of the certainties with running confusion counts yields all
points in O(n log n).

Undefined values (a zero denominator, e.g. precision when nothing accepted is
predicted positive) are NaN and are written as empty CSV fields. They are
never coerced to 0 or 1.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from rejectlab.errors import DataError, UnsupportedMeasureError
from rejectlab.reject import CertaintyScores

__all__ = [
    "ACCEPTANCE_GRID",
    "METRICS",
    "ConfusionCounts",
    "RejectCurve",
    "Sweep",
    "arc",
    "average_curves",
    "confusion_at",
    "curve",
    "f1_curve",
    "plain_metrics",
    "prc",
    "read_curve_csv",
    "rrc",
    "sweep",
    "write_curve_csv",
]

METRICS = ("accuracy", "precision", "recall", "f1")
ACCEPTANCE_GRID = np.arange(101) / 100.0


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion_at(s: CertaintyScores, theta: float, positive_class: int) -> ConfusionCounts:
    acc = s.certainty >= theta
    pp = s.predicted[acc] == positive_class
    tp = s.true[acc] == positive_class
    return ConfusionCounts(
        int(np.sum(pp & tp)), int(np.sum(pp & ~tp)), int(np.sum(~pp & ~tp)), int(np.sum(~pp & tp))
    )


@dataclass(frozen=True)
class Sweep:
    """Running counts at each achievable threshold, thresholds increasing.

    ``theta[0]`` is 0 and stands for "accept everything"; the remaining entries are
    the distinct certainty values above the minimum. ``correct`` counts accepted
    samples with ``predicted == true`` (meaningful for any number of classes).
    """

    n_total: int
    theta: np.ndarray
    accepted: np.ndarray
    correct: np.ndarray
    tp: np.ndarray
    fp: np.ndarray
    tn: np.ndarray
    fn: np.ndarray

    @property
    def acceptance_rate(self) -> np.ndarray:
        return self.accepted / self.n_total

    def counts(self, i: int) -> ConfusionCounts:
        return ConfusionCounts(int(self.tp[i]), int(self.fp[i]), int(self.tn[i]), int(self.fn[i]))


def sweep(s: CertaintyScores, positive_class: Optional[int] = None) -> Sweep:
    n = len(s)
    if n == 0:
        raise DataError("cannot sweep an empty score set")
    order = np.argsort(-s.certainty, kind="stable")
    r = s.certainty[order]
    pred = s.predicted[order]
    true = s.true[order]
    # last position of each run of equal certainties: samples tied at theta enter X_theta together
    ends = np.append(np.flatnonzero(r[1:] != r[:-1]), n - 1)
    cum = lambda m: np.cumsum(m, dtype=np.int64)[ends][::-1]  # noqa: E731
    pos = positive_class if positive_class is not None else -1
    pp = pred == pos
    tp_ = true == pos
    theta = r[ends][::-1].copy()
    theta[0] = 0.0
    return Sweep(
        n,
        theta,
        (ends + 1)[::-1].astype(np.int64),
        cum(pred == true),
        cum(pp & tp_),
        cum(pp & ~tp_),
        cum(~pp & ~tp_),
        cum(~pp & tp_),
    )


@dataclass(frozen=True)
class RejectCurve:
    """Metric value against acceptance rate.

    Points run from full acceptance down, so ``acceptance_rate`` strictly
    decreases and ``theta`` strictly increases. Averaged curves live on a fixed
    acceptance grid and carry NaN thresholds.
    """

    metric: str
    theta: np.ndarray
    acceptance_rate: np.ndarray
    value: np.ndarray

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        arrs = [np.asarray(a, dtype=np.float64) for a in (self.theta, self.acceptance_rate, self.value)]
        if not arrs[0].shape == arrs[1].shape == arrs[2].shape or arrs[0].ndim != 1:
            raise ValueError("theta, acceptance_rate and value must be equal-length vectors")
        for a in arrs:
            a.setflags(write=False)
        object.__setattr__(self, "theta", arrs[0])
        object.__setattr__(self, "acceptance_rate", arrs[1])
        object.__setattr__(self, "value", arrs[2])

    def __len__(self):
        return self.value.shape[0]

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.value)

    def at_full_acceptance(self) -> float:
        return float(self.value[0])


def _ratio(num, den) -> np.ndarray:
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    return np.divide(num, den, out=np.full(num.shape, np.nan), where=den > 0)


def _require_binary(s: CertaintyScores, positive_class: int) -> None:
    labels = np.union1d(np.union1d(s.true, s.predicted), [positive_class])
    if labels.size > 2:
        raise UnsupportedMeasureError(
            f"precision/recall reject curves need binary labels; found {labels.tolist()}"
        )


def _values(sw: Sweep, metric: str) -> np.ndarray:
    if metric == "accuracy":
        return _ratio(sw.correct, sw.accepted)
    if metric == "precision":
        return _ratio(sw.tp, sw.tp + sw.fp)
    if metric == "recall":
        return _ratio(sw.tp, sw.tp + sw.fn)
    if metric == "f1":
        # 2PR/(P+R) == 2tp/(2tp+fp+fn) wherever both P and R are defined
        f1 = _ratio(2 * sw.tp, 2 * sw.tp + sw.fp + sw.fn)
        f1[(sw.tp + sw.fp == 0) | (sw.tp + sw.fn == 0)] = np.nan
        return f1
    raise ValueError(f"unknown metric {metric!r}")


def curve(s: CertaintyScores, metric: str, positive_class: Optional[int] = None) -> RejectCurve:
    if metric != "accuracy":
        if positive_class is None:
            raise ValueError(f"the {metric} curve needs a positive class")
        _require_binary(s, positive_class)
    sw = sweep(s, positive_class)
    return RejectCurve(metric, sw.theta, sw.acceptance_rate, _values(sw, metric))


def arc(s: CertaintyScores) -> RejectCurve:
    """Accuracy of ``X_theta`` against acceptance rate."""
    return curve(s, "accuracy")


def prc(s: CertaintyScores, positive_class: int) -> RejectCurve:
    """Precision ``tp / (tp + fp)`` of ``X_theta`` against acceptance rate."""
    return curve(s, "precision", positive_class)


def rrc(s: CertaintyScores, positive_class: int) -> RejectCurve:
    """Recall ``tp / (tp + fn)`` within ``X_theta``.

    Rejected positives leave the denominator: only accepted false negatives count.
    """
    return curve(s, "recall", positive_class)


def f1_curve(s: CertaintyScores, positive_class: int) -> RejectCurve:
    return curve(s, "f1", positive_class)


def plain_metrics(s: CertaintyScores, positive_class: int) -> dict:
    """Accuracy, precision, recall and F1 over all samples (no rejection)."""
    c = confusion_at(s, -np.inf, positive_class)
    nan = float("nan")
    prec = c.tp / (c.tp + c.fp) if c.tp + c.fp else nan
    rec = c.tp / (c.tp + c.fn) if c.tp + c.fn else nan
    f1 = 2 * c.tp / (2 * c.tp + c.fp + c.fn) if c.tp + c.fp and c.tp + c.fn else nan
    return {
        "accuracy": float(np.mean(s.predicted == s.true)),
        "precision": prec,
        "recall": rec,
        "f1": f1,
    }


def _resample(c: RejectCurve, grid: np.ndarray) -> np.ndarray:
    # step interpolation: at acceptance a use the most selective point still accepting >= a
    n_at_least = np.sum(c.acceptance_rate[None, :] >= grid[:, None] - 1e-12, axis=1)
    return c.value[np.maximum(n_at_least - 1, 0)]


def average_curves(curves: Sequence[RejectCurve], grid: np.ndarray = None) -> RejectCurve:
    """Pointwise mean of step-resampled curves, ignoring undefined values.

    The result runs over ``grid`` (default 1.00, 0.99, ..., 0.00) in decreasing order.
    """
    curves = list(curves)
    if not curves:
        raise ValueError("need at least one curve to average")
    kinds = {c.metric for c in curves}
    if len(kinds) > 1:
        raise ValueError(f"cannot average curves of different metrics {sorted(kinds)}")
    grid = (ACCEPTANCE_GRID if grid is None else np.asarray(grid, dtype=np.float64))[::-1]
    stack = np.vstack([_resample(c, grid) for c in curves])
    defined = ~np.isnan(stack)
    n = defined.sum(axis=0)
    total = np.where(defined, stack, 0.0).sum(axis=0)
    mean = np.divide(total, n, out=np.full(grid.shape, np.nan), where=n > 0)
    return RejectCurve(curves[0].metric, np.full(grid.shape, np.nan), grid, mean)


def _fmt(v: float) -> str:
    return "" if np.isnan(v) else repr(float(v))


def write_curve_csv(c: RejectCurve, path: Union[str, Path]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta", "acceptance_rate", "value"])
        for t, a, v in zip(c.theta, c.acceptance_rate, c.value):
            w.writerow([_fmt(t), _fmt(a), _fmt(v)])


def read_curve_csv(path: Union[str, Path], metric: str = None) -> RejectCurve:
    path = Path(path)
    if metric is None:
        head = path.stem.split("_", 1)[0]
        metric = head if head in METRICS else "accuracy"
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        parse = lambda v: float(v) if v.strip() else np.nan  # noqa: E731
        cols = [[parse(r[k]) for r in rows] for k in ("theta", "acceptance_rate", "value")]
    except (OSError, KeyError, AttributeError, ValueError) as exc:
        raise DataError(f"{path}: malformed curve file ({exc})") from None
    if not rows or np.any(np.isnan(cols[1])):
        raise DataError(f"{path}: curve file needs rows with an acceptance_rate")
    return RejectCurve(metric, *cols)
