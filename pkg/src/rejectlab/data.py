"""Datasets: CSV ingestion, z-scoring, synthetic generators and CV fold plans."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from rejectlab.core import make_rng
from rejectlab.errors import DataError, StratificationError

__all__ = [
    "Dataset",
    "FoldPlan",
    "GaussianSpec",
    "Standardizer",
    "generate_gaussians",
    "generate_imbalanced_proxy",
    "load_csv",
    "load_haberman",
    "make_fold_plan",
    "minority_class",
    "stratified_counts",
    "standardize",
    "write_csv",
]


def minority_class(y: np.ndarray, n_classes: int) -> int:
    """Least frequent label among those present in ``y``; ties go to the lowest label."""
    counts = np.bincount(np.asarray(y), minlength=n_classes + 1)[1:]
    present = np.flatnonzero(counts > 0)
    if present.size == 0:
        raise DataError("no labels present")
    return int(present[np.argmin(counts[present])] + 1)


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with integer labels ``1..Z``.

    ``class_names[k - 1]`` is the original name of label ``k``. ``positive_class``
    is the label treated as positive by precision and recall; ``None`` defers to
    the minority-class rule (see :meth:`resolve_positive`).
    """

    X: np.ndarray
    y: np.ndarray
    class_names: tuple = ()
    positive_class: Optional[int] = None
    feature_names: tuple = ()

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64)
        y = np.array(self.y, dtype=np.int64)
        if X.ndim != 2 or X.shape[1] == 0:
            raise DataError(f"X must be a 2-d matrix with at least one feature, got shape {X.shape}")
        if y.shape != (X.shape[0],) or X.shape[0] == 0:
            raise DataError(f"need one label per row and at least one row; got {X.shape[0]} rows, {y.shape} labels")
        if not np.all(np.isfinite(X)):
            raise DataError("features must be finite")
        names = tuple(str(c) for c in self.class_names) or tuple(str(k) for k in range(1, int(y.max()) + 1))
        if len(names) < 2:
            raise DataError("need at least two classes")
        if y.min() < 1 or y.max() > len(names):
            raise DataError(f"labels must lie in 1..{len(names)}")
        if self.positive_class is not None and not 1 <= self.positive_class <= len(names):
            raise DataError(f"positive class {self.positive_class} outside 1..{len(names)}")
        fnames = tuple(self.feature_names) or tuple(f"x{i + 1}" for i in range(X.shape[1]))
        if len(fnames) != X.shape[1]:
            raise DataError("feature_names length does not match the number of columns")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "class_names", names)
        object.__setattr__(self, "feature_names", fnames)

    def __len__(self):
        return self.X.shape[0]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.n_classes + 1)[1:]

    def resolve_positive(self) -> int:
        if self.positive_class is not None:
            return self.positive_class
        return minority_class(self.y, self.n_classes)

    def subset(self, index) -> "Dataset":
        return Dataset(self.X[index], self.y[index], self.class_names, self.positive_class, self.feature_names)

    def with_features(self, X) -> "Dataset":
        return Dataset(X, self.y, self.class_names, self.positive_class, self.feature_names)


# --- CSV ---------------------------------------------------------------------


def load_csv(
    path: Union[str, Path],
    label_column: Union[str, int] = -1,
    positive_class: Optional[str] = None,
    delimiter: str = ",",
) -> Dataset:
    """Read a headed CSV whose non-label columns are all numeric.

    ``label_column`` is a header name or a (possibly negative) column index.
    Labels are renumbered ``1..Z`` in order of first appearance. ``positive_class``
    names an original label value.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if len(rows) < 2:
        raise DataError(f"{path}: need a header row and at least one data row")
    header = [h.strip() for h in rows[0]]

    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not found in header {header}")
        label_idx = header.index(label_column)
    else:
        label_idx = int(label_column)
        if not -len(header) <= label_idx < len(header):
            raise DataError(f"{path}: label column index {label_idx} out of range for {len(header)} columns")
        label_idx %= len(header)

    feature_idx = [j for j in range(len(header)) if j != label_idx]
    if not feature_idx:
        raise DataError(f"{path}: no feature columns")
    X = np.empty((len(rows) - 1, len(feature_idx)))
    raw_labels = []
    for i, row in enumerate(rows[1:]):
        line = i + 2
        if len(row) != len(header):
            raise DataError(f"{path}: line {line} has {len(row)} fields, header has {len(header)}")
        raw_labels.append(row[label_idx].strip())
        for k, j in enumerate(feature_idx):
            cell = row[j].strip()
            try:
                X[i, k] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric value {cell!r} at line {line}, column {header[j]!r}"
                ) from None
            if not math.isfinite(X[i, k]):
                raise DataError(f"{path}: non-finite value {cell!r} at line {line}, column {header[j]!r}")

    names = list(dict.fromkeys(raw_labels))
    if len(names) < 2:
        raise DataError(f"{path}: label column {header[label_idx]!r} holds a single class")
    lookup = {name: k + 1 for k, name in enumerate(names)}
    pos = None
    if positive_class is not None:
        if str(positive_class) not in lookup:
            raise DataError(f"{path}: positive class {positive_class!r} not among labels {names}")
        pos = lookup[str(positive_class)]
    return Dataset(
        X,
        np.array([lookup[v] for v in raw_labels]),
        tuple(names),
        pos,
        tuple(header[j] for j in feature_idx),
    )


def write_csv(d: Dataset, path: Union[str, Path], label_column: str = "label") -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*d.feature_names, label_column])
        for x, label in zip(d.X, d.y):
            w.writerow([*(repr(float(v)) for v in x), d.class_names[label - 1]])


def load_haberman(positive_class: Optional[str] = None) -> Dataset:
    """The UCI Haberman survival data (306 rows), shipped with the package.

    Label ``1`` survived five years or longer, ``2`` died within five years.
    """
    ref = resources.files("rejectlab") / "datasets" / "haberman.csv"
    with resources.as_file(ref) as p:
        return load_csv(p, "survival", positive_class)


# --- standardization -----------------------------------------------------------


@dataclass(frozen=True)
class Standardizer:
    """Per-feature z-score statistics (population std). Constant features map to 0."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X) -> "Standardizer":
        X = np.asarray(X, dtype=np.float64)
        return cls(X.mean(axis=0), X.std(axis=0))

    @property
    def constant(self) -> np.ndarray:
        return self.std < 1e-12

    def transform(self, X) -> np.ndarray:
        scale = np.where(self.constant, 1.0, self.std)
        out = (np.asarray(X, dtype=np.float64) - self.mean) / scale
        out[:, self.constant] = 0.0
        return out

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d) -> "Standardizer":
        return cls(np.asarray(d["mean"], dtype=np.float64), np.asarray(d["std"], dtype=np.float64))


def standardize(d: Dataset) -> tuple:
    """Z-score ``d``; returns ``(standardized dataset, Standardizer)``."""
    rec = Standardizer.fit(d.X)
    return d.with_features(rec.transform(d.X)), rec


# --- synthetic data --------------------------------------------------------------


@dataclass(frozen=True)
class GaussianSpec:
    """Diagonal Gaussian classes overlaid with uniform noise.

    ``box`` is ``(low, high)``; when omitted it is the union over classes of
    ``[mean - 3 std, mean + 3 std]``.
    """

    means: np.ndarray
    stds: np.ndarray
    samples_per_class: int = 1000
    noise_fraction: float = 0.05
    box: Optional[tuple] = None

    def __post_init__(self):
        means = np.array(self.means, dtype=np.float64)
        stds = np.array(self.stds, dtype=np.float64)
        if means.ndim != 2 or means.shape != stds.shape or means.shape[0] < 2:
            raise DataError("means and stds must both be (classes >= 2, dims) arrays of equal shape")
        if not np.all(stds > 0):
            raise DataError("standard deviations must be positive")
        if int(self.samples_per_class) < 1:
            raise DataError("samples_per_class must be positive")
        if not 0.0 <= self.noise_fraction < 1.0:
            raise DataError("noise_fraction must lie in [0, 1)")
        if self.box is None:
            box = ((means - 3 * stds).min(axis=0), (means + 3 * stds).max(axis=0))
        else:
            box = (np.array(self.box[0], dtype=np.float64), np.array(self.box[1], dtype=np.float64))
        if box[0].shape != (means.shape[1],) or box[1].shape != (means.shape[1],) or not np.all(box[1] > box[0]):
            raise DataError("noise box must have positive extent in every dimension")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)
        object.__setattr__(self, "samples_per_class", int(self.samples_per_class))
        object.__setattr__(self, "box", box)

    @classmethod
    def reference(cls, samples_per_class: int = 1000, noise_fraction: float = 0.05) -> "GaussianSpec":
        """Two overlapping 2-d classes used by the built-in `builtin:gauss` source."""
        return cls(
            means=[[-4.0, 4.5], [4.0, 0.5]],
            stds=[[5.2, 7.1], [2.5, 2.1]],
            samples_per_class=samples_per_class,
            noise_fraction=noise_fraction,
        )

    @property
    def n_classes(self) -> int:
        return self.means.shape[0]

    @property
    def n_noise(self) -> int:
        """Uniform-replaced points per class."""
        return math.floor(self.noise_fraction * self.samples_per_class)

    def to_dict(self) -> dict:
        return {
            "means": self.means.tolist(),
            "stds": self.stds.tolist(),
            "samples_per_class": self.samples_per_class,
            "noise_fraction": self.noise_fraction,
            "box": [self.box[0].tolist(), self.box[1].tolist()],
        }

    @classmethod
    def from_dict(cls, d) -> "GaussianSpec":
        return cls(d["means"], d["stds"], d["samples_per_class"], d["noise_fraction"], tuple(d["box"]))


def generate_gaussians(spec: GaussianSpec, seed: int) -> Dataset:
    rng = make_rng(seed)
    low, high = spec.box
    blocks, labels = [], []
    for c in range(spec.n_classes):
        pts = spec.means[c] + spec.stds[c] * rng.standard_normal((spec.samples_per_class, spec.means.shape[1]))
        noisy = rng.choice(spec.samples_per_class, size=spec.n_noise, replace=False)
        pts[noisy] = rng.uniform(low, high, size=(spec.n_noise, low.shape[0]))
        blocks.append(pts)
        labels.append(np.full(spec.samples_per_class, c + 1))
    return Dataset(np.vstack(blocks), np.concatenate(labels))


def generate_imbalanced_proxy(
    seed: int,
    n_majority: int = 102,
    n_minority: int = 45,
    n_features: int = 32,
    shift: float = 2.5,
    hidden_fraction: float = 0.3,
) -> Dataset:
    """Imbalanced two-class stand-in for a small clinical cohort.

    Defaults give 102 vs 45 samples with 32 features. The majority class
    (label 1) is a standard normal cloud. Most of the minority class (label 2)
    is the same cloud moved a distance ``shift`` along a direction spread over
    the first eight features, so the two overlap near the boundary. The other
    ``hidden_fraction`` of the minority is a tight cloud at the majority centre.
    Those hidden members are confidently misclassified, which is what makes
    recall fall as uncertain samples are rejected.
    """
    if n_majority < 1 or n_minority < 1 or n_features < 1:
        raise DataError("class sizes and feature count must be positive")
    rng = make_rng(seed)
    direction = np.zeros(n_features)
    direction[: min(8, n_features)] = 1.0
    direction /= np.linalg.norm(direction)
    majority = rng.standard_normal((n_majority, n_features))
    n_hidden = int(round(hidden_fraction * n_minority))
    minority = rng.standard_normal((n_minority, n_features))
    minority[n_hidden:] += shift * direction
    minority[:n_hidden] *= 0.5
    X = np.vstack([majority, minority])
    y = np.concatenate([np.ones(n_majority, dtype=np.int64), np.full(n_minority, 2)])
    order = rng.permutation(len(y))
    return Dataset(X[order], y[order], ("benign", "malignant"), 2)


# --- cross-validation ---------------------------------------------------------------


@dataclass(frozen=True)
class FoldPlan:
    """Stratified fold assignment for ``repeats`` independent k-fold partitions.

    ``assignment[r, i]`` is the fold holding sample ``i`` in repeat ``r``.
    """

    k: int
    repeats: int
    seed: int
    assignment: np.ndarray = field(repr=False)

    def test_index(self, repeat: int, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment[repeat] == fold)

    def train_index(self, repeat: int, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment[repeat] != fold)

    def __iter__(self) -> Iterator[tuple]:
        """Yield ``(repeat, fold, train_index, test_index)``."""
        for r in range(self.repeats):
            for f in range(self.k):
                yield r, f, self.train_index(r, f), self.test_index(r, f)

    def __len__(self):
        return self.k * self.repeats


def _augment(cap, source, sink) -> bool:
    """One BFS augmenting path of unit flow in residual matrix ``cap``."""
    parent = {source: None}
    queue = [source]
    for u in queue:
        for v in np.flatnonzero(cap[u] > 0):
            v = int(v)
            if v not in parent:
                parent[v] = u
                if v == sink:
                    while parent[v] is not None:
                        cap[parent[v], v] -= 1
                        cap[v, parent[v]] += 1
                        v = parent[v]
                    return True
                queue.append(v)
    return False


def stratified_counts(class_sizes: Sequence[int], k: int) -> np.ndarray:
    """Members of each class per fold, shape ``(classes, k)``.

    Fold sizes differ by at most one, and every count is the floor or ceiling of
    its proportional share ``n_c * |fold| / N`` (controlled rounding, solved as a
    small max-flow).
    """
    n_c = np.asarray(class_sizes, dtype=np.int64)
    total = int(n_c.sum())
    sizes = np.array([total // k + (f < total % k) for f in range(k)], dtype=np.int64)
    share = np.outer(n_c, sizes)
    counts = share // total
    z = n_c.size
    # nodes: 0 source, 1..z classes, z+1..z+k folds, z+k+1 sink
    sink = z + k + 1
    cap = np.zeros((sink + 1, sink + 1), dtype=np.int64)
    cap[0, 1 : z + 1] = n_c - counts.sum(axis=1)
    cap[1 : z + 1, z + 1 : z + k + 1] = share % total != 0
    cap[z + 1 : z + k + 1, sink] = sizes - counts.sum(axis=0)
    need = int(cap[0].sum())
    while need and _augment(cap, 0, sink):
        need -= 1
    if need:
        raise AssertionError("controlled rounding found no feasible fold allocation")
    # a unit on a class->fold edge is visible as the reverse residual capacity
    return counts + cap[z + 1 : z + k + 1, 1 : z + 1].T


def make_fold_plan(d: Union[Dataset, Sequence[int]], k: int = 10, repeats: int = 10, seed: int = 0) -> FoldPlan:
    """Stratified repeated k-fold plan.

    The per-fold class counts come from :func:`stratified_counts`; each repeat
    shuffles every class and deals its members into folds by those counts.
    """
    y = d.y if isinstance(d, Dataset) else np.asarray(d, dtype=np.int64)
    if k < 2:
        raise DataError("need at least two folds")
    if repeats < 1:
        raise DataError("need at least one repeat")
    labels, sizes = np.unique(y, return_counts=True)
    small = labels[sizes < k]
    if small.size:
        raise StratificationError(
            f"cannot stratify into {k} folds: class(es) {small.tolist()} have fewer than {k} members"
        )
    counts = stratified_counts(sizes, k)
    fold_of_slot = [np.repeat(np.arange(k), row) for row in counts]
    assignment = np.empty((repeats, y.size), dtype=np.int64)
    for r in range(repeats):
        rng = make_rng(seed, r)
        for c, slots in zip(labels, fold_of_slot):
            assignment[r, rng.permutation(np.flatnonzero(y == c))] = slots
    assignment.setflags(write=False)
    return FoldPlan(k, repeats, seed, assignment)
