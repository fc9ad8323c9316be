"""Repeated stratified cross-validation of reject options.

For every (repeat, fold): z-score with training-fold statistics, train, score
the test fold, and compute the four reject curves. Fold curves are then
averaged per metric on the acceptance grid.
"""

from __future__ import annotations

import csv
import json
import logging
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

import rejectlab
from rejectlab import kernels
from rejectlab.bayes import KnownMixture
from rejectlab.core import derive_seed
from rejectlab.curves import METRICS, RejectCurve, average_curves, curve, plain_metrics, write_curve_csv
from rejectlab.data import (
    Dataset,
    GaussianSpec,
    generate_gaussians,
    generate_imbalanced_proxy,
    load_csv,
    load_haberman,
    make_fold_plan,
    standardize,
)
from rejectlab.errors import DataError, TrainingDivergenceError, UnsupportedMeasureError
from rejectlab.models import TrainConfig, Variant, train
from rejectlab.reject import score_dataset

log = logging.getLogger(__name__)

BUILTIN_GAUSS = "builtin:gauss"
BUILTIN_PROXY = "builtin:adrenal-proxy"
BUILTIN_HABERMAN = "builtin:haberman"
BUILTINS = (BUILTIN_GAUSS, BUILTIN_PROXY, BUILTIN_HABERMAN)
MANIFEST_FORMAT = "rejectlab-experiment"


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce one experiment.

    ``data`` is a CSV path or one of the built-in sources ``builtin:gauss``,
    ``builtin:adrenal-proxy`` and ``builtin:haberman``. ``positive_class`` names an
    original label; ``None`` picks the minority class of each training fold.
    """

    data: str = BUILTIN_GAUSS
    label_col: Union[str, int] = -1
    positive_class: Optional[str] = None
    samples_per_class: int = 1000
    noise: float = 0.05
    model: str = "rslvq"
    measure: Optional[str] = None
    train: TrainConfig = field(default_factory=TrainConfig)
    folds: int = 10
    repeats: int = 10
    seed: int = 0

    def __post_init__(self):
        variant = Variant(self.model)
        object.__setattr__(self, "model", variant.value)
        measure = self.measure or ("conf" if variant is Variant.RSLVQ else "relsim")
        if measure == "conf" and variant is not Variant.RSLVQ:
            raise UnsupportedMeasureError("conf needs the rslvq model")
        if measure == "relsim" and variant is Variant.RSLVQ:
            raise UnsupportedMeasureError("relsim needs a glvq, gmlvq or lgmlvq model")
        if measure not in ("conf", "relsim"):
            raise UnsupportedMeasureError(f"trained models support conf or relsim, not {measure!r}")
        object.__setattr__(self, "measure", measure)
        if self.folds < 2 or self.repeats < 1:
            raise ValueError("need folds >= 2 and repeats >= 1")

    @property
    def tag(self) -> str:
        return f"{self.model}_{self.measure}"

    @property
    def gaussian_spec(self) -> GaussianSpec:
        return GaussianSpec.reference(self.samples_per_class, self.noise)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["train"] = asdict(self.train)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        d = dict(d)
        d["train"] = TrainConfig(**d.get("train", {}))
        return cls(**d)

    @classmethod
    def from_manifest(cls, path: Union[str, Path]) -> "ExperimentSpec":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if doc.get("format") != MANIFEST_FORMAT:
            raise DataError(f"{path}: not an experiment manifest")
        return cls.from_dict(doc["spec"])


def load_source(spec: ExperimentSpec) -> Dataset:
    if spec.data == BUILTIN_GAUSS:
        d = generate_gaussians(spec.gaussian_spec, derive_seed(spec.seed, 0))
    elif spec.data == BUILTIN_PROXY:
        d = generate_imbalanced_proxy(derive_seed(spec.seed, 0))
    elif spec.data == BUILTIN_HABERMAN:
        return load_haberman(spec.positive_class)
    else:
        return load_csv(spec.data, spec.label_col, spec.positive_class)
    if spec.positive_class is not None:
        if spec.positive_class not in d.class_names:
            raise DataError(f"positive class {spec.positive_class!r} not among {list(d.class_names)}")
        d = replace(d, positive_class=d.class_names.index(spec.positive_class) + 1)
    return d


@dataclass(frozen=True)
class FoldResult:
    repeat: int
    fold: int
    positive_class: int
    curves: dict
    plain: dict


@dataclass(frozen=True)
class ExperimentResult:
    spec: ExperimentSpec
    tag: str
    averaged: dict
    folds: list

    @property
    def manifest(self) -> dict:
        return {
            "format": MANIFEST_FORMAT,
            "version": 1,
            "spec": self.spec.to_dict(),
            "series": self.tag,
            "environment": {
                "rejectlab": rejectlab.__version__,
                "numpy": np.__version__,
                "python": platform.python_version(),
                "kernels": kernels.BACKEND,
            },
        }

    def curve_paths(self, out_dir: Union[str, Path]) -> dict:
        return {m: Path(out_dir) / "curves" / f"{m}_{self.tag}.csv" for m in METRICS}

    def write(self, out_dir: Union[str, Path], plot: bool = True) -> Path:
        out = Path(out_dir)
        (out / "curves").mkdir(parents=True, exist_ok=True)
        paths = self.curve_paths(out)
        for metric, c in self.averaged.items():
            write_curve_csv(c, paths[metric])
        with (out / "folds.csv").open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["repeat", "fold", "positive_class", *METRICS])
            for fr in self.folds:
                w.writerow([fr.repeat, fr.fold, fr.positive_class, *(repr(fr.plain[m]) for m in METRICS)])
        (out / "manifest.json").write_text(json.dumps(self.manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        if plot:
            from rejectlab.plotting import render_curves

            series = {m: [(self.tag, self.averaged[m])] for m in METRICS}
            (out / "plot.svg").write_text(render_curves(series), encoding="utf-8")
        return out


def _fold_curves(scores, positive) -> dict:
    return {m: curve(scores, m, None if m == "accuracy" else positive) for m in METRICS}


def _run_fold(job) -> FoldResult:
    data, spec, r, f, train_idx, test_idx = job
    train_set = data.subset(train_idx)
    test_set = data.subset(test_idx)
    positive = train_set.resolve_positive()
    train_z, rec = standardize(train_set)
    test_z = test_set.with_features(rec.transform(test_set.X))
    cfg = replace(spec.train, seed=derive_seed(spec.seed, 2, r, f))
    try:
        model = train(train_z, cfg, spec.model)
    except TrainingDivergenceError as exc:
        raise TrainingDivergenceError(exc.epoch, f"repeat {r}, fold {f}: {exc}") from exc
    scores = score_dataset(model, test_z, spec.measure)
    return FoldResult(r, f, positive, _fold_curves(scores, positive), plain_metrics(scores, positive))


def _run_bayes_fold(job) -> FoldResult:
    data, km, r, f, train_idx, test_idx = job
    positive = data.subset(train_idx).resolve_positive()
    scores = score_dataset(km, data.subset(test_idx), "bayes")
    return FoldResult(r, f, positive, _fold_curves(scores, positive), plain_metrics(scores, positive))


def _execute(fn, jobs, n_workers: int) -> list:
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as ex:
            results = list(ex.map(fn, jobs))
    else:
        results = [fn(j) for j in jobs]
    return sorted(results, key=lambda fr: (fr.repeat, fr.fold))


def _average(folds) -> dict:
    return {m: average_curves([fr.curves[m] for fr in folds]) for m in METRICS}


def run_experiment(spec: ExperimentSpec, jobs: int = 1, data: Dataset = None) -> ExperimentResult:
    """Run the full protocol; results do not depend on ``jobs``."""
    data = data if data is not None else load_source(spec)
    plan = make_fold_plan(data, spec.folds, spec.repeats, derive_seed(spec.seed, 1))
    work = [(data, spec, r, f, tr, te) for r, f, tr, te in plan]
    log.info("%s on %s: %d folds", spec.tag, spec.data, len(work))
    folds = _execute(_run_fold, work, jobs)
    return ExperimentResult(spec, spec.tag, _average(folds), folds)


def run_bayes_baseline(spec: ExperimentSpec, jobs: int = 1) -> ExperimentResult:
    """Score the known generating mixture on the same test folds (no training)."""
    if spec.data != BUILTIN_GAUSS:
        raise UnsupportedMeasureError("the Bayes baseline needs generated Gaussian data with a known density")
    data = load_source(spec)
    km = KnownMixture.from_spec(spec.gaussian_spec)
    plan = make_fold_plan(data, spec.folds, spec.repeats, derive_seed(spec.seed, 1))
    work = [(data, km, r, f, tr, te) for r, f, tr, te in plan]
    folds = _execute(_run_bayes_fold, work, jobs)
    return ExperimentResult(spec, "bayes_bayes", _average(folds), folds)
