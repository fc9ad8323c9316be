"""Certainty measures and the global reject option.

A sample is accepted iff its certainty is at least the threshold theta; the
accepted set ``X_theta`` is what the reject curves evaluate.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from rejectlab.bayes import KnownMixture, bayes_posterior
from rejectlab.core import as_vector
from rejectlab.data import Dataset
from rejectlab.errors import DataError, ModelStructureError, UnsupportedMeasureError
from rejectlab.models import LvqModel, Variant, distance_matrix, posterior_many, predict_many

__all__ = [
    "CertaintyScores",
    "MEASURES",
    "accept_mask",
    "conf",
    "default_measure",
    "read_scores_csv",
    "relsim",
    "relsim_many",
    "score_dataset",
    "write_scores_csv",
]

MEASURES = ("relsim", "conf", "bayes")


@dataclass(frozen=True)
class CertaintyScores:
    certainty: np.ndarray
    predicted: np.ndarray
    true: np.ndarray

    def __post_init__(self):
        r = np.array(self.certainty, dtype=np.float64)
        p = np.array(self.predicted, dtype=np.int64)
        t = np.array(self.true, dtype=np.int64)
        if r.ndim != 1 or r.shape != p.shape or r.shape != t.shape:
            raise DataError("certainty, predicted and true must be equal-length vectors")
        if not np.all(np.isfinite(r)) or np.any(r < 0) or np.any(r > 1):
            raise DataError("certainties must be finite and lie in [0, 1]")
        for a in (r, p, t):
            a.setflags(write=False)
        object.__setattr__(self, "certainty", r)
        object.__setattr__(self, "predicted", p)
        object.__setattr__(self, "true", t)

    def __len__(self):
        return self.certainty.shape[0]


def relsim_many(m: LvqModel, X) -> np.ndarray:
    if m.variant is Variant.RSLVQ:
        raise UnsupportedMeasureError("RelSim needs a GLVQ-family model; use conf for RSLVQ")
    if np.unique(m.labels).size < 2:
        raise ModelStructureError("RelSim needs prototypes of at least two classes")
    D = distance_matrix(m, X)
    win = np.argmin(D, axis=1)
    d_plus = D[np.arange(D.shape[0]), win]
    other = m.labels[None, :] != m.labels[win][:, None]
    d_minus = np.where(other, D, np.inf).min(axis=1)
    s = d_minus + d_plus
    # d+ = d- = 0 is maximal ambiguity
    r = np.divide(d_minus - d_plus, s, out=np.zeros_like(s), where=s > 0)
    return np.clip(r, 0.0, 1.0)


def relsim(m: LvqModel, x) -> float:
    """``(d- - d+) / (d- + d+)``: winner distance against the best other-class distance."""
    return float(relsim_many(m, as_vector(x)[None, :])[0])


def conf(m: LvqModel, x) -> float:
    """Largest class posterior of an RSLVQ model."""
    if m.variant is not Variant.RSLVQ:
        raise UnsupportedMeasureError("Conf needs a probabilistic (RSLVQ) model")
    return float(posterior_many(m, as_vector(x)[None, :])[0].max())


def default_measure(model) -> str:
    if isinstance(model, KnownMixture):
        return "bayes"
    return "conf" if model.variant is Variant.RSLVQ else "relsim"


def score_dataset(model: Union[LvqModel, KnownMixture], d: Dataset, measure: str = None) -> CertaintyScores:
    """Certainty, prediction and truth for every sample of ``d``.

    Pairings: relsim with GLVQ/GMLVQ/LGMLVQ, conf with RSLVQ, bayes with a
    :class:`KnownMixture`.
    """
    measure = measure or default_measure(model)
    if measure not in MEASURES:
        raise UnsupportedMeasureError(f"unknown measure {measure!r}; choose from {MEASURES}")
    if isinstance(model, KnownMixture):
        if measure != "bayes":
            raise UnsupportedMeasureError("a known mixture is scored with the bayes measure only")
        p = bayes_posterior(model, d.X)
        return CertaintyScores(p.max(axis=1), np.argmax(p, axis=1) + 1, d.y)
    if measure == "bayes":
        raise UnsupportedMeasureError("the bayes measure needs a known mixture, not a trained model")
    if measure == "conf":
        if model.variant is not Variant.RSLVQ:
            raise UnsupportedMeasureError("conf needs an RSLVQ model")
        p = posterior_many(model, d.X)
        return CertaintyScores(np.clip(p.max(axis=1), 0.0, 1.0), np.argmax(p, axis=1) + 1, d.y)
    return CertaintyScores(relsim_many(model, d.X), predict_many(model, d.X), d.y)


def accept_mask(s: CertaintyScores, theta: float) -> np.ndarray:
    """Boolean mask of ``X_theta = {x : r(x) >= theta}``."""
    return s.certainty >= theta


def write_scores_csv(s: CertaintyScores, path: Union[str, Path]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "certainty", "predicted", "true"])
        for i, (r, p, t) in enumerate(zip(s.certainty, s.predicted, s.true)):
            w.writerow([i, repr(float(r)), int(p), int(t)])


def read_scores_csv(path: Union[str, Path]) -> CertaintyScores:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    try:
        return CertaintyScores(
            [float(r["certainty"]) for r in rows],
            [int(r["predicted"]) for r in rows],
            [int(r["true"]) for r in rows],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed scores file ({exc})") from None
