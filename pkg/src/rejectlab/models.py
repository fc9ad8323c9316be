"""Prototype classifiers: GLVQ, GMLVQ, LGMLVQ and RSLVQ.

All four are trained by per-sample stochastic gradient steps. The GLVQ family
descends the relative-distance cost ``sum_i (d+ - d-) / (d+ + d-)``; RSLVQ
ascends the conditional log-likelihood of a labelled isotropic Gaussian mixture
centred on the prototypes.

A model stores prototypes as one ``(J, n)`` array with a parallel label vector.
Metric factors live in a ``(M, n, n)`` array: ``M == 1`` for GMLVQ and
``M == J`` for LGMLVQ (one factor per prototype); GLVQ and RSLVQ carry none.
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from rejectlab import kernels
from rejectlab.core import MetricMatrix, as_vector, make_rng
from rejectlab.data import Dataset, Standardizer
from rejectlab.errors import (
    DataError,
    DimensionMismatchError,
    ModelStructureError,
    TrainingDivergenceError,
)

log = logging.getLogger(__name__)

MODEL_FORMAT = "rejectlab-model"
MODEL_FORMAT_VERSION = 1


class Variant(str, enum.Enum):
    GLVQ = "glvq"
    GMLVQ = "gmlvq"
    LGMLVQ = "lgmlvq"
    RSLVQ = "rslvq"

    @property
    def learns_metric(self) -> bool:
        return self in (Variant.GMLVQ, Variant.LGMLVQ)


@dataclass(frozen=True)
class Prototype:
    w: np.ndarray
    label: int


@dataclass(frozen=True)
class TrainConfig:
    prototypes_per_class: int = 1
    epochs: int = 100
    learning_rate: float = 0.01
    learning_rate_metric: Optional[float] = None  # None: 0.1 * learning_rate
    sigma: float = 1.0
    seed: int = 0
    init_jitter: float = 0.01

    def __post_init__(self):
        if self.prototypes_per_class < 1:
            raise ValueError("prototypes_per_class must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not self.learning_rate > 0 or not self.sigma > 0:
            raise ValueError("learning rate and sigma must be positive")
        if self.learning_rate_metric is not None and not self.learning_rate_metric > 0:
            raise ValueError("metric learning rate must be positive")

    @property
    def metric_rate(self) -> float:
        if self.learning_rate_metric is None:
            return 0.1 * self.learning_rate
        return self.learning_rate_metric


@dataclass(frozen=True)
class LvqModel:
    variant: Variant
    W: np.ndarray
    labels: np.ndarray
    omegas: Optional[np.ndarray] = None
    sigma: Optional[float] = None
    class_names: tuple = ()
    training_log: tuple = ()
    standardizer: Optional[Standardizer] = None

    def __post_init__(self):
        variant = Variant(self.variant)
        W = np.array(self.W, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int64)
        if W.ndim != 2 or labels.shape != (W.shape[0],) or W.shape[0] == 0:
            raise ModelStructureError("prototype array and label vector disagree")
        if not np.all(np.isfinite(W)):
            raise ModelStructureError("prototypes must be finite")
        names = tuple(self.class_names) or tuple(str(k) for k in range(1, int(labels.max()) + 1))
        if labels.min() < 1 or labels.max() > len(names):
            raise ModelStructureError("prototype label outside the class range")
        omegas = None
        if variant.learns_metric:
            if self.omegas is None:
                raise ModelStructureError(f"{variant.value} needs metric factors")
            omegas = np.array(self.omegas, dtype=np.float64)
            want = 1 if variant is Variant.GMLVQ else W.shape[0]
            if omegas.shape != (want, W.shape[1], W.shape[1]):
                raise ModelStructureError(
                    f"{variant.value} needs omegas of shape {(want, W.shape[1], W.shape[1])}, got {omegas.shape}"
                )
            omegas.setflags(write=False)
        elif self.omegas is not None:
            raise ModelStructureError(f"{variant.value} does not use metric factors")
        sigma = None
        if variant is Variant.RSLVQ:
            if self.sigma is None or not self.sigma > 0:
                raise ModelStructureError("RSLVQ needs sigma > 0")
            sigma = float(self.sigma)
        W.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "variant", variant)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "class_names", names)
        object.__setattr__(self, "training_log", tuple(float(v) for v in self.training_log))

    @property
    def n_features(self) -> int:
        return self.W.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def prototypes(self) -> list:
        return [Prototype(w, int(c)) for w, c in zip(self.W, self.labels)]

    @property
    def metrics(self) -> list:
        if self.omegas is None:
            return []
        return [MetricMatrix(o) for o in self.omegas]

    @property
    def omega_index(self) -> np.ndarray:
        if self.variant is Variant.LGMLVQ:
            return np.arange(self.W.shape[0])
        return np.zeros(self.W.shape[0], dtype=np.int64)


# --- distances and prediction --------------------------------------------------


def _as_batch(m: LvqModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != m.n_features:
        raise DimensionMismatchError(f"model is {m.n_features}-d, input has shape {X.shape}")
    return X


def _distances(X, W, omegas, omega_idx) -> np.ndarray:
    diff = X[:, None, :] - W[None, :, :]
    if omegas is None:
        return np.einsum("njb,njb->nj", diff, diff)
    z = np.einsum("jab,njb->nja", omegas[omega_idx], diff)
    return np.einsum("nja,nja->nj", z, z)


def distance_matrix(m: LvqModel, X) -> np.ndarray:
    """``(N, J)`` distances under each prototype's metric (local one for LGMLVQ)."""
    return _distances(_as_batch(m, X), m.W, m.omegas, m.omega_index)


def _log_class_scores(m: LvqModel, X) -> np.ndarray:
    """Unnormalized log ``p(x, class | W)`` per class, shape ``(N, Z)``."""
    act = -distance_matrix(m, X) / (2.0 * m.sigma**2)
    out = np.full((act.shape[0], m.n_classes), -np.inf)
    for c in range(1, m.n_classes + 1):
        sel = m.labels == c
        if sel.any():
            out[:, c - 1] = np.logaddexp.reduce(act[:, sel], axis=1)
    return out


def posterior_many(m: LvqModel, X) -> np.ndarray:
    if m.variant is not Variant.RSLVQ:
        raise ModelStructureError("posterior is defined for RSLVQ models only")
    s = _log_class_scores(m, X)
    s -= np.logaddexp.reduce(s, axis=1, keepdims=True)
    return np.exp(s)


def posterior(m: LvqModel, x) -> np.ndarray:
    """Class posterior ``p(j | x, W)`` of an RSLVQ model (index ``j - 1`` for label ``j``)."""
    return posterior_many(m, as_vector(x))[0]


def predict_many(m: LvqModel, X) -> np.ndarray:
    if m.variant is Variant.RSLVQ:
        return np.argmax(_log_class_scores(m, X), axis=1) + 1
    return m.labels[np.argmin(distance_matrix(m, X), axis=1)]


def predict(m: LvqModel, x) -> int:
    """Winner-takes-all label; exact distance ties go to the lowest prototype index.

    RSLVQ predicts the class with the highest posterior.
    """
    return int(predict_many(m, as_vector(x))[0])


# --- costs and gradients ----------------------------------------------------------


def _winners(d_row, wlabels, label):
    same = wlabels == label
    if not same.any() or same.all():
        raise ModelStructureError(f"need prototypes of class {label} and of some other class")
    jp = int(np.flatnonzero(same)[np.argmin(d_row[same])])
    jm = int(np.flatnonzero(~same)[np.argmin(d_row[~same])])
    return jp, jm


def glvq_summand(x, label, W, wlabels, omegas=None, omega_idx=None) -> float:
    """``(d+ - d-) / (d+ + d-)`` for one labelled sample."""
    if omega_idx is None:
        omega_idx = np.zeros(len(W), dtype=np.int64)
    d = _distances(np.asarray(x, dtype=np.float64)[None, :], W, omegas, omega_idx)[0]
    jp, jm = _winners(d, wlabels, label)
    return float((d[jp] - d[jm]) / (d[jp] + d[jm]))


def glvq_summand_gradient(x, label, W, wlabels, omegas=None, omega_idx=None):
    """Analytic gradient of :func:`glvq_summand`.

    Returns ``(grad_W, grad_omegas)`` with the shapes of ``W`` and ``omegas``
    (``grad_omegas`` is ``None`` without metric factors).
    """
    x = np.asarray(x, dtype=np.float64)
    if omega_idx is None:
        omega_idx = np.zeros(len(W), dtype=np.int64)
    d = _distances(x[None, :], W, omegas, omega_idx)[0]
    jp, jm = _winners(d, wlabels, label)
    dp, dm = d[jp], d[jm]
    s = dp + dm
    dmu_dp = 2.0 * dm / s**2
    dmu_dm = -2.0 * dp / s**2
    grad_W = np.zeros_like(W)
    grad_O = None if omegas is None else np.zeros_like(omegas)
    for j, coef in ((jp, dmu_dp), (jm, dmu_dm)):
        delta = x - W[j]
        if omegas is None:
            lam_delta = delta
        else:
            om = omegas[omega_idx[j]]
            lam_delta = om.T @ (om @ delta)
            # d/dOmega of delta^T Omega^T Omega delta
            grad_O[omega_idx[j]] += coef * 2.0 * np.outer(om @ delta, delta)
        # d/dw of delta^T Lambda delta
        grad_W[j] += coef * (-2.0 * lam_delta)
    return grad_W, grad_O


def glvq_cost(m: LvqModel, d: Dataset) -> float:
    """Relative-distance cost summed over ``d`` (identity transfer function)."""
    present = set(np.unique(m.labels).tolist())
    missing = set(np.unique(d.y).tolist()) - present
    if missing or len(present) < 2:
        raise ModelStructureError(f"model lacks prototypes for class(es) {sorted(missing)} or has a single class")
    return _glvq_cost(distance_matrix(m, d.X), d.y, m.labels)


def _glvq_cost(D, y, wlabels) -> float:
    same = wlabels[None, :] == y[:, None]
    dp = np.where(same, D, np.inf).min(axis=1)
    dm = np.where(same, np.inf, D).min(axis=1)
    s = dp + dm
    mu = np.divide(dp - dm, s, out=np.zeros_like(s), where=s > 0)
    return float(mu.sum())


def rslvq_loglik(x, label, W, wlabels, sigma) -> float:
    """``log p(label | x, W)`` under equal-width isotropic Gaussians and uniform priors."""
    diff = np.asarray(x, dtype=np.float64) - W
    a = -np.einsum("ja,ja->j", diff, diff) / (2.0 * sigma**2)
    same = wlabels == label
    if not same.any():
        raise ModelStructureError(f"no prototype of class {label}")
    return float(np.logaddexp.reduce(a[same]) - np.logaddexp.reduce(a))


def rslvq_loglik_gradient(x, label, W, wlabels, sigma) -> np.ndarray:
    diff = np.asarray(x, dtype=np.float64) - W
    a = -np.einsum("ja,ja->j", diff, diff) / (2.0 * sigma**2)
    p = np.exp(a - np.logaddexp.reduce(a))
    same = wlabels == label
    a_y = np.where(same, a, -np.inf)
    py = np.exp(a_y - np.logaddexp.reduce(a_y))
    return (py - p)[:, None] * diff / sigma**2


def _rslvq_total_loglik(X, y, W, wlabels, sigma) -> float:
    act = -_distances(X, W, None, None) / (2.0 * sigma**2)
    same = wlabels[None, :] == y[:, None]
    return float(np.sum(np.logaddexp.reduce(np.where(same, act, -np.inf), axis=1) - np.logaddexp.reduce(act, axis=1)))


def rslvq_loglik_total(m: LvqModel, d: Dataset) -> float:
    if m.variant is not Variant.RSLVQ:
        raise ModelStructureError("log-likelihood is defined for RSLVQ models only")
    return _rslvq_total_loglik(_as_batch(m, d.X), d.y, m.W, m.labels, m.sigma)


# --- training ------------------------------------------------------------------------


def init_prototypes(d: Dataset, per_class: int, jitter: float, rng) -> tuple:
    """Class means plus small Gaussian jitter, classes in label order."""
    classes = np.unique(d.y)
    if classes.size < 2:
        raise DataError("training data must contain at least two classes")
    W, labels = [], []
    for c in classes:
        mean = d.X[d.y == c].mean(axis=0)
        W.append(mean + jitter * rng.standard_normal((per_class, d.n_features)))
        labels.extend([c] * per_class)
    return np.vstack(W), np.array(labels, dtype=np.int64)


def train(d: Dataset, cfg: TrainConfig, variant: Union[Variant, str]) -> LvqModel:
    """Fit ``variant`` to ``d``.

    ``training_log[0]`` is the cost before the first epoch and ``training_log[e]``
    the full-data cost after epoch ``e`` (GLVQ cost for the distance models, total
    log-likelihood for RSLVQ).
    """
    variant = Variant(variant)
    rng = make_rng(cfg.seed)
    W, wlabels = init_prototypes(d, cfg.prototypes_per_class, cfg.init_jitter, rng)
    X = np.ascontiguousarray(d.X)
    y = np.ascontiguousarray(d.y, dtype=np.int64)
    n = d.n_features

    if variant is Variant.RSLVQ:
        omegas = None

        def cost():
            return _rslvq_total_loglik(X, y, W, wlabels, cfg.sigma)
    else:
        if variant is Variant.LGMLVQ:
            omegas = np.repeat((np.eye(n) / np.sqrt(n))[None], len(W), axis=0)
            omega_idx = np.arange(len(W), dtype=np.int64)
        elif variant is Variant.GMLVQ:
            omegas = (np.eye(n) / np.sqrt(n))[None].copy()
            omega_idx = np.zeros(len(W), dtype=np.int64)
        else:
            omegas = None
            omega_idx = np.zeros(len(W), dtype=np.int64)
        kernel_omegas = omegas if omegas is not None else np.eye(n)[None].copy()

        def cost():
            return _glvq_cost(_distances(X, W, omegas, omega_idx), y, wlabels)

    history = [cost()]
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(y)).astype(np.int64)
        with np.errstate(over="ignore", invalid="ignore"):
            if variant is Variant.RSLVQ:
                kernels.rslvq_epoch(X, y, order, W, wlabels, cfg.sigma, cfg.learning_rate)
            else:
                kernels.glvq_epoch(
                    X, y, order, W, wlabels, kernel_omegas, omega_idx,
                    cfg.learning_rate, cfg.metric_rate, variant.learns_metric,
                )
            if omegas is not None:
                tr = np.einsum("mab,mab->m", omegas, omegas)
                if not np.all(tr > 0) or not np.all(np.isfinite(tr)):
                    raise TrainingDivergenceError(epoch, f"metric collapsed or diverged at epoch {epoch}")
                omegas /= np.sqrt(tr)[:, None, None]
        if not np.all(np.isfinite(W)):
            raise TrainingDivergenceError(epoch)
        history.append(cost())
        if not np.isfinite(history[-1]):
            raise TrainingDivergenceError(epoch)
    log.debug("%s trained: cost %.6g -> %.6g over %d epochs", variant.value, history[0], history[-1], cfg.epochs)
    return LvqModel(
        variant,
        W,
        wlabels,
        omegas,
        cfg.sigma if variant is Variant.RSLVQ else None,
        d.class_names,
        tuple(history),
    )


def train_glvq(d: Dataset, cfg: TrainConfig) -> LvqModel:
    return train(d, cfg, Variant.GLVQ)


def train_gmlvq(d: Dataset, cfg: TrainConfig) -> LvqModel:
    return train(d, cfg, Variant.GMLVQ)


def train_lgmlvq(d: Dataset, cfg: TrainConfig) -> LvqModel:
    return train(d, cfg, Variant.LGMLVQ)


def train_rslvq(d: Dataset, cfg: TrainConfig) -> LvqModel:
    return train(d, cfg, Variant.RSLVQ)


# --- serialization ----------------------------------------------------------------


def model_to_dict(m: LvqModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "variant": m.variant.value,
        "class_names": list(m.class_names),
        "prototypes": m.W.tolist(),
        "labels": m.labels.tolist(),
        "omegas": None if m.omegas is None else m.omegas.tolist(),
        "sigma": m.sigma,
        "standardizer": None if m.standardizer is None else m.standardizer.to_dict(),
        "training_log": list(m.training_log),
    }


def model_from_dict(doc: dict) -> LvqModel:
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"not a {MODEL_FORMAT} document")
    if doc.get("version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {doc.get('version')!r}")
    std = doc.get("standardizer")
    return LvqModel(
        Variant(doc["variant"]),
        np.array(doc["prototypes"], dtype=np.float64),
        np.array(doc["labels"], dtype=np.int64),
        None if doc["omegas"] is None else np.array(doc["omegas"], dtype=np.float64),
        doc["sigma"],
        tuple(doc["class_names"]),
        tuple(doc.get("training_log", ())),
        None if std is None else Standardizer.from_dict(std),
    )


def save_model(m: LvqModel, path: Union[str, Path]) -> None:
    # json writes floats with repr(), the shortest exact round-trip form
    Path(path).write_text(json.dumps(model_to_dict(m), indent=1) + "\n", encoding="utf-8")


def load_model(path: Union[str, Path]) -> LvqModel:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
