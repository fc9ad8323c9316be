"""Bayes-optimal posterior and certainty for the synthetic Gaussian data.

The class-conditional density mirrors :func:`rejectlab.data.generate_gaussians`
exactly: a share of each class is replaced by uniform noise over the box and
keeps its class label, so

    p(x | j) = (1 - f) N(x; mean_j, diag(std_j^2)) + f U(x; box)

with ``f`` the realised noise share ``floor(noise_fraction * N) / N``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rejectlab.data import GaussianSpec

__all__ = ["KnownMixture", "bayes_certainty", "bayes_posterior", "bayes_predict"]


@dataclass(frozen=True)
class KnownMixture:
    priors: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    noise: np.ndarray
    box: tuple

    def __post_init__(self):
        priors = np.asarray(self.priors, dtype=np.float64)
        if abs(priors.sum() - 1.0) > 1e-12 or np.any(priors < 0):
            raise ValueError("priors must be non-negative and sum to 1")
        if np.any(np.asarray(self.stds) <= 0):
            raise ValueError("standard deviations must be positive")
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "means", np.asarray(self.means, dtype=np.float64))
        object.__setattr__(self, "stds", np.asarray(self.stds, dtype=np.float64))
        object.__setattr__(self, "noise", np.asarray(self.noise, dtype=np.float64))

    @classmethod
    def from_spec(cls, spec: GaussianSpec) -> "KnownMixture":
        z = spec.n_classes
        f = spec.n_noise / spec.samples_per_class
        return cls(np.full(z, 1.0 / z), spec.means, spec.stds, np.full(z, f), spec.box)

    @property
    def n_classes(self) -> int:
        return self.priors.shape[0]

    def log_class_densities(self, X) -> np.ndarray:
        """``log p(x | j)`` for each row of ``X``, shape ``(N, Z)``."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        low, high = self.box
        inside = np.all((X >= low) & (X <= high), axis=1)
        log_u = np.where(inside, -np.sum(np.log(high - low)), -np.inf)
        out = np.empty((X.shape[0], self.n_classes))
        for j in range(self.n_classes):
            zsq = ((X - self.means[j]) / self.stds[j]) ** 2
            log_n = -0.5 * zsq.sum(axis=1) - np.sum(np.log(self.stds[j])) - 0.5 * X.shape[1] * np.log(2 * np.pi)
            f = self.noise[j]
            with np.errstate(divide="ignore"):
                out[:, j] = np.logaddexp(np.log1p(-f) + log_n, np.log(f) + log_u)
        return out


def bayes_posterior(km: KnownMixture, X) -> np.ndarray:
    """``p(j | x)``; a 1-d input gives a 1-d result, a batch gives ``(N, Z)``."""
    single = np.ndim(X) == 1
    with np.errstate(divide="ignore"):
        s = km.log_class_densities(X) + np.log(km.priors)
    s -= np.logaddexp.reduce(s, axis=1, keepdims=True)
    p = np.exp(s)
    return p[0] if single else p


def bayes_certainty(km: KnownMixture, X):
    p = bayes_posterior(km, X)
    return float(p.max()) if p.ndim == 1 else p.max(axis=1)


def bayes_predict(km: KnownMixture, X):
    p = bayes_posterior(km, X)
    return int(np.argmax(p) + 1) if p.ndim == 1 else np.argmax(p, axis=1) + 1
