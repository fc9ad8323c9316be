"""Numeric primitives shared by the models and certainty measures.

Distances are squared: the plain squared Euclidean distance and the
quadratic form ``(a - b)^T Lambda (a - b)`` with ``Lambda = Omega^T Omega``.
Only the factor ``Omega`` is ever stored, so ``Lambda`` is positive
semi-definite by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rejectlab.errors import DegenerateMetricError, DimensionMismatchError

__all__ = [
    "MetricMatrix",
    "as_vector",
    "derive_seed",
    "make_rng",
    "normalize_trace",
    "quadratic_form_distance",
    "squared_euclidean",
]


def as_vector(values) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatchError(f"expected a non-empty 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("feature vector contains non-finite entries")
    return v


def _check_pair(a, b):
    a = as_vector(a)
    b = as_vector(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a, b


def squared_euclidean(a, b) -> float:
    """Return ``sum((a - b) ** 2)``."""
    a, b = _check_pair(a, b)
    diff = a - b
    return float(diff @ diff)


@dataclass(frozen=True)
class MetricMatrix:
    """Square factor ``omega`` of a learned quadratic metric."""

    omega: np.ndarray

    def __post_init__(self):
        omega = np.array(self.omega, dtype=np.float64)
        if omega.ndim != 2 or omega.shape[0] != omega.shape[1] or omega.shape[0] == 0:
            raise DimensionMismatchError(f"omega must be square, got shape {omega.shape}")
        if not np.all(np.isfinite(omega)):
            raise ValueError("omega contains non-finite entries")
        omega.setflags(write=False)
        object.__setattr__(self, "omega", omega)

    @classmethod
    def identity(cls, n: int) -> "MetricMatrix":
        """Identity factor rescaled so that ``trace(lambda) == 1``."""
        return cls(np.eye(n) / np.sqrt(n))

    @property
    def dim(self) -> int:
        return self.omega.shape[0]

    @property
    def lam(self) -> np.ndarray:
        return self.omega.T @ self.omega

    @property
    def trace(self) -> float:
        # trace(Omega^T Omega) is the squared Frobenius norm of Omega
        return float(np.sum(self.omega * self.omega))


def quadratic_form_distance(a, b, m: MetricMatrix) -> float:
    """Return ``(a - b)^T Lambda (a - b)``, evaluated as ``||Omega (a - b)||^2``."""
    a, b = _check_pair(a, b)
    if m.dim != a.shape[0]:
        raise DimensionMismatchError(f"metric is {m.dim}-d but vectors are {a.shape[0]}-d")
    z = m.omega @ (a - b)
    return float(z @ z)


def normalize_trace(m: MetricMatrix) -> MetricMatrix:
    """Rescale ``omega`` so the induced ``lambda`` has unit trace."""
    tr = m.trace
    if not tr > 0.0:
        raise DegenerateMetricError("cannot normalize a metric with zero trace")
    return MetricMatrix(m.omega / np.sqrt(tr))


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for one named stream derived from a 64-bit root seed.

    ``key`` selects an independent child stream, e.g. ``make_rng(seed, repeat, fold)``.
    """
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


def derive_seed(seed: int, *key: int) -> int:
    """A 64-bit child seed, independent across distinct ``key`` tuples."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])
