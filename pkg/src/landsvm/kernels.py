"""Kernel functions and Gram-matrix construction.

Four kernels are supported: linear, quadratic, polynomial and RBF.
"quadratic" is the inhomogeneous polynomial of degree 2; its ``degree``
field is ignored. All kernels operate on already-standardized features;
:class:`Standardizer` holds the per-band statistics (fitted on training
samples only) that the training and classification paths share.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import InputError

KERNEL_KINDS = ("linear", "quadratic", "polynomial", "rbf")


@dataclass(frozen=True)
class KernelSpec:
    """Which kernel to evaluate and its parameters.

    gamma may be left as None for an RBF spec until the feature dimension
    is known; resolved() then fills in the 1/bands default. Evaluating an
    RBF spec with gamma still unset is an error.
    """

    kind: str
    degree: int = 3
    gamma: float | None = None
    coef0: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise InputError(f"unknown kernel kind {self.kind!r}")
        if self.degree < 1:
            raise InputError("degree must be a positive integer")
        if self.gamma is not None and not self.gamma > 0:
            raise InputError("gamma must be positive")

    @property
    def effective_degree(self):
        return 2 if self.kind == "quadratic" else self.degree

    def resolved(self, n_bands):
        """Return a spec with gamma defaulted to 1/n_bands if unset."""
        if self.kind == "rbf" and self.gamma is None:
            return replace(self, gamma=1.0 / n_bands)
        return self


def _as_matrix(points):
    try:
        x = np.asarray(points, dtype=float)
    except (ValueError, TypeError):
        raise InputError("points must share one feature dimension") from None
    if x.dtype == object or x.ndim != 2:
        raise InputError("points must share one feature dimension")
    if x.shape[0] == 0 or x.shape[1] == 0:
        raise InputError("points must be a nonempty list of nonempty vectors")
    return x


def _check_spec_concrete(spec):
    if spec.kind == "rbf" and spec.gamma is None:
        raise InputError("RBF kernel needs gamma (call spec.resolved(bands))")


def eval_kernel(spec, x, y):
    """Evaluate k(x, y) for a single pair of feature vectors."""
    _check_spec_concrete(spec)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape or x.size == 0:
        raise InputError(
            f"kernel arguments must be equal-length vectors, got shapes "
            f"{x.shape} and {y.shape}"
        )
    if spec.kind == "linear":
        return float(np.dot(x, y))
    if spec.kind in ("quadratic", "polynomial"):
        return float((np.dot(x, y) + spec.coef0) ** spec.effective_degree)
    d = x - y
    return float(np.exp(-spec.gamma * np.dot(d, d)))


def cross_kernel(spec, a, b):
    """Kernel matrix between two point sets: out[i, j] = k(a[i], b[j])."""
    _check_spec_concrete(spec)
    a = _as_matrix(a)
    b = _as_matrix(b)
    if a.shape[1] != b.shape[1]:
        raise InputError(
            f"point sets disagree on dimension: {a.shape[1]} vs {b.shape[1]}"
        )
    if spec.kind == "linear":
        return a @ b.T
    if spec.kind in ("quadratic", "polynomial"):
        return (a @ b.T + spec.coef0) ** spec.effective_degree
    sq = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    np.maximum(sq, 0.0, out=sq)  # clamp negative rounding residue
    return np.exp(-spec.gamma * sq)


def gram_matrix(spec, points):
    """Square kernel matrix of a point set, exactly symmetric."""
    g = cross_kernel(spec, points, points)
    # mirror the upper triangle so G == G.T holds bitwise
    return np.triu(g) + np.triu(g, 1).T


@dataclass(frozen=True)
class Standardizer:
    """Per-band affine transform to zero mean and unit variance."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, samples):
        x = _as_matrix(samples)
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        std = np.where(std < 1e-12, 1.0, std)  # constant bands pass through
        return cls(mean=mean, std=std)

    @classmethod
    def identity(cls, n_bands):
        return cls(mean=np.zeros(n_bands), std=np.ones(n_bands))

    def transform(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.mean.shape[0]:
            raise InputError(
                f"expected {self.mean.shape[0]} bands, got {x.shape[-1]}"
            )
        return (x - self.mean) / self.std
