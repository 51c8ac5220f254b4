"""Shared helpers for the test suite."""

from fractions import Fraction

import numpy as np
import pytest

from landsvm import BlobClass, TrainingSet, blob_means, gen_synthetic

CLASS_NAMES = ("water", "vegetation", "builtup")


def random_binary_problem(rng, n_max=20, d_max=4):
    """A small labeled problem with both signs guaranteed."""
    n = int(rng.integers(6, n_max + 1))
    d = int(rng.integers(2, d_max + 1))
    x = rng.standard_normal((n, d))
    y = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    y[0], y[1] = 1.0, -1.0
    return TrainingSet(x, y)


def blob_scene(separation, seed, train=100, ref=100, size=64, bands=6,
               sigma=1.0, n_classes=3):
    """Synthetic scene with the given pairwise class separation."""
    means = blob_means(n_classes, bands, separation, sigma)
    blobs = [
        BlobClass(name=CLASS_NAMES[k], mean=tuple(means[k]), sigma=sigma)
        for k in range(n_classes)
    ]
    return gen_synthetic(blobs, size, size, train, ref, seed)


def kappa_oracle(table):
    """Exact kappa and delta-method variance via rational arithmetic.

    Independent of the production path: plain loops over the defining
    sums, in Fractions, only converted to float at the end. Rectangular
    tables (extra mapped rows) are squared up with zero columns.
    """
    t = [[Fraction(int(v)) for v in row] for row in table]
    n_rows, n_cols = len(t), len(t[0])
    size = max(n_rows, n_cols)
    sq = [
        [t[i][j] if i < n_rows and j < n_cols else Fraction(0)
         for j in range(size)]
        for i in range(size)
    ]
    n = sum(sum(row) for row in sq)
    p = [[sq[i][j] / n for j in range(size)] for i in range(size)]
    rows = [sum(p[i]) for i in range(size)]
    cols = [sum(p[i][j] for i in range(size)) for j in range(size)]
    th1 = sum(p[i][i] for i in range(size))
    th2 = sum(rows[i] * cols[i] for i in range(size))
    th3 = sum(p[i][i] * (rows[i] + cols[i]) for i in range(size))
    th4 = sum(
        p[i][j] * (cols[i] + rows[j]) ** 2
        for i in range(size)
        for j in range(size)
    )
    d = 1 - th2
    k = (th1 - th2) / d
    var = (
        th1 * (1 - th1) / d**2
        + 2 * (1 - th1) * (2 * th1 * th2 - th3) / d**3
        + (1 - th1) ** 2 * (th4 - 4 * th2**2) / d**4
    ) / n
    return float(k), float(max(var, Fraction(0)))


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))
