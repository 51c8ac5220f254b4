"""Accuracy assessment: confusion matrix, kappa, Z-test, strategy report.

The confusion matrix has one mapped row per class plus two extra mapped
rows for Unclassified and Mixed outcomes; reference pixels are always a
real class, so those rows never count as agreement. Kappa uses the
delta-method variance standard in thematic-map accuracy work, and two
classifications are compared with z = (k1 - k2) / sqrt(v1 + v2),
declared significant when |z| > 1.96 (strictly).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateVarianceError,
    InputError,
    UndefinedKappaError,
)
from .multiclass import MIXED, UNCLASSIFIED

Z_CRITICAL = 1.96

VERDICT_NONE = "No difference"
VERDICT_INSIGNIFICANT = "Difference insignificant"
VERDICT_SIGNIFICANT = "Difference significant"


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts of mapped outcome (rows) against reference class (columns).

    Rows 0..N-1 are the classes, row N is Unclassified, row N+1 Mixed.
    """

    counts: np.ndarray
    class_names: tuple

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        n = len(self.class_names)
        if n < 1:
            raise InputError("need at least one class")
        if c.shape != (n + 2, n):
            raise InputError(
                f"counts must be ({n + 2}, {n}) for {n} classes, "
                f"got {c.shape}"
            )
        if (c < 0).any():
            raise InputError("counts must be non-negative")
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def n_classes(self):
        return len(self.class_names)

    @property
    def total(self):
        return int(self.counts.sum())

    def class_block(self):
        return self.counts[: self.n_classes]

    def unclassified_row(self):
        return self.counts[self.n_classes]

    def mixed_row(self):
        return self.counts[self.n_classes + 1]


def build_confusion(labels, reference):
    """Tally a label grid against ((x, y), class-name) reference rows."""
    names = labels.classes.names
    n = len(names)
    counts = np.zeros((n + 2, n), dtype=np.int64)
    for (x, y), true_name in reference:
        if not (0 <= x < labels.width and 0 <= y < labels.height):
            raise InputError(
                f"reference position ({x}, {y}) is outside the "
                f"{labels.width}x{labels.height} grid"
            )
        col = labels.classes.index(true_name)
        code = int(labels.codes[y, x])
        if code == UNCLASSIFIED:
            row = n
        elif code == MIXED:
            row = n + 1
        else:
            row = code
        counts[row, col] += 1
    return ConfusionMatrix(counts=counts, class_names=names)


@dataclass(frozen=True)
class KappaResult:
    """Chance-corrected agreement plus its variance estimate."""

    kappa: float
    variance: float
    n: int

    def __post_init__(self):
        if not -1.0 <= self.kappa <= 1.0:
            raise InputError(f"kappa {self.kappa} outside [-1, 1]")
        if self.variance < 0:
            raise InputError("variance must be non-negative")
        if self.n < 0:
            raise InputError("n must be non-negative")


def kappa(cm):
    """Cohen's kappa of a confusion matrix, with delta-method variance.

    Unclassified and Mixed rows count as disagreement; they have no
    matching reference column, so the matrix is treated as square with
    those two columns identically zero.
    """
    n = cm.total
    if n == 0:
        raise InputError("confusion matrix is empty")
    size = cm.n_classes + 2
    p = np.zeros((size, size))
    p[:, : cm.n_classes] = cm.counts / n
    rows = p.sum(axis=1)
    cols = p.sum(axis=0)
    theta1 = float(np.trace(p))
    theta2 = float(rows @ cols)
    if theta2 == 1.0:
        raise UndefinedKappaError(
            "chance agreement is 1; kappa is undefined"
        )
    theta3 = float(np.diag(p) @ (rows + cols))
    # the squared term crosses the marginals: column total of the mapped
    # category plus row total of the reference category
    theta4 = float((p * (cols[:, None] + rows[None, :]) ** 2).sum())
    k = (theta1 - theta2) / (1.0 - theta2)
    d = 1.0 - theta2
    var = (
        theta1 * (1.0 - theta1) / d**2
        + 2.0 * (1.0 - theta1) * (2.0 * theta1 * theta2 - theta3) / d**3
        + (1.0 - theta1) ** 2 * (theta4 - 4.0 * theta2**2) / d**4
    ) / n
    return KappaResult(kappa=k, variance=max(var, 0.0), n=n)


def z_statistic(a, b):
    """Standardized kappa difference. Returns (z, significant)."""
    if not (math.isfinite(a.variance) and math.isfinite(b.variance)):
        raise InputError("variances must be finite")
    pooled = a.variance + b.variance
    if pooled == 0.0:
        if a.kappa == b.kappa:
            return 0.0, False
        raise DegenerateVarianceError(
            "kappas differ but both variances are zero"
        )
    z = (a.kappa - b.kappa) / math.sqrt(pooled)
    return z, abs(z) > Z_CRITICAL


@dataclass(frozen=True)
class CellResult:
    """One kernel x strategy outcome feeding the comparison report."""

    unclassified: int
    mixed: int
    kappa: KappaResult


@dataclass(frozen=True)
class ReportRow:
    kernel: str
    cell_1a1: CellResult
    cell_1aa: CellResult
    z: float
    verdict: str


@dataclass(frozen=True)
class ComparisonReport:
    """The two summary tables: pixel tallies and kappa significance."""

    rows: tuple

    def to_text(self):
        out = ["Summary of unclassified and mixed pixels", ""]
        out.append(
            f"{'Classifier':<12}{'Type':<22}{'1A1':>8}{'1AA':>8}"
        )
        for row in self.rows:
            out.append(
                f"{_display(row.kernel):<12}{'Unclassified Pixels':<22}"
                f"{row.cell_1a1.unclassified:>8}{row.cell_1aa.unclassified:>8}"
            )
            out.append(
                f"{'':<12}{'Mixed Pixels':<22}"
                f"{row.cell_1a1.mixed:>8}{row.cell_1aa.mixed:>8}"
            )
        out += ["", "Summary of kappa values", ""]
        out.append(
            f"{'SVM':<12}{'1A1':>6}{'1AA':>6}{'Z':>8}  Significance"
        )
        for row in self.rows:
            out.append(
                f"{_display(row.kernel):<12}"
                f"{row.cell_1a1.kappa.kappa:>6.2f}"
                f"{row.cell_1aa.kappa.kappa:>6.2f}"
                f"{row.z:>8.2f}  {row.verdict}"
            )
        return "\n".join(out) + "\n"

    def to_delimited(self):
        """One row per kernel x strategy, comma-delimited."""
        out = ["kernel,strategy,unclassified,mixed,kappa,variance,z,verdict"]
        for row in self.rows:
            for strategy, cell in (
                ("1a1", row.cell_1a1),
                ("1aa", row.cell_1aa),
            ):
                out.append(
                    f"{row.kernel},{strategy},{cell.unclassified},"
                    f"{cell.mixed},{cell.kappa.kappa!r},"
                    f"{cell.kappa.variance!r},{row.z!r},{row.verdict}"
                )
        return "\n".join(out) + "\n"


def _display(kernel):
    return "RBF" if kernel == "rbf" else kernel.capitalize()


def compare_report(cells, kernels):
    """Assemble the comparison for cells keyed by (strategy, kernel).

    Both strategies must cover exactly the given kernels. The Z column
    is kappa(1A1) minus kappa(1AA), standardized.
    """
    kernels = list(kernels)
    if not kernels:
        raise InputError("no kernels to compare")
    for strategy in ("1a1", "1aa"):
        have = {k for s, k in cells if s == strategy}
        if have != set(kernels):
            raise InputError(
                f"strategy {strategy} covers kernels {sorted(have)}, "
                f"expected {sorted(kernels)}"
            )
    rows = []
    for kernel in kernels:
        a = cells[("1a1", kernel)]
        b = cells[("1aa", kernel)]
        if a.kappa.kappa == b.kappa.kappa:
            z, verdict = 0.0, VERDICT_NONE
        else:
            z, significant = z_statistic(a.kappa, b.kappa)
            verdict = (
                VERDICT_SIGNIFICANT if significant else VERDICT_INSIGNIFICANT
            )
        rows.append(
            ReportRow(kernel=kernel, cell_1a1=a, cell_1aa=b, z=z,
                      verdict=verdict)
        )
    return ComparisonReport(rows=tuple(rows))
