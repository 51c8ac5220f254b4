"""Multiclass decomposition strategies over the binary machine.

Two strategies are implemented. One-against-all (strategy "1aa") trains
one machine per class against the union of the rest; a pixel claimed by
exactly one machine gets that class, by none is Unclassified, by several
is Mixed. One-against-one ("1a1") trains a machine per ordered class
pair and lets them vote; a tied vote is Unclassified, so 1a1 never
produces Mixed pixels. A decision value of exactly zero does not claim
a pixel in 1aa and votes the second class of the pair in 1a1.
"""

from dataclasses import dataclass

import numpy as np

from .binary import TrainingSet, decision_values, train_binary
from .errors import InputError
from .kernels import Standardizer

STRATEGIES = ("1a1", "1aa")

UNCLASSIFIED = -1
MIXED = -2


@dataclass(frozen=True)
class ClassSet:
    """Ordered land-cover class names; index order is significant."""

    names: tuple

    def __post_init__(self):
        names = tuple(self.names)
        if len(names) < 2:
            raise InputError("need at least two classes")
        if len(set(names)) != len(names):
            raise InputError("class names must be unique")
        for name in names:
            if not name or "," in name or any(c.isspace() for c in name):
                raise InputError(
                    f"class name {name!r} must be nonempty, with no commas "
                    "or whitespace"
                )
        object.__setattr__(self, "names", names)

    @property
    def n(self):
        return len(self.names)

    def index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise InputError(f"unknown class {name!r}") from None


@dataclass(frozen=True)
class PixelLabel:
    """Outcome for one pixel: a class, Unclassified, or Mixed.

    code is the class index, or the UNCLASSIFIED / MIXED sentinel;
    members lists the claiming classes when mixed.
    """

    code: int
    members: tuple = ()

    def __post_init__(self):
        if self.code == MIXED:
            members = tuple(sorted(set(self.members)))
            if len(members) < 2:
                raise InputError("a mixed label needs at least two classes")
            object.__setattr__(self, "members", members)
        elif self.members:
            raise InputError("only mixed labels carry members")
        elif self.code != UNCLASSIFIED and self.code < 0:
            raise InputError(f"bad label code {self.code}")

    @classmethod
    def of_class(cls, index):
        return cls(code=int(index))

    @classmethod
    def unclassified(cls):
        return cls(code=UNCLASSIFIED)

    @classmethod
    def mixed(cls, members):
        return cls(code=MIXED, members=tuple(int(m) for m in members))

    @property
    def is_class(self):
        return self.code >= 0

    @property
    def is_unclassified(self):
        return self.code == UNCLASSIFIED

    @property
    def is_mixed(self):
        return self.code == MIXED


@dataclass(frozen=True)
class MulticlassModel:
    """A strategy tag plus its trained binary machines.

    For 1aa, machines[k] separates class k from the rest. For 1a1,
    machines[m] separates pairs[m] = (i, j) with i < j, pairs in
    lexicographic order. The standardizer maps raw band values into the
    feature space all machines were trained in.
    """

    strategy: str
    classes: ClassSet
    machines: tuple
    pairs: tuple = None
    standardizer: Standardizer = None

    def __post_init__(self):
        n = self.classes.n
        if self.strategy == "1aa":
            if len(self.machines) != n:
                raise InputError(f"1aa expects {n} machines")
            if self.pairs is not None:
                raise InputError("1aa machines carry no class pairs")
        elif self.strategy == "1a1":
            expected = [(i, j) for i in range(n) for j in range(i + 1, n)]
            if len(self.machines) != len(expected):
                raise InputError(f"1a1 expects {len(expected)} machines")
            if self.pairs is None or list(self.pairs) != expected:
                raise InputError("1a1 pairs must be (i, j), i < j, in order")
        else:
            raise InputError(f"unknown strategy {self.strategy!r}")
        kinds = {
            (m.kernel.kind, m.kernel.effective_degree, m.kernel.gamma,
             m.kernel.coef0)
            for m in self.machines
        }
        if len(kinds) > 1:
            raise InputError("all machines must share one kernel spec")

    @property
    def n_machines(self):
        return len(self.machines)

    @property
    def kernel(self):
        return self.machines[0].kernel

    def transform(self, points):
        points = np.asarray(points, dtype=float)
        if self.standardizer is None:
            return points
        return self.standardizer.transform(points)


def _check_samples_by_class(samples_by_class):
    if len(samples_by_class) < 2:
        raise InputError("need samples for at least two classes")
    cleaned = {}
    for name, block in samples_by_class.items():
        x = np.asarray(block, dtype=float)
        if x.ndim != 2 or x.shape[0] == 0:
            raise InputError(f"class {name!r} has no samples")
        cleaned[name] = x
    dims = {x.shape[1] for x in cleaned.values()}
    if len(dims) != 1:
        raise InputError("classes disagree on the number of bands")
    return cleaned


def _fit_standardizer(blocks, standardize):
    stacked = np.vstack(list(blocks.values()))
    if standardize:
        return Standardizer.fit(stacked)
    return Standardizer.identity(stacked.shape[1])


def _train_machine(training_set, kernel, config, context):
    try:
        return train_binary(training_set, kernel, config)
    except Exception as exc:
        raise type(exc)(f"training machine {context}: {exc}") from exc


def train_one_vs_all(samples_by_class, kernel, config, standardize=True):
    """Train N machines, one per class against the union of the rest."""
    blocks = _check_samples_by_class(samples_by_class)
    classes = ClassSet(tuple(blocks.keys()))
    std = _fit_standardizer(blocks, standardize)
    feats = {name: std.transform(x) for name, x in blocks.items()}
    machines = []
    for k, name in enumerate(classes.names):
        rest = [feats[other] for other in classes.names if other != name]
        x = np.vstack([feats[name]] + rest)
        y = np.concatenate(
            [np.ones(len(feats[name])), -np.ones(len(x) - len(feats[name]))]
        )
        machines.append(
            _train_machine(
                TrainingSet(x, y), kernel, config, f"'{name}' vs rest"
            )
        )
    return MulticlassModel(
        strategy="1aa",
        classes=classes,
        machines=tuple(machines),
        standardizer=std,
    )


def train_one_vs_one(samples_by_class, kernel, config, standardize=True):
    """Train N(N-1)/2 machines, one per unordered class pair."""
    blocks = _check_samples_by_class(samples_by_class)
    classes = ClassSet(tuple(blocks.keys()))
    std = _fit_standardizer(blocks, standardize)
    feats = {name: std.transform(x) for name, x in blocks.items()}
    machines = []
    pairs = []
    for i in range(classes.n):
        for j in range(i + 1, classes.n):
            a = feats[classes.names[i]]
            b = feats[classes.names[j]]
            x = np.vstack([a, b])
            y = np.concatenate([np.ones(len(a)), -np.ones(len(b))])
            machines.append(
                _train_machine(
                    TrainingSet(x, y), kernel, config,
                    f"'{classes.names[i]}' vs '{classes.names[j]}'",
                )
            )
            pairs.append((i, j))
    return MulticlassModel(
        strategy="1a1",
        classes=classes,
        machines=tuple(machines),
        pairs=tuple(pairs),
        standardizer=std,
    )


def _decision_matrix(model, points):
    f = np.empty((points.shape[0], model.n_machines))
    for m, machine in enumerate(model.machines):
        f[:, m] = decision_values(machine, points)
    return f


def _labels_one_vs_all(f, n_classes, strict):
    if not strict:  # winner-take-all: argmax, never unclassified or mixed
        return np.argmax(f, axis=1).astype(np.int32), {}
    claimed = f > 0.0
    n_claims = claimed.sum(axis=1)
    codes = np.where(
        n_claims == 1, np.argmax(claimed, axis=1), UNCLASSIFIED
    ).astype(np.int32)
    codes[n_claims >= 2] = MIXED
    members = {
        int(r): tuple(np.nonzero(claimed[r])[0].tolist())
        for r in np.nonzero(n_claims >= 2)[0]
    }
    return codes, members


def _labels_one_vs_one(f, pairs, n_classes):
    votes = np.zeros((f.shape[0], n_classes), dtype=np.int64)
    rows = np.arange(f.shape[0])
    for m, (i, j) in enumerate(pairs):
        winner = np.where(f[:, m] > 0.0, i, j)
        votes[rows, winner] += 1
    top = votes.max(axis=1)
    tied = (votes == top[:, None]).sum(axis=1) > 1
    codes = np.argmax(votes, axis=1).astype(np.int32)
    codes[tied] = UNCLASSIFIED
    return codes, {}


def _classify_batch(model, points, strict):
    f = _decision_matrix(model, points)
    if model.strategy == "1aa":
        return _labels_one_vs_all(f, model.classes.n, strict)
    return _labels_one_vs_one(f, model.pairs, model.classes.n)


def predict_codes(model, points, strict=True):
    """Label a batch of raw feature rows.

    Returns (codes, mixed_members): codes holds a class index or the
    UNCLASSIFIED / MIXED sentinel per row; mixed_members maps row index
    to the claiming classes of mixed rows.
    """
    pts = model.transform(np.asarray(points, dtype=float))
    if pts.ndim != 2:
        raise InputError("points must be a 2-D batch of feature rows")
    return _classify_batch(model, pts, strict)


def _label_from_code(code, members=()):
    if code == UNCLASSIFIED:
        return PixelLabel.unclassified()
    if code == MIXED:
        return PixelLabel.mixed(members)
    return PixelLabel.of_class(code)


def classify_one_vs_all(model, x, strict=True):
    """Label one feature vector with the one-against-all rule."""
    if model.strategy != "1aa":
        raise InputError("model was not trained one-against-all")
    pts = model.transform(np.asarray(x, dtype=float)[None, :])
    codes, members = _classify_batch(model, pts, strict)
    return _label_from_code(int(codes[0]), members.get(0, ()))


def classify_one_vs_one(model, x):
    """Label one feature vector by pairwise voting."""
    if model.strategy != "1a1":
        raise InputError("model was not trained one-against-one")
    pts = model.transform(np.asarray(x, dtype=float)[None, :])
    codes, _ = _classify_batch(model, pts, strict=True)
    return _label_from_code(int(codes[0]))


class LabelGrid:
    """Per-pixel outcome codes on a raster grid.

    codes holds the class index per pixel, or the UNCLASSIFIED / MIXED
    sentinels; mixed_members maps (x, y) of mixed pixels to the tuple of
    claiming class indices.
    """

    def __init__(self, codes, classes, mixed_members=None):
        codes = np.asarray(codes, dtype=np.int32)
        if codes.ndim != 2:
            raise InputError("label codes must form a 2-D grid")
        self.codes = codes
        self.classes = classes
        self.mixed_members = dict(mixed_members or {})

    @property
    def width(self):
        return self.codes.shape[1]

    @property
    def height(self):
        return self.codes.shape[0]

    def label_at(self, x, y):
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise InputError(f"position ({x}, {y}) is outside the grid")
        code = int(self.codes[y, x])
        return _label_from_code(code, self.mixed_members.get((x, y), ()))

    def counts(self):
        flat = self.codes.ravel()
        per_class = tuple(
            int((flat == k).sum()) for k in range(self.classes.n)
        )
        return TallySummary(
            class_counts=per_class,
            unclassified=int((flat == UNCLASSIFIED).sum()),
            mixed=int((flat == MIXED).sum()),
        )


@dataclass(frozen=True)
class TallySummary:
    """Pixel counts per class plus the unclassified and mixed totals."""

    class_counts: tuple
    unclassified: int
    mixed: int

    @property
    def total(self):
        return sum(self.class_counts) + self.unclassified + self.mixed


def classify_raster(model, raster, strict=True):
    """Label every pixel of a raster. Returns (LabelGrid, TallySummary)."""
    if raster.bands != model.machines[0].n_features:
        raise InputError(
            f"raster has {raster.bands} bands, model expects "
            f"{model.machines[0].n_features}"
        )
    h, w = raster.height, raster.width
    if h == 0 or w == 0:
        grid = LabelGrid(
            np.zeros((h, w), dtype=np.int32), model.classes
        )
        return grid, grid.counts()
    pts = model.transform(raster.pixel_matrix())
    codes, members = _classify_batch(model, pts, strict)
    mixed_members = {
        (int(r % w), int(r // w)): mm for r, mm in members.items()
    }
    grid = LabelGrid(codes.reshape(h, w), model.classes, mixed_members)
    return grid, grid.counts()
