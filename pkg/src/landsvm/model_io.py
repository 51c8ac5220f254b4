"""Versioned text formats for trained models and label grids.

Model files ("SVMMODEL 1") hold the kernel spec, training knobs, the
standardizer statistics and every machine's support vectors, so a model
can be inspected or reloaded without retraining. Label-grid files
("LABELGRID 1") hold one token per pixel: a class index, ``U`` for
unclassified, or ``M<i>+<j>...`` listing the classes claiming a mixed
pixel. Floats are written with repr and round-trip exactly.
"""

import numpy as np

from .binary import BinaryModel
from .errors import ParseError
from .kernels import KernelSpec, Standardizer
from .multiclass import (
    MIXED,
    UNCLASSIFIED,
    ClassSet,
    LabelGrid,
    MulticlassModel,
)
from .raster import atomic_write_text

MODEL_MAGIC = "SVMMODEL 1"
LABELS_MAGIC = "LABELGRID 1"


def _fmt(value):
    return repr(float(value))


def _fmt_vector(vec):
    return ",".join(_fmt(v) for v in vec)


def save_model(model, path, tolerance=None, max_passes=None):
    """Serialize a multiclass model. Returns the path."""
    k = model.kernel
    lines = [
        MODEL_MAGIC,
        f"strategy {model.strategy}",
        f"classes {','.join(model.classes.names)}",
        f"bands {model.machines[0].n_features}",
        f"kernel {k.kind}",
        f"degree {k.effective_degree}",
        f"gamma {'none' if k.gamma is None else _fmt(k.gamma)}",
        f"coef0 {_fmt(k.coef0)}",
        f"C {_fmt(model.machines[0].C)}",
    ]
    if tolerance is not None:
        lines.append(f"tolerance {_fmt(tolerance)}")
    if max_passes is not None:
        lines.append(f"max_passes {int(max_passes)}")
    std = model.standardizer
    if std is not None:
        lines.append(f"standardizer_mean {_fmt_vector(std.mean)}")
        lines.append(f"standardizer_std {_fmt_vector(std.std)}")
    lines.append(f"machines {model.n_machines}")
    for m, machine in enumerate(model.machines):
        if model.strategy == "1aa":
            lines.append(f"machine {m} class {m}")
        else:
            i, j = model.pairs[m]
            lines.append(f"machine {m} pair {i} {j}")
        lines.append(f"bias {_fmt(machine.bias)}")
        lines.append(f"nsv {machine.support_vectors.shape[0]}")
        for coef, sv in zip(machine.dual_coefs, machine.support_vectors):
            lines.append(f"sv {_fmt(coef)} {' '.join(_fmt(v) for v in sv)}")
    atomic_write_text(path, "\n".join(lines) + "\n")
    return path


class _LineReader:
    def __init__(self, path, text):
        self.path = path
        self.lines = text.split("\n")
        self.at = 0

    def next(self, context):
        while self.at < len(self.lines):
            line = self.lines[self.at].strip()
            self.at += 1
            if line:
                return line
        raise ParseError(f"unexpected end of file, wanted {context}",
                         path=self.path)

    def key(self, name):
        line = self.next(f"'{name} ...'")
        parts = line.split(None, 1)
        if len(parts) != 2 or parts[0] != name:
            raise ParseError(
                f"expected '{name} <value>' on line {self.at}, got {line!r}",
                path=self.path,
            )
        return parts[1]

    def fail(self, message):
        raise ParseError(f"line {self.at}: {message}", path=self.path)


def _parse_float(reader, text, what):
    try:
        return float(text)
    except ValueError:
        reader.fail(f"{what} must be a number, got {text!r}")


def load_model(path):
    """Load a model file written by save_model."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    r = _LineReader(path, text)
    try:
        return _read_model(r)
    except (ValueError, IndexError) as exc:
        raise ParseError(f"corrupt model file: {exc}", path=path) from exc


def _read_model(r):
    if r.next("magic") != MODEL_MAGIC:
        raise ParseError(f"not a {MODEL_MAGIC!r} file", path=r.path)
    strategy = r.key("strategy")
    if strategy not in ("1a1", "1aa"):
        r.fail(f"unknown strategy {strategy!r}")
    classes = ClassSet(tuple(r.key("classes").split(",")))
    bands = int(r.key("bands"))
    kind = r.key("kernel")
    degree = int(r.key("degree"))
    gamma_text = r.key("gamma")
    gamma = None if gamma_text == "none" else _parse_float(
        r, gamma_text, "gamma"
    )
    coef0 = _parse_float(r, r.key("coef0"), "coef0")
    spec = KernelSpec(kind=kind, degree=degree, gamma=gamma, coef0=coef0)
    c_value = _parse_float(r, r.key("C"), "C")

    std = None
    line = r.next("machine header")
    while not line.startswith("machines "):
        parts = line.split(None, 1)
        if parts[0] == "tolerance" or parts[0] == "max_passes":
            pass  # provenance only
        elif parts[0] == "standardizer_mean":
            mean = np.array([float(v) for v in parts[1].split(",")])
            std_line = r.key("standardizer_std")
            stdev = np.array([float(v) for v in std_line.split(",")])
            std = Standardizer(mean=mean, std=stdev)
        else:
            r.fail(f"unexpected line {line!r}")
        line = r.next("machine header")
    n_machines = int(line.split()[1])

    machines = []
    pairs = []
    for m in range(n_machines):
        header = r.next("machine").split()
        if len(header) < 3 or header[0] != "machine" or int(header[1]) != m:
            r.fail(f"expected 'machine {m} ...'")
        if strategy == "1a1":
            if header[2] != "pair" or len(header) != 5:
                r.fail("1a1 machine header must be 'machine <m> pair <i> <j>'")
            pairs.append((int(header[3]), int(header[4])))
        elif header[2] != "class" or len(header) != 4:
            r.fail("1aa machine header must be 'machine <m> class <k>'")
        bias = _parse_float(r, r.key("bias"), "bias")
        nsv = int(r.key("nsv"))
        coefs = np.empty(nsv)
        svs = np.empty((nsv, bands))
        for s in range(nsv):
            parts = r.next("sv row").split()
            if parts[0] != "sv" or len(parts) != 2 + bands:
                r.fail(f"support vector row {s} malformed")
            coefs[s] = float(parts[1])
            svs[s] = [float(v) for v in parts[2:]]
        machines.append(
            BinaryModel(
                kernel=spec,
                support_vectors=svs,
                dual_coefs=coefs,
                bias=bias,
                C=c_value,
            )
        )
    return MulticlassModel(
        strategy=strategy,
        classes=classes,
        machines=tuple(machines),
        pairs=tuple(pairs) if strategy == "1a1" else None,
        standardizer=std,
    )


def _code_token(code, members):
    if code == UNCLASSIFIED:
        return "U"
    if code == MIXED:
        return "M" + "+".join(str(m) for m in members)
    return str(code)


def save_labels(grid, path, strategy, kernel_kind):
    """Serialize a label grid with its strategy/kernel provenance."""
    lines = [
        LABELS_MAGIC,
        f"strategy {strategy}",
        f"kernel {kernel_kind}",
        f"width {grid.width}",
        f"height {grid.height}",
        f"classes {','.join(grid.classes.names)}",
    ]
    for y in range(grid.height):
        lines.append(
            " ".join(
                _code_token(
                    int(grid.codes[y, x]), grid.mixed_members.get((x, y), ())
                )
                for x in range(grid.width)
            )
        )
    atomic_write_text(path, "\n".join(lines) + "\n")
    return path


def load_labels(path):
    """Load a label grid. Returns (grid, strategy, kernel_kind)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    r = _LineReader(path, text)
    try:
        return _read_labels(r)
    except (ValueError, IndexError) as exc:
        raise ParseError(f"corrupt label file: {exc}", path=path) from exc


def _read_labels(r):
    if r.next("magic") != LABELS_MAGIC:
        raise ParseError(f"not a {LABELS_MAGIC!r} file", path=r.path)
    strategy = r.key("strategy")
    kernel_kind = r.key("kernel")
    width = int(r.key("width"))
    height = int(r.key("height"))
    classes = ClassSet(tuple(r.key("classes").split(",")))
    codes = np.zeros((height, width), dtype=np.int32)
    mixed_members = {}
    for y in range(height if width else 0):
        tokens = r.next(f"label row {y}").split()
        if len(tokens) != width:
            r.fail(f"row {y} has {len(tokens)} tokens, expected {width}")
        for x, token in enumerate(tokens):
            if token == "U":
                codes[y, x] = UNCLASSIFIED
            elif token.startswith("M"):
                members = tuple(int(t) for t in token[1:].split("+"))
                codes[y, x] = MIXED
                mixed_members[(x, y)] = members
            else:
                codes[y, x] = int(token)
    return (
        LabelGrid(codes, classes, mixed_members),
        strategy,
        kernel_kind,
    )
