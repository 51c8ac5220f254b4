"""Raster, sample and map file handling, plus the synthetic scene maker.

Raster format ("MBRS"): a text header of exactly five lines

    MBRS 1
    width <int>
    height <int>
    bands <int>
    dtype u8|f64

followed by a line reading ``data`` and the raw pixel values,
band-sequential (all of band 0 in row-major order, then band 1, ...),
little-endian. The u8 payload round-trips bit-exactly; f64 is written as
IEEE doubles and also round-trips exactly.

Sample and reference files are comma-delimited text with one
``x,y,class`` row per pixel; ``#`` starts a comment.

Exported maps are binary PPM (P6) with a sidecar ``.legend.txt`` naming
each color. Unclassified pixels render black, mixed pixels red, classes
from an eight-color cycle.
"""

import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import InputError, ParseError
from .multiclass import MIXED, UNCLASSIFIED, ClassSet, LabelGrid

MAGIC = b"MBRS 1"
DTYPES = {"u8": np.dtype("<u1"), "f64": np.dtype("<f8")}

PALETTE = (
    (0, 0, 255),  # class 0: blue (e.g. water)
    (0, 200, 0),  # class 1: green (e.g. vegetation)
    (160, 160, 160),  # class 2: gray (e.g. built-up)
    (255, 255, 0),
    (0, 255, 255),
    (255, 0, 255),
    (255, 165, 0),
    (139, 69, 19),
)
BLACK = (0, 0, 0)  # reserved: unclassified
RED = (255, 0, 0)  # reserved: mixed


def atomic_write_bytes(path, payload):
    """Write via a temp file and rename so partial output never lands."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text):
    atomic_write_bytes(path, text.encode("utf-8"))


@dataclass(frozen=True)
class RasterImage:
    """A multi-band image; values live in a (bands, height, width) array."""

    width: int
    height: int
    bands: int
    values: np.ndarray

    def __post_init__(self):
        if self.width < 0 or self.height < 0 or self.bands < 1:
            raise InputError("raster dimensions out of range")
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.bands, self.height, self.width):
            raise InputError(
                f"value array shape {v.shape} does not match "
                f"({self.bands}, {self.height}, {self.width})"
            )
        if v.size and not np.isfinite(v).all():
            raise InputError("raster values must be finite")
        object.__setattr__(self, "values", v)

    def pixel(self, x, y):
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise InputError(f"pixel ({x}, {y}) is outside the raster")
        return self.values[:, y, x].copy()

    def pixel_matrix(self):
        """All pixels as rows, row-major order, shape (w*h, bands)."""
        return (
            self.values.reshape(self.bands, -1).T.copy()
            if self.values.size
            else np.zeros((0, self.bands))
        )


def _parse_header_line(raw, offset, path, key):
    line = raw.decode("ascii", errors="replace").rstrip("\n")
    parts = line.split()
    if len(parts) != 2 or parts[0] != key:
        raise ParseError(
            f"expected header line '{key} <value>', got {line!r}",
            path=path, offset=offset,
        )
    return parts[1]


def load_raster(path):
    """Parse an MBRS raster file."""
    with open(path, "rb") as fh:
        blob = fh.read()
    offset = 0

    def next_line():
        nonlocal offset
        end = blob.find(b"\n", offset)
        if end < 0:
            raise ParseError(
                "truncated header", path=path, offset=offset
            )
        raw = blob[offset:end]
        line_offset = offset
        offset = end + 1
        return raw, line_offset

    raw, at = next_line()
    if raw != MAGIC:
        raise ParseError(
            f"bad magic {raw[:16]!r}, expected {MAGIC.decode()!r}",
            path=path, offset=at,
        )
    dims = {}
    for key in ("width", "height", "bands"):
        raw, at = next_line()
        text = _parse_header_line(raw, at, path, key)
        try:
            dims[key] = int(text)
        except ValueError:
            raise ParseError(
                f"{key} must be an integer, got {text!r}",
                path=path, offset=at,
            ) from None
        if dims[key] < 0 or (key == "bands" and dims[key] < 1):
            raise ParseError(
                f"{key} out of range: {dims[key]}", path=path, offset=at
            )
    raw, at = next_line()
    dtype_name = _parse_header_line(raw, at, path, "dtype")
    if dtype_name not in DTYPES:
        raise ParseError(
            f"unknown dtype {dtype_name!r} (expected u8 or f64)",
            path=path, offset=at,
        )
    raw, at = next_line()
    if raw != b"data":
        raise ParseError(
            f"expected 'data' line, got {raw[:16]!r}", path=path, offset=at
        )
    dtype = DTYPES[dtype_name]
    count = dims["width"] * dims["height"] * dims["bands"]
    expected = count * dtype.itemsize
    payload = blob[offset:]
    if len(payload) < expected:
        raise ParseError(
            f"truncated data: expected {expected} bytes, found {len(payload)}",
            path=path, offset=offset + len(payload),
        )
    if len(payload) > expected:
        raise ParseError(
            f"{len(payload) - expected} trailing bytes after pixel data",
            path=path, offset=offset + expected,
        )
    values = np.frombuffer(payload, dtype=dtype).astype(float)
    if dtype_name == "f64":
        bad = np.nonzero(~np.isfinite(values))[0]
        if bad.size:
            raise ParseError(
                "non-finite pixel value",
                path=path, offset=offset + int(bad[0]) * dtype.itemsize,
            )
    return RasterImage(
        width=dims["width"],
        height=dims["height"],
        bands=dims["bands"],
        values=values.reshape(dims["bands"], dims["height"], dims["width"]),
    )


def save_raster(raster, path, dtype="f64"):
    """Write an MBRS raster file atomically."""
    if dtype not in DTYPES:
        raise InputError(f"unknown dtype {dtype!r} (expected u8 or f64)")
    flat = raster.values.ravel()
    if dtype == "u8":
        rounded = np.rint(flat)
        if not np.array_equal(rounded, flat) or flat.min(initial=0) < 0 \
                or flat.max(initial=0) > 255:
            raise InputError("u8 rasters need integral values in [0, 255]")
        payload = rounded.astype(DTYPES[dtype]).tobytes()
    else:
        payload = flat.astype(DTYPES[dtype]).tobytes()
    header = (
        f"{MAGIC.decode()}\nwidth {raster.width}\nheight {raster.height}\n"
        f"bands {raster.bands}\ndtype {dtype}\ndata\n"
    )
    atomic_write_bytes(path, header.encode("ascii") + payload)


@dataclass(frozen=True)
class SampleSet:
    """Labeled training pixels: feature rows plus their class names.

    positions, when known, holds the (x, y) pixel each row came from.
    """

    features: np.ndarray
    names: tuple
    classes: ClassSet
    positions: tuple = None

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    def by_class(self):
        """Class name -> feature block, in class order."""
        rows = np.asarray(self.names)
        return {
            name: self.features[rows == name]
            for name in self.classes.names
        }


def _iter_position_rows(path, width, height):
    with open(path, "rb") as fh:
        blob = fh.read()
    offset = 0
    for raw in blob.split(b"\n"):
        line_offset = offset
        offset += len(raw) + 1
        text = raw.decode("utf-8", errors="replace").strip()
        if not text or text.startswith("#"):
            continue
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ParseError(
                f"expected 'x,y,class', got {text!r}",
                path=path, offset=line_offset,
            )
        try:
            x, y = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(
                f"positions must be integers, got {text!r}",
                path=path, offset=line_offset,
            ) from None
        if not (0 <= x < width and 0 <= y < height):
            raise ParseError(
                f"position ({x}, {y}) is outside the {width}x{height} raster",
                path=path, offset=line_offset,
            )
        if not parts[2]:
            raise ParseError(
                "empty class name", path=path, offset=line_offset
            )
        yield x, y, parts[2]


def load_samples(path, raster):
    """Read training pixels; features come from the raster, classes in
    order of first appearance. Duplicate positions are legal."""
    rows = list(_iter_position_rows(path, raster.width, raster.height))
    if not rows:
        raise ParseError("no sample rows", path=path, offset=0)
    ordered = list(dict.fromkeys(name for _, _, name in rows))
    features = np.array([raster.pixel(x, y) for x, y, _ in rows])
    return SampleSet(
        features=features,
        names=tuple(name for _, _, name in rows),
        classes=ClassSet(tuple(ordered)),
        positions=tuple((x, y) for x, y, _ in rows),
    )


def load_reference(path, width, height):
    """Read ground-truth pixels as a list of ((x, y), class name)."""
    return [
        ((x, y), name)
        for x, y, name in _iter_position_rows(path, width, height)
    ]


def save_positions(rows, path, comment):
    """Write (x, y, class) rows in the delimited sample format."""
    lines = [f"# {comment}"]
    lines += [f"{x},{y},{name}" for x, y, name in rows]
    atomic_write_text(path, "\n".join(lines) + "\n")


def class_palette(n_classes):
    """Colors for n classes from the documented cycle."""
    return tuple(PALETTE[k % len(PALETTE)] for k in range(n_classes))


@dataclass(frozen=True)
class LandCoverMap:
    """A label grid with the palette it renders under."""

    labels: LabelGrid
    palette: tuple

    def __post_init__(self):
        if len(self.palette) < self.labels.classes.n:
            raise InputError("palette does not cover all classes")
        for color in self.palette:
            if tuple(color) in (BLACK, RED):
                raise InputError(
                    "black and red are reserved for unclassified and mixed"
                )

    @classmethod
    def from_labels(cls, labels):
        return cls(labels=labels, palette=class_palette(labels.classes.n))

    def render(self):
        """RGB array of shape (height, width, 3)."""
        h, w = self.labels.height, self.labels.width
        lut = np.zeros((self.labels.classes.n + 2, 3), dtype=np.uint8)
        for k in range(self.labels.classes.n):
            lut[k] = self.palette[k]
        lut[UNCLASSIFIED] = BLACK  # index -1
        lut[MIXED] = RED  # index -2
        if h == 0 or w == 0:
            return np.zeros((h, w, 3), dtype=np.uint8)
        return lut[self.labels.codes]


def legend_path(map_path):
    stem, _ = os.path.splitext(str(map_path))
    return stem + ".legend.txt"


def export_map(cover_map, path):
    """Write a binary PPM (P6) plus a sidecar legend. Returns both paths."""
    rgb = cover_map.render()
    h, w = rgb.shape[0], rgb.shape[1]
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    atomic_write_bytes(path, header + rgb.tobytes())
    lines = ["# legend: R,G,B label"]
    for k, name in enumerate(cover_map.labels.classes.names):
        r, g, b = cover_map.palette[k]
        lines.append(f"{r},{g},{b} {name}")
    lines.append(f"{BLACK[0]},{BLACK[1]},{BLACK[2]} unclassified")
    lines.append(f"{RED[0]},{RED[1]},{RED[2]} mixed")
    legend = legend_path(path)
    atomic_write_text(legend, "\n".join(lines) + "\n")
    return path, legend


@dataclass(frozen=True)
class BlobClass:
    """One synthetic land-cover class: band means plus isotropic noise."""

    name: str
    mean: tuple
    sigma: float


def blob_means(n_classes, n_bands, separation, sigma):
    """Class means with pairwise distance exactly separation * sigma."""
    if n_bands < n_classes:
        raise InputError("need at least as many bands as classes")
    scale = separation * sigma / np.sqrt(2.0)
    means = np.zeros((n_classes, n_bands))
    for k in range(n_classes):
        means[k, k] = scale
    return means


def gen_synthetic(blobs, width, height, train_per_class, ref_per_class, seed):
    """Build a deterministic synthetic scene.

    The raster is split into horizontal stripes, one per class; each
    pixel is the class mean plus sigma-scaled Gaussian noise. Training
    and reference positions are disjoint random picks inside each
    stripe. The generator is PCG64 seeded with `seed`, so output is
    bit-reproducible for a fixed seed.

    Returns (RasterImage, SampleSet, reference rows).
    """
    blobs = list(blobs)
    if len(blobs) < 2:
        raise InputError("need at least two classes")
    if train_per_class < 1 or ref_per_class < 1:
        raise InputError("per-class sample counts must be >= 1")
    bands = len(blobs[0].mean)
    for blob in blobs:
        if not blob.sigma > 0:
            raise InputError(f"class {blob.name!r} has sigma <= 0")
        if len(blob.mean) != bands:
            raise InputError("class means disagree on the number of bands")
    n_classes = len(blobs)
    if height < n_classes:
        raise InputError("raster too short for one stripe per class")

    rng = np.random.Generator(np.random.PCG64(seed))
    stripe = np.minimum(
        (np.arange(height) * n_classes) // height, n_classes - 1
    )
    values = np.empty((bands, height, width))
    for k, blob in enumerate(blobs):
        rows = stripe == k
        noise = rng.standard_normal((bands, int(rows.sum()), width))
        values[:, rows, :] = (
            np.asarray(blob.mean, dtype=float)[:, None, None]
            + blob.sigma * noise
        )
    raster = RasterImage(width=width, height=height, bands=bands,
                         values=values)

    train_rows = []
    ref_rows = []
    needed = train_per_class + ref_per_class
    for k, blob in enumerate(blobs):
        mask = np.broadcast_to((stripe == k)[:, None], (height, width))
        ys, xs = np.nonzero(mask)
        if ys.size < needed:
            raise InputError(
                f"class {blob.name!r} stripe has {ys.size} pixels, "
                f"needs {needed}"
            )
        pick = rng.permutation(ys.size)[:needed]
        for p in pick[:train_per_class]:
            train_rows.append((int(xs[p]), int(ys[p]), blob.name))
        for p in pick[train_per_class:]:
            ref_rows.append((int(xs[p]), int(ys[p]), blob.name))

    features = np.array([raster.pixel(x, y) for x, y, _ in train_rows])
    samples = SampleSet(
        features=features,
        names=tuple(name for _, _, name in train_rows),
        classes=ClassSet(tuple(blob.name for blob in blobs)),
        positions=tuple((x, y) for x, y, _ in train_rows),
    )
    reference = [((x, y), name) for x, y, name in ref_rows]
    return raster, samples, reference
