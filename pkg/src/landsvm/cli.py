"""Command-line pipeline: synth, train, classify, assess, compare.

A run is configured by a flat ``key = value`` config file overridden by
CLI flags. ``train`` grid-searches each kernel by stratified k-fold
cross-validation (pairwise-voting accuracy), then fits both strategies
with the selected parameters. ``classify`` writes a label grid, a PPM
land-cover map with legend, and a tally. ``assess`` scores a label grid
against reference pixels; ``compare`` assembles the per-kernel summary
tables from the assess outputs.

Exit codes: 0 success, 2 config error, 3 parse error, 4 training
failure, 5 incomplete comparison, 6 other invalid input, 1 unexpected.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import assessment, model_io, multiclass, raster
from .binary import TrainConfig
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateTrainingError,
    IncompleteGridError,
    ParseError,
    ToolkitError,
)
from .kernels import KERNEL_KINDS, KernelSpec

EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_TRAIN = 4
EXIT_INCOMPLETE = 5
EXIT_INPUT = 6

DEFAULT_CLASS_NAMES = (
    "water", "vegetation", "builtup", "bare", "wetland", "forest",
    "urban", "sand",
)


@dataclass(frozen=True)
class RunConfig:
    """Everything a full pipeline run needs."""

    raster: str = None
    samples: str = None
    reference: str = None
    kernels: tuple = KERNEL_KINDS
    strategies: tuple = ("1a1", "1aa")
    c_grid: tuple = (0.1, 1.0, 10.0, 100.0)
    gamma_grid: tuple = (0.01, 0.1, 1.0, 10.0)  # scaled by 1/bands for RBF
    degree: int = 3
    coef0: float = 1.0
    folds: int = 3
    tolerance: float = 1e-3
    max_passes: int = 10
    out_dir: str = "out"
    seed: int = 0
    strict_1aa: bool = True

    def validate(self):
        for k in self.kernels:
            if k not in KERNEL_KINDS:
                raise ConfigError(f"unknown kernel {k!r}")
        if not self.kernels:
            raise ConfigError("kernel list is empty")
        for s in self.strategies:
            if s not in multiclass.STRATEGIES:
                raise ConfigError(f"unknown strategy {s!r}")
        if not self.strategies:
            raise ConfigError("strategy list is empty")
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        if not self.c_grid or any(c <= 0 for c in self.c_grid):
            raise ConfigError("c_grid must hold positive values")
        if not self.gamma_grid or any(g <= 0 for g in self.gamma_grid):
            raise ConfigError("gamma_grid must hold positive values")
        if self.degree < 1:
            raise ConfigError("degree must be >= 1")
        return self


_BOOL_WORDS = {"true": True, "false": False, "1": True, "0": False,
               "yes": True, "no": False}


def _parse_config_value(key, text):
    text = text.strip()
    try:
        if key in ("kernels", "strategies"):
            return tuple(t.strip() for t in text.split(",") if t.strip())
        if key in ("c_grid", "gamma_grid"):
            return tuple(float(t) for t in text.split(",") if t.strip())
        if key in ("degree", "folds", "seed", "max_passes"):
            return int(text)
        if key in ("coef0", "tolerance"):
            return float(text)
        if key == "strict_1aa":
            if text.lower() not in _BOOL_WORDS:
                raise ValueError(text)
            return _BOOL_WORDS[text.lower()]
        if key in ("raster", "samples", "reference", "out_dir"):
            return text
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}") from None
    raise ConfigError(f"unknown config key {key!r}")


def load_config(path):
    """Parse a flat 'key = value' config file."""
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ConfigError(
                f"{path}:{lineno}: expected 'key = value', got {text!r}"
            )
        key, _, value = text.partition("=")
        values[key.strip()] = _parse_config_value(key.strip(), value)
    return RunConfig(**values)


def _merge_flags(config, args):
    overrides = {}
    for key in (
        "raster", "samples", "reference", "out_dir", "seed", "folds",
        "degree", "coef0", "tolerance", "max_passes",
    ):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    for key in ("kernels", "strategies"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = tuple(t.strip() for t in value.split(","))
    for key in ("c_grid", "gamma_grid"):
        value = getattr(args, key, None)
        if value is not None:
            try:
                overrides[key] = tuple(float(t) for t in value.split(","))
            except ValueError:
                raise ConfigError(f"bad value for {key}: {value!r}") from None
    if getattr(args, "strict_1aa", None) is not None:
        word = args.strict_1aa.lower()
        if word not in _BOOL_WORDS:
            raise ConfigError(f"--strict-1aa expects true/false, got {word!r}")
        overrides["strict_1aa"] = _BOOL_WORDS[word]
    return replace(config, **overrides)


def build_config(args):
    config = RunConfig()
    if getattr(args, "config", None):
        config = load_config(args.config)
    return _merge_flags(config, args).validate()


def _ensure_out_dir(config):
    os.makedirs(config.out_dir, exist_ok=True)
    return config.out_dir


def _load_inputs(config):
    if not config.raster:
        raise ConfigError("no raster path configured")
    if not config.samples:
        raise ConfigError("no samples path configured")
    if not os.path.exists(config.raster):
        raise ConfigError(f"raster file {config.raster!r} does not exist")
    if not os.path.exists(config.samples):
        raise ConfigError(f"samples file {config.samples!r} does not exist")
    img = raster.load_raster(config.raster)
    samples = raster.load_samples(config.samples, img)
    return img, samples


def _candidate_grid(kind, config, bands):
    gammas = [g / bands for g in config.gamma_grid] if kind == "rbf" else [None]
    grid = []
    for gamma in gammas:
        for c in config.c_grid:
            spec = KernelSpec(
                kind=kind, degree=config.degree, gamma=gamma,
                coef0=config.coef0,
            )
            grid.append((spec, TrainConfig(
                C=c, tolerance=config.tolerance, max_passes=config.max_passes,
            )))
    return grid


def _stratified_folds(names, classes, folds):
    """Deterministic round-robin fold id per sample, stratified by class."""
    names = np.asarray(names)
    fold_of = np.empty(len(names), dtype=int)
    for cname in classes.names:
        idx = np.nonzero(names == cname)[0]
        if idx.size < folds:
            raise ConfigError(
                f"class {cname!r} has {idx.size} samples, fewer than "
                f"{folds} folds"
            )
        fold_of[idx] = np.arange(idx.size) % folds
    return fold_of


def _cv_accuracy(samples, fold_of, folds, spec, train_config):
    """Cross-validated pairwise-voting accuracy of one candidate."""
    names = np.asarray(samples.names)
    correct = 0
    for f in range(folds):
        test = fold_of == f
        held_names = names[test]
        held_x = samples.features[test]
        blocks = {
            cname: samples.features[(~test) & (names == cname)]
            for cname in samples.classes.names
        }
        model = multiclass.train_one_vs_one(blocks, spec, train_config)
        codes, _ = multiclass.predict_codes(model, held_x)
        want = np.array(
            [samples.classes.index(nm) for nm in held_names], dtype=np.int32
        )
        correct += int((codes == want).sum())
    return correct / samples.n_samples


def tune_kernel(samples, kind, config):
    """Pick (KernelSpec, TrainConfig) for one kernel by multiclass CV."""
    grid = _candidate_grid(kind, config, samples.n_features)
    fold_of = _stratified_folds(samples.names, samples.classes, config.folds)
    accs = [
        _cv_accuracy(samples, fold_of, config.folds, spec, tc)
        for spec, tc in grid
    ]
    best = 0
    for i in range(1, len(grid)):
        if accs[i] > accs[best] or (
            accs[i] == accs[best] and grid[i][1].C < grid[best][1].C
        ):
            best = i
    return grid[best][0], grid[best][1], accs[best]


def model_path(out_dir, strategy, kind):
    return os.path.join(out_dir, f"model_{strategy}_{kind}.txt")


def cmd_train(args):
    config = build_config(args)
    img, samples = _load_inputs(config)
    out_dir = _ensure_out_dir(config)
    trainers = {
        "1aa": multiclass.train_one_vs_all,
        "1a1": multiclass.train_one_vs_one,
    }
    blocks = samples.by_class()
    written = []
    for kind in config.kernels:
        spec, train_config, acc = tune_kernel(samples, kind, config)
        gamma_note = (
            "" if spec.gamma is None else f" gamma={spec.gamma:g}"
        )
        print(
            f"[train] {kind}: C={train_config.C:g}{gamma_note} "
            f"(cv accuracy {acc:.4f})"
        )
        for strategy in config.strategies:
            try:
                model = trainers[strategy](blocks, spec, train_config)
            except (DegenerateTrainingError, ConvergenceError) as exc:
                raise type(exc)(
                    f"{strategy}/{kind}: {exc}"
                ) from exc
            path = model_path(out_dir, strategy, kind)
            model_io.save_model(
                model, path,
                tolerance=train_config.tolerance,
                max_passes=train_config.max_passes,
            )
            written.append(path)
            print(f"[train] wrote {path}")
    return written


def _tally_csv(tally, classes):
    lines = ["category,count"]
    for name, count in zip(classes.names, tally.class_counts):
        lines.append(f"{name},{count}")
    lines.append(f"unclassified,{tally.unclassified}")
    lines.append(f"mixed,{tally.mixed}")
    lines.append(f"total,{tally.total}")
    return "\n".join(lines) + "\n"


def cmd_classify(args):
    config = build_config(args)
    raster_path = args.raster or config.raster
    if not raster_path:
        raise ConfigError("no raster path configured")
    model = model_io.load_model(args.model)
    img = raster.load_raster(raster_path)
    out_dir = _ensure_out_dir(config)
    grid, tally = multiclass.classify_raster(
        model, img, strict=config.strict_1aa
    )
    kind = model.kernel.kind
    tag = f"{model.strategy}_{kind}"
    labels_file = os.path.join(out_dir, f"labels_{tag}.txt")
    model_io.save_labels(grid, labels_file, model.strategy, kind)
    map_file = os.path.join(out_dir, f"map_{tag}.ppm")
    raster.export_map(raster.LandCoverMap.from_labels(grid), map_file)
    tally_file = os.path.join(out_dir, f"tally_{tag}.csv")
    raster.atomic_write_text(tally_file, _tally_csv(tally, grid.classes))
    print(f"[classify] wrote {labels_file}, {map_file}, {tally_file}")
    for name, count in zip(grid.classes.names, tally.class_counts):
        print(f"[classify] {name}: {count}")
    print(f"[classify] unclassified: {tally.unclassified}")
    print(f"[classify] mixed: {tally.mixed}")
    return labels_file, map_file, tally_file


def assess_path(out_dir, strategy, kind):
    return os.path.join(out_dir, f"assess_{strategy}_{kind}.json")


def cmd_assess(args):
    config = build_config(args)
    reference_path = args.reference or config.reference
    if not reference_path:
        raise ConfigError("no reference path configured")
    grid, strategy, kind = model_io.load_labels(args.labels)
    reference = raster.load_reference(
        reference_path, grid.width, grid.height
    )
    cm = assessment.build_confusion(grid, reference)
    result = assessment.kappa(cm)
    tally = grid.counts()
    out_dir = _ensure_out_dir(config)
    payload = {
        "strategy": strategy,
        "kernel": kind,
        "classes": list(grid.classes.names),
        "n_reference": result.n,
        "kappa": result.kappa,
        "variance": result.variance,
        "unclassified": tally.unclassified,
        "mixed": tally.mixed,
        "class_counts": list(tally.class_counts),
        "confusion": cm.counts.tolist(),
    }
    path = assess_path(out_dir, strategy, kind)
    raster.atomic_write_text(
        path, json.dumps(payload, indent=2, sort_keys=True) + "\n"
    )
    print(f"[assess] {strategy}/{kind}: kappa={result.kappa:.4f} "
          f"variance={result.variance:.3e} -> {path}")
    return path


def cmd_compare(args):
    config = build_config(args)
    out_dir = _ensure_out_dir(config)
    cells = {}
    missing = []
    for kind in config.kernels:
        for strategy in ("1a1", "1aa"):
            path = assess_path(out_dir, strategy, kind)
            if not os.path.exists(path):
                missing.append((strategy, kind))
                continue
            with open(path, "r", encoding="utf-8") as fh:
                payload = json.load(fh)
            cells[(strategy, kind)] = assessment.CellResult(
                unclassified=payload["unclassified"],
                mixed=payload["mixed"],
                kappa=assessment.KappaResult(
                    kappa=payload["kappa"],
                    variance=payload["variance"],
                    n=payload["n_reference"],
                ),
            )
    if missing:
        raise IncompleteGridError(missing)
    report = assessment.compare_report(cells, config.kernels)
    text_path = os.path.join(out_dir, "report.txt")
    csv_path = os.path.join(out_dir, "report.csv")
    raster.atomic_write_text(text_path, report.to_text())
    raster.atomic_write_text(csv_path, report.to_delimited())
    print(report.to_text(), end="")
    print(f"[compare] wrote {text_path} and {csv_path}")
    return text_path, csv_path


def cmd_synth(args):
    config = build_config(args)
    out_dir = _ensure_out_dir(config)
    n_classes = args.classes
    bands = args.bands
    if n_classes < 2:
        raise ConfigError("need at least two classes")
    if n_classes > len(DEFAULT_CLASS_NAMES):
        raise ConfigError(
            f"at most {len(DEFAULT_CLASS_NAMES)} synthetic classes"
        )
    means = raster.blob_means(n_classes, bands, args.separation, args.sigma)
    blobs = [
        raster.BlobClass(
            name=DEFAULT_CLASS_NAMES[k],
            mean=tuple(means[k]),
            sigma=args.sigma,
        )
        for k in range(n_classes)
    ]
    img, samples, reference = raster.gen_synthetic(
        blobs, args.width, args.height, args.train, args.ref, config.seed
    )
    raster_file = os.path.join(out_dir, "raster.mbr")
    raster.save_raster(img, raster_file, dtype="f64")
    sample_file = os.path.join(out_dir, "train_samples.csv")
    ref_file = os.path.join(out_dir, "reference.csv")
    raster.save_positions(
        [(x, y, name) for (x, y), name in zip(samples.positions,
                                              samples.names)],
        sample_file, "training pixels: x,y,class",
    )
    raster.save_positions(
        [(x, y, name) for (x, y), name in reference],
        ref_file, "reference pixels: x,y,class",
    )
    print(f"[synth] wrote {raster_file}, {sample_file}, {ref_file}")
    return raster_file, sample_file, ref_file


def _add_common(parser):
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--out-dir", dest="out_dir",
                        help="output directory (default: out)")
    parser.add_argument("--seed", type=int, help="RNG seed")
    parser.add_argument(
        "--strict-1aa", dest="strict_1aa", metavar="BOOL",
        help="true: unclaimed/multiply-claimed pixels stay unclassified/"
             "mixed (default); false: winner-take-all",
    )


def make_parser():
    parser = argparse.ArgumentParser(
        prog="landsvm",
        description="Multiclass SVM land-cover classification toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic scene")
    _add_common(p)
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--bands", type=int, default=6)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--separation", type=float, default=10.0,
                   help="pairwise class-mean distance in sigmas")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--train", type=int, default=100,
                   help="training pixels per class")
    p.add_argument("--ref", type=int, default=100,
                   help="reference pixels per class")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="tune and train all models")
    _add_common(p)
    p.add_argument("--raster")
    p.add_argument("--samples")
    p.add_argument("--kernels", help="comma list from: " +
                   ",".join(KERNEL_KINDS))
    p.add_argument("--strategies", help="comma list from: 1a1,1aa")
    p.add_argument("--c-grid", dest="c_grid", help="comma list of C values")
    p.add_argument("--gamma-grid", dest="gamma_grid",
                   help="comma list of RBF gammas (scaled by 1/bands)")
    p.add_argument("--degree", type=int)
    p.add_argument("--coef0", type=float)
    p.add_argument("--folds", type=int)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--max-passes", dest="max_passes", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="classify a raster with a model")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--raster")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("assess", help="score a label grid against reference")
    _add_common(p)
    p.add_argument("--labels", required=True)
    p.add_argument("--reference")
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("compare", help="build the strategy comparison report")
    _add_common(p)
    p.add_argument("--kernels", help="comma list from: " +
                   ",".join(KERNEL_KINDS))
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DegenerateTrainingError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRAIN
    except IncompleteGridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


def console_main():
    raise SystemExit(main())
