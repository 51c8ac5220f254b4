import json

import pytest

from landsvm.cli import (
    EXIT_CONFIG,
    EXIT_INCOMPLETE,
    EXIT_INPUT,
    EXIT_PARSE,
    RunConfig,
    load_config,
    main,
)
from landsvm.errors import ConfigError


def write_config(path, out_dir, **extra):
    values = {
        "raster": f"{out_dir}/raster.mbr",
        "samples": f"{out_dir}/train_samples.csv",
        "reference": f"{out_dir}/reference.csv",
        "out_dir": str(out_dir),
        "folds": "2",
        "c_grid": "1, 10",
        "gamma_grid": "0.5",
        "seed": "42",
    }
    values.update(extra)
    lines = ["# test pipeline"] + [f"{k} = {v}" for k, v in values.items()]
    path.write_text("\n".join(lines) + "\n")
    return path


def run_pipeline(tmp_path, out_name="run", synth_args=(), train_args=()):
    out_dir = tmp_path / out_name
    cfg = write_config(tmp_path / f"{out_name}.cfg", out_dir)
    assert main([
        "synth", "--out-dir", str(out_dir), "--seed", "42",
        "--width", "24", "--height", "24", "--train", "25", "--ref", "25",
        *synth_args,
    ]) == 0
    assert main(["train", "--config", str(cfg), *train_args]) == 0
    for strategy in ("1a1", "1aa"):
        for kind in ("linear", "quadratic", "polynomial", "rbf"):
            model = out_dir / f"model_{strategy}_{kind}.txt"
            assert main([
                "classify", "--config", str(cfg), "--model", str(model),
            ]) == 0
            labels = out_dir / f"labels_{strategy}_{kind}.txt"
            assert main([
                "assess", "--config", str(cfg), "--labels", str(labels),
            ]) == 0
    assert main(["compare", "--config", str(cfg)]) == 0
    return out_dir


def test_config_file_parsing(tmp_path):
    path = tmp_path / "cfg.txt"
    path.write_text(
        "# comment\nkernels = linear, rbf\nstrategies = 1a1\n"
        "c_grid = 0.5, 5\nfolds = 4\nstrict_1aa = false\nseed = 7\n"
    )
    config = load_config(path)
    assert config.kernels == ("linear", "rbf")
    assert config.strategies == ("1a1",)
    assert config.c_grid == (0.5, 5.0)
    assert config.folds == 4
    assert config.strict_1aa is False
    assert config.seed == 7


def test_config_rejects_unknown_keys_and_values(tmp_path):
    path = tmp_path / "cfg.txt"
    path.write_text("nonsense = 1\n")
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text("folds = soon\n")
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text("folds 3\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_run_config_validation():
    with pytest.raises(ConfigError):
        RunConfig(kernels=("linear", "cubic")).validate()
    with pytest.raises(ConfigError):
        RunConfig(strategies=("1a2",)).validate()
    with pytest.raises(ConfigError):
        RunConfig(folds=1).validate()
    with pytest.raises(ConfigError):
        RunConfig(c_grid=(0.0,)).validate()


def test_missing_raster_is_config_error(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(f"samples = nope.csv\nout_dir = {tmp_path}\n")
    assert main(["train", "--config", str(cfg)]) == EXIT_CONFIG
    cfg.write_text(
        f"raster = missing.mbr\nsamples = nope.csv\nout_dir = {tmp_path}\n"
    )
    assert main(["train", "--config", str(cfg)]) == EXIT_CONFIG


def test_corrupt_raster_is_parse_error(tmp_path):
    bad = tmp_path / "bad.mbr"
    bad.write_bytes(b"JUNK\n")
    samples = tmp_path / "s.csv"
    samples.write_text("0,0,a\n")
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(
        f"raster = {bad}\nsamples = {samples}\nout_dir = {tmp_path}\n"
    )
    assert main(["train", "--config", str(cfg)]) == EXIT_PARSE


def test_synth_outputs_and_determinism(tmp_path):
    args = [
        "synth", "--seed", "9", "--width", "16", "--height", "16",
        "--train", "5", "--ref", "5",
    ]
    assert main([*args, "--out-dir", str(tmp_path / "a")]) == 0
    assert main([*args, "--out-dir", str(tmp_path / "b")]) == 0
    for name in ("raster.mbr", "train_samples.csv", "reference.csv"):
        assert (tmp_path / "a" / name).read_bytes() \
            == (tmp_path / "b" / name).read_bytes()


def test_synth_validation(tmp_path):
    assert main([
        "synth", "--out-dir", str(tmp_path), "--classes", "1",
    ]) == EXIT_CONFIG
    # fewer bands than classes: no mean layout exists
    assert main([
        "synth", "--out-dir", str(tmp_path), "--classes", "4", "--bands", "2",
    ]) == EXIT_INPUT


def test_full_pipeline(tmp_path):
    out_dir = run_pipeline(tmp_path)
    models = sorted(p.name for p in out_dir.glob("model_*.txt"))
    assert len(models) == 8  # 4 kernels x 2 strategies
    report = (out_dir / "report.txt").read_text()
    assert "Summary of unclassified and mixed pixels" in report
    assert "Summary of kappa values" in report
    csv_lines = (out_dir / "report.csv").read_text().strip().split("\n")
    assert len(csv_lines) == 9
    for strategy in ("1a1", "1aa"):
        for kind in ("linear", "quadratic", "polynomial", "rbf"):
            payload = json.loads(
                (out_dir / f"assess_{strategy}_{kind}.json").read_text()
            )
            assert payload["strategy"] == strategy
            assert payload["kernel"] == kind
            assert -1.0 <= payload["kappa"] <= 1.0
            assert (out_dir / f"map_{strategy}_{kind}.ppm").exists()
            assert (out_dir / f"map_{strategy}_{kind}.legend.txt").exists()
            assert (out_dir / f"tally_{strategy}_{kind}.csv").exists()


def test_single_strategy_trains_four_models(tmp_path):
    out_dir = tmp_path / "solo"
    cfg = write_config(tmp_path / "solo.cfg", out_dir, strategies="1a1")
    assert main([
        "synth", "--out-dir", str(out_dir), "--seed", "1",
        "--width", "16", "--height", "16", "--train", "8", "--ref", "8",
    ]) == 0
    assert main(["train", "--config", str(cfg)]) == 0
    assert len(list(out_dir.glob("model_*.txt"))) == 4
    assert all("1a1" in p.name for p in out_dir.glob("model_*.txt"))


def test_compare_reports_missing_cells(tmp_path):
    out_dir = tmp_path / "incomplete"
    out_dir.mkdir()
    cfg = write_config(tmp_path / "inc.cfg", out_dir)
    assert main(["compare", "--config", str(cfg)]) == EXIT_INCOMPLETE


def test_compare_subset_of_kernels(tmp_path):
    out_dir = run_pipeline(tmp_path, out_name="subset")
    cfg = write_config(tmp_path / "subset2.cfg", out_dir,
                       kernels="linear, rbf")
    assert main(["compare", "--config", str(cfg)]) == 0
    lines = (out_dir / "report.csv").read_text().strip().split("\n")
    assert len(lines) == 5  # header + 2 kernels x 2 strategies
