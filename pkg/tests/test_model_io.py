import numpy as np
import pytest

from landsvm import (
    ClassSet,
    KernelSpec,
    LabelGrid,
    ParseError,
    TrainConfig,
    load_labels,
    load_model,
    save_labels,
    save_model,
    train_one_vs_all,
    train_one_vs_one,
)
from landsvm.binary import decision_values
from landsvm.multiclass import MIXED, UNCLASSIFIED

from conftest import blob_scene


@pytest.fixture(scope="module")
def scene():
    img, samples, ref = blob_scene(8.0, seed=21, train=20, ref=20, size=24)
    return img, samples.by_class()


@pytest.mark.parametrize("trainer", [train_one_vs_all, train_one_vs_one])
def test_model_round_trip(tmp_path, scene, trainer):
    img, blocks = scene
    spec = KernelSpec(kind="rbf")
    model = trainer(blocks, spec, TrainConfig(C=10.0))
    path = tmp_path / "model.txt"
    save_model(model, path, tolerance=1e-3, max_passes=10)
    back = load_model(path)
    assert back.strategy == model.strategy
    assert back.classes.names == model.classes.names
    assert back.pairs == model.pairs
    assert back.kernel.kind == "rbf"
    assert back.kernel.gamma == model.kernel.gamma
    assert np.array_equal(back.standardizer.mean, model.standardizer.mean)
    assert np.array_equal(back.standardizer.std, model.standardizer.std)
    probes = img.pixel_matrix()[:50]
    for m_old, m_new in zip(model.machines, back.machines):
        assert m_new.bias == m_old.bias  # repr round-trips floats exactly
        assert np.array_equal(m_new.dual_coefs, m_old.dual_coefs)
        assert np.array_equal(
            decision_values(m_new, model.transform(probes)),
            decision_values(m_old, model.transform(probes)),
        )


def test_model_save_is_byte_deterministic(tmp_path, scene):
    _, blocks = scene
    model = train_one_vs_one(blocks, KernelSpec(kind="linear"),
                             TrainConfig(C=1.0))
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    save_model(model, a)
    save_model(model, b)
    assert a.read_bytes() == b.read_bytes()


def test_model_parse_errors(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("WRONG 1\n")
    with pytest.raises(ParseError):
        load_model(path)
    path.write_text("SVMMODEL 1\nstrategy nope\n")
    with pytest.raises(ParseError):
        load_model(path)
    path.write_text(
        "SVMMODEL 1\nstrategy 1aa\nclasses a,b\nbands 1\nkernel rbf\n"
        "degree 2\ngamma oops\n"
    )
    with pytest.raises(ParseError):
        load_model(path)
    path.write_text(
        "SVMMODEL 1\nstrategy 1aa\nclasses a,b\nbands 1\nkernel linear\n"
        "degree 3\ngamma none\ncoef0 1.0\nC 1.0\nmachines 2\n"
        "machine 0 class 0\nbias 0.0\nnsv 1\nsv 0.5\n"
    )
    with pytest.raises(ParseError):  # sv row missing the feature value
        load_model(path)


def test_labels_round_trip(tmp_path):
    codes = np.array(
        [[0, 1, UNCLASSIFIED], [MIXED, 2, 0]], dtype=np.int32
    )
    grid = LabelGrid(
        codes, ClassSet(("a", "b", "c")), {(0, 1): (0, 2)}
    )
    path = tmp_path / "labels.txt"
    save_labels(grid, path, "1aa", "rbf")
    back, strategy, kind = load_labels(path)
    assert strategy == "1aa" and kind == "rbf"
    assert np.array_equal(back.codes, codes)
    assert back.mixed_members == {(0, 1): (0, 2)}
    assert back.classes.names == ("a", "b", "c")


def test_labels_parse_errors(tmp_path):
    path = tmp_path / "labels.txt"
    path.write_text("LABELGRID 1\nstrategy 1aa\nkernel rbf\nwidth 2\n"
                    "height 1\nclasses a,b\n0\n")
    with pytest.raises(ParseError):
        load_labels(path)  # row too short
    path.write_text("NOPE\n")
    with pytest.raises(ParseError):
        load_labels(path)
