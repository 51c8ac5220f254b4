import numpy as np
import pytest

from landsvm import (
    MIXED,
    UNCLASSIFIED,
    BinaryModel,
    ClassSet,
    ConvergenceError,
    InputError,
    KernelSpec,
    LabelGrid,
    MulticlassModel,
    PixelLabel,
    RasterImage,
    TrainConfig,
    classify_one_vs_all,
    classify_one_vs_one,
    classify_raster,
    predict_codes,
    train_one_vs_all,
    train_one_vs_one,
)

from conftest import blob_scene

LINEAR = KernelSpec(kind="linear")
CFG = TrainConfig(C=10.0)


def constant_machine(value):
    """A stub machine whose decision function is `value` everywhere."""
    return BinaryModel(
        kernel=LINEAR,
        support_vectors=np.zeros((1, 1)),
        dual_coefs=np.zeros(1),
        bias=float(value),
        C=1.0,
    )


def stub_1aa(decisions):
    n = len(decisions)
    return MulticlassModel(
        strategy="1aa",
        classes=ClassSet(tuple(f"c{i}" for i in range(n))),
        machines=tuple(constant_machine(v) for v in decisions),
    )


def stub_1a1(n_classes, pair_decisions):
    """pair_decisions maps (i, j) -> decision value of machine (i, j)."""
    pairs = [
        (i, j) for i in range(n_classes) for j in range(i + 1, n_classes)
    ]
    return MulticlassModel(
        strategy="1a1",
        classes=ClassSet(tuple(f"c{i}" for i in range(n_classes))),
        machines=tuple(
            constant_machine(pair_decisions[p]) for p in pairs
        ),
        pairs=tuple(pairs),
    )


def tiny_blocks(n_classes, bands=6):
    """Two well-separated points per class, one class per axis."""
    blocks = {}
    for k in range(n_classes):
        mean = np.zeros(bands)
        mean[k % bands] = 10.0 * (1 + k // bands)
        blocks[f"c{k}"] = np.vstack([mean - 0.1, mean + 0.1])
    return blocks


def test_class_set_validation():
    with pytest.raises(InputError):
        ClassSet(("only",))
    with pytest.raises(InputError):
        ClassSet(("a", "a"))
    with pytest.raises(InputError):
        ClassSet(("a", "b,c"))
    assert ClassSet(("a", "b")).index("b") == 1
    with pytest.raises(InputError):
        ClassSet(("a", "b")).index("zzz")


def test_pixel_label_validation():
    assert PixelLabel.of_class(2).is_class
    assert PixelLabel.unclassified().is_unclassified
    mixed = PixelLabel.mixed((1, 0))
    assert mixed.is_mixed and mixed.members == (0, 1)
    with pytest.raises(InputError):
        PixelLabel.mixed((1,))
    with pytest.raises(InputError):
        PixelLabel(code=0, members=(1, 2))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_machine_counts(n):
    blocks = tiny_blocks(n)
    one_all = train_one_vs_all(blocks, LINEAR, CFG)
    assert one_all.n_machines == n
    one_one = train_one_vs_one(blocks, LINEAR, CFG)
    assert one_one.n_machines == n * (n - 1) // 2
    assert one_one.pairs == tuple(
        (i, j) for i in range(n) for j in range(i + 1, n)
    )


def test_model_invariants_enforced():
    machines = tuple(constant_machine(0.0) for _ in range(3))
    with pytest.raises(InputError):
        MulticlassModel(
            strategy="1aa", classes=ClassSet(("a", "b")), machines=machines
        )
    with pytest.raises(InputError):
        MulticlassModel(
            strategy="1a1",
            classes=ClassSet(("a", "b", "c")),
            machines=machines,
            pairs=((0, 1), (0, 2), (2, 1)),  # wrong pair order
        )
    mixed_kernels = (
        constant_machine(0.0),
        BinaryModel(
            kernel=KernelSpec(kind="rbf", gamma=1.0),
            support_vectors=np.zeros((1, 1)),
            dual_coefs=np.zeros(1),
            bias=0.0,
            C=1.0,
        ),
    )
    with pytest.raises(InputError):
        MulticlassModel(
            strategy="1aa",
            classes=ClassSet(("a", "b")),
            machines=mixed_kernels,
        )


def test_one_vs_all_rule():
    assert classify_one_vs_all(
        stub_1aa([2.1, -1.0, -3.0]), [0.0]
    ) == PixelLabel.of_class(0)
    assert classify_one_vs_all(
        stub_1aa([-1.0, -2.0, -0.5]), [0.0]
    ) == PixelLabel.unclassified()
    assert classify_one_vs_all(
        stub_1aa([1.0, 0.5, -1.0]), [0.0]
    ) == PixelLabel.mixed((0, 1))
    # an exact zero does not claim the pixel
    assert classify_one_vs_all(
        stub_1aa([0.0, -1.0, -1.0]), [0.0]
    ) == PixelLabel.unclassified()


def test_one_vs_all_winner_take_all_mode():
    model = stub_1aa([-1.0, -2.0, -0.5])
    assert classify_one_vs_all(model, [0.0], strict=False) \
        == PixelLabel.of_class(2)
    model = stub_1aa([1.0, 0.5, -1.0])
    assert classify_one_vs_all(model, [0.0], strict=False) \
        == PixelLabel.of_class(0)


def test_one_vs_one_rule():
    # winners 0>1, 0>2, 1>2: votes (2, 1, 0)
    model = stub_1a1(3, {(0, 1): 1.0, (0, 2): 1.0, (1, 2): 1.0})
    assert classify_one_vs_one(model, [0.0]) == PixelLabel.of_class(0)
    # cycle 0>1, 1>2, 2>0: one vote each, tie
    model = stub_1a1(3, {(0, 1): 1.0, (0, 2): -1.0, (1, 2): 1.0})
    assert classify_one_vs_one(model, [0.0]) == PixelLabel.unclassified()
    # two classes, positive decision: first of the pair wins
    model = stub_1a1(2, {(0, 1): 0.3})
    assert classify_one_vs_one(model, [0.0]) == PixelLabel.of_class(0)
    # an exact zero votes the second class
    model = stub_1a1(2, {(0, 1): 0.0})
    assert classify_one_vs_one(model, [0.0]) == PixelLabel.of_class(1)


def test_strategy_mismatch_errors():
    with pytest.raises(InputError):
        classify_one_vs_one(stub_1aa([1.0, -1.0]), [0.0])
    with pytest.raises(InputError):
        classify_one_vs_all(stub_1a1(2, {(0, 1): 1.0}), [0.0])


def test_one_vs_one_never_mixed(rng):
    # voting cannot produce a mixed outcome whatever the decisions are
    for _ in range(50):
        n = int(rng.integers(2, 6))
        decisions = {
            (i, j): float(rng.standard_normal())
            for i in range(n)
            for j in range(i + 1, n)
        }
        label = classify_one_vs_one(stub_1a1(n, decisions), [0.0])
        assert not label.is_mixed


def test_permutation_equivariance_stub(rng):
    # permuting class order permutes class outputs and preserves the
    # unclassified/mixed statuses
    decisions = [1.2, -0.4, 0.8]
    base = classify_one_vs_all(stub_1aa(decisions), [0.0])
    perm = [2, 0, 1]  # position p holds old class perm[p]
    permuted = classify_one_vs_all(
        stub_1aa([decisions[k] for k in perm]), [0.0]
    )
    assert base.is_mixed and permuted.is_mixed
    assert permuted.members == tuple(sorted(perm.index(m) for m in base.members))


def test_training_rejects_degenerate_class_maps():
    with pytest.raises(InputError):
        train_one_vs_all({"a": np.zeros((2, 2))}, LINEAR, CFG)
    with pytest.raises(InputError):
        train_one_vs_all(
            {"a": np.zeros((0, 2)), "b": np.zeros((2, 2))}, LINEAR, CFG
        )
    with pytest.raises(InputError):
        train_one_vs_one(
            {"a": np.zeros((2, 2)), "b": np.zeros((2, 3))}, LINEAR, CFG
        )


def test_training_failure_names_the_machine(monkeypatch):
    import landsvm.binary as binary

    monkeypatch.setattr(binary, "_polish_pairs",
                        lambda *args, **kwargs: False)
    blocks = tiny_blocks(3)
    bad_cfg = TrainConfig(C=10.0, tolerance=1e-12, max_passes=1, max_sweeps=1)
    with pytest.raises(ConvergenceError) as err:
        train_one_vs_one(blocks, LINEAR, bad_cfg)
    assert "'c0' vs 'c1'" in str(err.value)


def test_blob_agreement_and_permutation(rng):
    img, samples, ref = blob_scene(10.0, seed=3, train=30, ref=30, size=32)
    blocks = samples.by_class()
    m_all = train_one_vs_all(blocks, LINEAR, CFG)
    m_one = train_one_vs_one(blocks, LINEAR, CFG)
    # both strategies agree on the blob centroids
    centroids = np.vstack([b.mean(axis=0) for b in blocks.values()])
    codes_all, _ = predict_codes(m_all, centroids)
    codes_one, _ = predict_codes(m_one, centroids)
    assert np.array_equal(codes_all, np.arange(3))
    assert np.array_equal(codes_one, np.arange(3))
    # training with permuted class order permutes the labels
    names = list(blocks)
    permuted_blocks = {n: blocks[n] for n in [names[2], names[0], names[1]]}
    m_perm = train_one_vs_one(permuted_blocks, LINEAR, CFG)
    codes_perm, _ = predict_codes(m_perm, centroids)
    remap = {0: 1, 1: 2, 2: 0}  # old index -> new index
    assert np.array_equal(
        np.array([remap[int(c)] for c in codes_one]), codes_perm
    )


def test_classify_raster_on_training_scene():
    img, samples, ref = blob_scene(10.0, seed=5, train=30, ref=30, size=32)
    blocks = samples.by_class()
    model = train_one_vs_one(blocks, KernelSpec(kind="rbf"), CFG)
    grid, tally = classify_raster(model, img)
    assert tally.mixed == 0  # structurally impossible for 1a1
    assert grid.codes.shape == (32, 32)
    assert tally.total == 32 * 32
    # training pixels classify to their own class
    for (x, y), name in zip(samples.positions, samples.names):
        assert grid.codes[y, x] == samples.classes.index(name)


def test_raster_of_one_training_pixel_classifies_uniformly():
    img, samples, _ = blob_scene(10.0, seed=7, train=20, ref=20, size=24)
    blocks = samples.by_class()
    model = train_one_vs_all(blocks, LINEAR, CFG)
    name = samples.classes.names[1]
    pixel = blocks[name][0]
    uniform = RasterImage(
        width=8, height=8, bands=6,
        values=np.tile(pixel[:, None, None], (1, 8, 8)),
    )
    grid, tally = classify_raster(model, uniform)
    assert np.all(grid.codes == 1)
    assert tally.unclassified == 0 and tally.mixed == 0
    assert tally.class_counts == (0, 64, 0)


def test_classify_raster_determinism():
    img, samples, _ = blob_scene(2.0, seed=9, train=30, ref=30, size=24)
    model = train_one_vs_all(samples.by_class(), LINEAR, TrainConfig(C=1.0))
    g1, t1 = classify_raster(model, img)
    g2, t2 = classify_raster(model, img)
    assert np.array_equal(g1.codes, g2.codes)
    assert t1 == t2


def test_classify_raster_empty_and_mismatch():
    img, samples, _ = blob_scene(10.0, seed=1, train=20, ref=20, size=24)
    model = train_one_vs_one(samples.by_class(), LINEAR, CFG)
    empty = RasterImage(width=0, height=0, bands=6,
                        values=np.zeros((6, 0, 0)))
    grid, tally = classify_raster(model, empty)
    assert grid.codes.shape == (0, 0)
    assert tally.total == 0
    bad = RasterImage(width=2, height=2, bands=2, values=np.zeros((2, 2, 2)))
    with pytest.raises(InputError):
        classify_raster(model, bad)


def test_strict_flag_changes_1aa_only():
    img, samples, _ = blob_scene(2.0, seed=11, train=40, ref=40, size=24)
    model = train_one_vs_all(samples.by_class(), LINEAR, TrainConfig(C=1.0))
    _, strict_tally = classify_raster(model, img, strict=True)
    grid, wta_tally = classify_raster(model, img, strict=False)
    assert strict_tally.unclassified + strict_tally.mixed > 0
    assert wta_tally.unclassified == 0 and wta_tally.mixed == 0
    assert not grid.mixed_members


def test_label_grid_access():
    codes = np.array([[0, UNCLASSIFIED], [MIXED, 1]], dtype=np.int32)
    grid = LabelGrid(codes, ClassSet(("a", "b")), {(0, 1): (0, 1)})
    assert grid.label_at(0, 0) == PixelLabel.of_class(0)
    assert grid.label_at(1, 0) == PixelLabel.unclassified()
    assert grid.label_at(0, 1) == PixelLabel.mixed((0, 1))
    with pytest.raises(InputError):
        grid.label_at(2, 0)
    tally = grid.counts()
    assert tally.class_counts == (1, 1)
    assert tally.unclassified == 1
    assert tally.mixed == 1
