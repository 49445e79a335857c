import numpy as np
import pytest

from cfslogic import (
    ForestModel,
    LutModel,
    MlpModel,
    Stimulus,
    TreeLeaf,
    TreeSplit,
    compile_forest,
    compile_lut,
    compile_mlp,
    compile_model,
    decode_bus,
    quantize_mlp,
    reference_eval_forest,
    reference_eval_quantized_mlp,
    simulate_and_count,
)


def _class_values(circuit, features, signed=True):
    stim = Stimulus.from_features(features)
    res = simulate_and_count(circuit, stim)
    assert [name for name, _ in res.outputs] == [f"class{k}" for k in range(10)]
    return np.stack(
        [decode_bus(cols, stim.num_examples, signed=signed) for _, cols in res.outputs]
    ).T  # (examples, classes)


def _random_qmlp(rng, sizes=(3, 5, 10), scale=0.6):
    ws = [rng.normal(0, scale, size=(sizes[i + 1], sizes[i]))
          for i in range(len(sizes) - 1)]
    bs = [rng.normal(0, scale, size=sizes[i + 1]) for i in range(len(sizes) - 1)]
    return quantize_mlp(MlpModel(list(sizes), ws, bs))


def test_input_convention_feature_major_lsb_first():
    # a circuit that just forwards its input bits exposes the packing
    from cfslogic import Circuit

    c = Circuit()
    ins = [c.add_input() for _ in range(16)]
    c.add_output_bus("class0", ins[:8])   # feature 0 bits, LSB first
    c.add_output_bus("class1", ins[8:])   # feature 1
    c.freeze()
    feats = np.array([[0xA5, 0x3C], [1, 128]], dtype=np.uint8)
    stim = Stimulus.from_features(feats)
    res = simulate_and_count(c, stim)
    vals = {n: decode_bus(cols, 2, signed=False) for n, cols in res.outputs}
    assert vals["class0"].tolist() == [0xA5, 1]
    assert vals["class1"].tolist() == [0x3C, 128]


def test_mlp_exhaustive_single_feature(rng):
    q = _random_qmlp(rng, sizes=(1, 4, 10))
    c = compile_mlp(q)
    feats = np.arange(256, dtype=np.uint8)[:, None]
    got = _class_values(c, feats)
    want = np.array([reference_eval_quantized_mlp(q, f) for f in feats])
    assert (got == want).all()


@pytest.mark.parametrize("mult", ["csd", "array"])
def test_mlp_multi_feature_vs_reference(rng, mult):
    q = _random_qmlp(rng, sizes=(5, 6, 10), scale=0.8)
    c = compile_mlp(q, mult=mult)
    feats = rng.integers(0, 256, size=(300, 5), dtype=np.uint8)
    got = _class_values(c, feats)
    want = np.array([reference_eval_quantized_mlp(q, f) for f in feats])
    assert (got == want).all()


def test_mlp_and_only_no_xors_same_function(rng):
    q = _random_qmlp(rng, sizes=(2, 3, 10))
    c1 = compile_mlp(q)
    c2 = compile_mlp(q, gates="and_only")
    assert c1.stats()["xor_count"] > 0
    assert c2.stats()["xor_count"] == 0
    feats = rng.integers(0, 256, size=(200, 2), dtype=np.uint8)
    assert (_class_values(c1, feats) == _class_values(c2, feats)).all()


def test_mlp_argument_validation(rng):
    q = _random_qmlp(rng)
    with pytest.raises(ValueError):
        compile_mlp(q, mult="booth")
    with pytest.raises(ValueError):
        compile_mlp(q, gates="nand")
    bad = quantize_mlp(MlpModel(
        [2, 3], [np.zeros((3, 2))], [np.zeros(3)]
    ))
    with pytest.raises(ValueError):
        compile_mlp(bad)  # not a 10-class classifier


def test_forest_single_feature_exhaustive():
    t1 = TreeSplit(0, 100, TreeLeaf([9, 1] + [0] * 8),
                   TreeSplit(0, 200, TreeLeaf([0] * 10), TreeLeaf([0, 0, 5] + [0] * 7)))
    t2 = TreeLeaf([0, 3] + [0] * 8)
    f = ForestModel([t1, t2])
    c = compile_forest(f)
    feats = np.arange(256, dtype=np.uint8)[:, None]
    got = _class_values(c, feats, signed=False)
    want = np.array([reference_eval_forest(f, x) for x in feats])
    assert (got == want).all()


def test_forest_random_vs_reference(rng):
    def grow(depth):
        if depth == 0 or rng.random() < 0.3:
            counts = [0] * 10
            counts[int(rng.integers(10))] = int(rng.integers(1, 50000))
            return TreeLeaf(counts)
        return TreeSplit(int(rng.integers(4)), int(rng.integers(256)),
                         grow(depth - 1), grow(depth - 1))

    f = ForestModel([grow(4) for _ in range(5)])
    c = compile_forest(f, num_features=4)
    feats = rng.integers(0, 256, size=(500, 4), dtype=np.uint8)
    got = _class_values(c, feats, signed=False)
    want = np.array([reference_eval_forest(f, x) for x in feats])
    assert (got == want).all()


def test_forest_infers_feature_count():
    f = ForestModel([TreeSplit(3, 7, TreeLeaf([1] + [0] * 9),
                               TreeLeaf([0] * 9 + [1]))])
    c = compile_forest(f)
    assert c.num_inputs == 4 * 8


def test_lut_matches_and_defaults(rng):
    feats = rng.integers(0, 256, size=(30, 3), dtype=np.uint8)
    labels = rng.integers(0, 10, size=30)
    lut = LutModel([(feats[i], int(labels[i])) for i in range(30)], default_class=4)
    c = compile_lut(lut)
    probe = np.concatenate([feats, rng.integers(0, 256, size=(50, 3), dtype=np.uint8)])
    got = _class_values(c, probe, signed=False).argmax(axis=1)
    want = np.array([lut.eval(x) for x in probe])
    assert (got == want).all()
    # outputs are strict one-hot bits
    onehot = _class_values(c, probe, signed=False)
    assert (onehot.sum(axis=1) == 1).all()


def test_lut_priority_first_entry_wins():
    lut = LutModel([([7], 2), ([7], 9)])
    c = compile_lut(lut)
    got = _class_values(c, np.array([[7]], dtype=np.uint8), signed=False)
    assert got[0].argmax() == 2


def test_lut_empty_needs_feature_count():
    with pytest.raises(ValueError):
        compile_lut(LutModel([]))
    c = compile_lut(LutModel([], default_class=3), num_features=2)
    got = _class_values(c, np.array([[1, 2]], dtype=np.uint8), signed=False)
    assert got[0].argmax() == 3


def test_compile_model_dispatch(rng):
    feats = rng.integers(0, 256, size=(50, 2), dtype=np.uint8)
    # float MLPs are quantized on the way in
    ws = [rng.normal(0, 0.5, size=(3, 2)), rng.normal(0, 0.5, size=(10, 3))]
    bs = [rng.normal(0, 0.5, size=3), rng.normal(0, 0.5, size=10)]
    m = MlpModel([2, 3, 10], ws, bs)
    c = compile_model(m)
    q = quantize_mlp(m)
    want = np.array([reference_eval_quantized_mlp(q, f) for f in feats])
    assert (_class_values(c, feats) == want).all()

    f = ForestModel([TreeSplit(0, 9, TreeLeaf([1] + [0] * 9), TreeLeaf([0, 1] + [0] * 8))])
    cf = compile_model(f, gates="and_only", num_features=2)
    assert cf.stats()["xor_count"] == 0
    wantf = np.array([reference_eval_forest(f, x) for x in feats])
    assert (_class_values(cf, feats, signed=False) == wantf).all()

    with pytest.raises(TypeError):
        compile_model("nope")
