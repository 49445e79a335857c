import json

import numpy as np
import pytest
import torch
from torch import nn

from cfslogic import digits, model_from_json
from cfslogic_exporter import export_mlp


def _net(*sizes, seed=0):
    torch.manual_seed(seed)
    layers = []
    for i in range(len(sizes) - 1):
        layers.append(nn.Linear(sizes[i], sizes[i + 1]))
        if i < len(sizes) - 2:
            layers.append(nn.ReLU())
    return nn.Sequential(*layers)


def test_torch_export_shape_and_schema():
    obj, report = export_mlp(_net(64, 32, 10))
    assert obj["kind"] == "mlp"
    assert obj["layer_sizes"] == [64, 32, 10]
    assert len(obj["weights"]) == 2 and len(obj["biases"]) == 2
    assert report.framework == "torch"
    assert report.shape == "mlp 64-32-10"
    json.dumps(obj)  # serializable as-is


def test_torch_export_paper_architecture():
    obj, _ = export_mlp(_net(784, 256, 256, 256, 10))
    assert obj["layer_sizes"] == [784, 256, 256, 256, 10]


def test_torch_roundtrip_matches_predictions():
    net = _net(64, 24, 10, seed=3)
    obj, _ = export_mlp(net)
    m = model_from_json(obj)
    X = digits(100).features
    with torch.no_grad():
        want = net(torch.tensor(X / 255.0, dtype=torch.float32)).numpy()
    assert np.abs(m.infer_float(X) - want).max() < 1e-5


def test_torch_saved_model_path(tmp_path):
    net = _net(8, 4, 10, seed=1)
    path = tmp_path / "net.pt"
    torch.save(net, path)
    obj, _ = export_mlp(path)
    want, _ = export_mlp(net)
    assert obj == want


def test_torch_rejects_unsupported_layers():
    with pytest.raises(ValueError, match="unsupported layer"):
        export_mlp(nn.Sequential(nn.Conv2d(1, 4, 3), nn.ReLU(), nn.Linear(4, 10)))
    with pytest.raises(ValueError, match="trailing ReLU"):
        export_mlp(nn.Sequential(nn.Linear(8, 10), nn.ReLU()))
    with pytest.raises(ValueError, match="consecutive Linear"):
        export_mlp(nn.Sequential(nn.Linear(8, 8), nn.Linear(8, 10)))


def test_report_counts_clamp_violations():
    net = _net(4, 3, 10)
    with torch.no_grad():
        net[0].weight[0, 0] = 2.5
        net[0].weight[0, 1] = -3.0
        net[0].weight[0, 2] = 2.0  # boundary: 2.0 is outside [-2, 2)
        net[0].weight[0, 3] = -2.0  # boundary: -2.0 is inside
    _, report = export_mlp(net)
    assert report.weights_outside_clamp == 3
    assert report.max_abs_weight == 3.0


def _keras_net(*sizes, seed=0):
    import keras

    keras.utils.set_random_seed(seed)
    layers = [keras.layers.Input((sizes[0],))]
    for i, s in enumerate(sizes[1:]):
        act = "relu" if i < len(sizes) - 2 else None
        layers.append(keras.layers.Dense(s, activation=act))
    return keras.Sequential(layers)


def test_keras_roundtrip_matches_predictions():
    net = _keras_net(64, 16, 10, seed=2)
    obj, report = export_mlp(net)
    assert obj["layer_sizes"] == [64, 16, 10]
    assert report.framework == "keras"
    m = model_from_json(obj)
    X = digits(100).features
    want = net.predict(X / 255.0, verbose=0)
    assert np.abs(m.infer_float(X) - want).max() < 1e-5


def test_keras_saved_model_path(tmp_path):
    import keras

    net = _keras_net(8, 4, 10, seed=4)
    path = tmp_path / "net.keras"
    net.save(path)
    obj, _ = export_mlp(str(path))
    want, _ = export_mlp(net)
    assert obj == want


def test_keras_rejects_unsupported():
    import keras

    conv = keras.Sequential([
        keras.layers.Input((8, 8, 1)),
        keras.layers.Conv2D(2, 3),
        keras.layers.Flatten(),
        keras.layers.Dense(10),
    ])
    with pytest.raises(ValueError, match="unsupported layer"):
        export_mlp(conv)
    soft = keras.Sequential([
        keras.layers.Input((8,)),
        keras.layers.Dense(4, activation="relu"),
        keras.layers.Dense(10, activation="softmax"),
    ])
    with pytest.raises(ValueError, match="activation"):
        export_mlp(soft)


def test_rejects_junk_sources(tmp_path):
    with pytest.raises(TypeError):
        export_mlp({"weights": []})
    with pytest.raises(ValueError, match="extension"):
        export_mlp(tmp_path / "model.onnx")
