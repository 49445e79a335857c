"""Dense ReLU network export for torch and keras models."""

from __future__ import annotations

import os

import numpy as np

from .report import ExportReport

# weight range the downstream quantizer clamps to
CLAMP_LO, CLAMP_HI = -2.0, 2.0


def export_mlp(source) -> tuple[dict, ExportReport]:
    """Convert a dense ReLU network to the shared model JSON.

    ``source`` is either a saved-model path (``.pt``/``.pth`` for torch,
    ``.keras``/``.h5`` for keras) or an in-memory model object.  Only
    stacks of fully connected layers with ReLU between them are accepted;
    anything else (convolutions, pooling, output activations, ...) is
    rejected rather than silently approximated.
    """
    model = _load(source)
    if _is_torch_module(model):
        layers, framework, version = _torch_layers(model)
    elif _is_keras_model(model):
        layers, framework, version = _keras_layers(model)
    else:
        raise TypeError(f"unsupported model object: {type(model).__name__}")

    sizes = [layers[0][0].shape[1]] + [w.shape[0] for w, _ in layers]
    for i, (w, b) in enumerate(layers):
        if w.shape != (sizes[i + 1], sizes[i]) or b.shape != (sizes[i + 1],):
            raise ValueError(f"layer {i} shape mismatch: {w.shape} after {sizes[i]}")

    max_abs = max(float(np.abs(w).max()) for w, _ in layers)
    outside = int(sum(((w < CLAMP_LO) | (w >= CLAMP_HI)).sum() for w, _ in layers))
    obj = {
        "kind": "mlp",
        "layer_sizes": sizes,
        "weights": [w.tolist() for w, _ in layers],
        "biases": [b.tolist() for _, b in layers],
    }
    report = ExportReport(
        framework=framework,
        framework_version=version,
        shape="mlp " + "-".join(str(s) for s in sizes),
        max_abs_weight=max_abs,
        weights_outside_clamp=outside,
    )
    return obj, report


def _load(source):
    if not isinstance(source, (str, os.PathLike)):
        return source
    path = os.fspath(source)
    ext = os.path.splitext(path)[1].lower()
    if ext in (".pt", ".pth"):
        import torch

        # full-module pickles, not bare state dicts
        return torch.load(path, weights_only=False)
    if ext in (".keras", ".h5"):
        import keras

        return keras.models.load_model(path)
    raise ValueError(f"unrecognized saved-model extension {ext!r}")


def _is_torch_module(model) -> bool:
    try:
        import torch
    except ImportError:
        return False
    return isinstance(model, torch.nn.Module)


def _is_keras_model(model) -> bool:
    try:
        import keras
    except ImportError:
        return False
    return isinstance(model, keras.Model)


def _torch_layers(model):
    import torch
    from torch import nn

    layers = []
    expect_linear = True
    for mod in model.children() if isinstance(model, nn.Sequential) else [model]:
        if isinstance(mod, nn.Linear):
            if not expect_linear:
                raise ValueError("two consecutive Linear layers without ReLU")
            if mod.bias is None:
                raise ValueError("Linear layer without bias")
            with torch.no_grad():
                w = mod.weight.double().cpu().numpy().copy()
                b = mod.bias.double().cpu().numpy().copy()
            layers.append((w, b))
            expect_linear = False
        elif isinstance(mod, nn.ReLU):
            if expect_linear:
                raise ValueError("ReLU without a preceding Linear layer")
            expect_linear = True
        elif isinstance(mod, (nn.Flatten, nn.Identity)):
            continue
        else:
            raise ValueError(f"unsupported layer type {type(mod).__name__}")
    if not layers:
        raise ValueError("no Linear layers found")
    if expect_linear:
        raise ValueError("trailing ReLU: output layer must be linear")
    return layers, "torch", torch.__version__


def _keras_layers(model):
    import keras

    layers = []
    for layer in model.layers:
        name = type(layer).__name__
        if name == "InputLayer" or name == "Flatten":
            continue
        if name == "Dense":
            act = getattr(layer.activation, "__name__", str(layer.activation))
            if act not in ("relu", "linear"):
                raise ValueError(f"unsupported Dense activation {act!r}")
            kernel, bias = layer.get_weights()
            # keras stores kernels (in, out); the schema wants (out, in)
            layers.append((kernel.astype(np.float64).T, bias.astype(np.float64), act))
        else:
            raise ValueError(f"unsupported layer type {name}")
    if not layers:
        raise ValueError("no Dense layers found")
    for w, b, act in layers[:-1]:
        if act != "relu":
            raise ValueError("hidden Dense layers must use relu activation")
    if layers[-1][2] != "linear":
        raise ValueError("output Dense layer must be linear")
    return [(w, b) for w, b, _ in layers], "keras", keras.__version__
