"""Exporter round-trip acceptance check.

Exported MLPs must reproduce the source framework's float predictions
within 1e-5 on 100 samples; exported forests must reproduce the source
predictions exactly on every integer-feature training point.
"""

import numpy as np
import torch
from sklearn.ensemble import RandomForestClassifier
from torch import nn

from cfslogic import digits, model_from_json, reference_eval_forest
from cfslogic_exporter import export_forest, export_mlp


def report(num, ok, detail):
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, f"criterion {num}: {detail}"


def test_criterion_10_exporter_roundtrip():
    ds = digits(300)
    X100 = ds.features[:100]

    torch.manual_seed(0)
    net = nn.Sequential(nn.Linear(64, 32), nn.ReLU(), nn.Linear(32, 10))
    m = model_from_json(export_mlp(net)[0])
    with torch.no_grad():
        want = net(torch.tensor(X100 / 255.0, dtype=torch.float32)).numpy()
    torch_err = float(np.abs(m.infer_float(X100) - want).max())

    import keras

    keras.utils.set_random_seed(0)
    knet = keras.Sequential([
        keras.layers.Input((64,)),
        keras.layers.Dense(32, activation="relu"),
        keras.layers.Dense(10),
    ])
    km = model_from_json(export_mlp(knet)[0])
    kwant = knet.predict(X100 / 255.0, verbose=0)
    keras_err = float(np.abs(km.infer_float(X100) - kwant).max())

    Xi, y = ds.features.astype(np.int64), ds.labels
    clf = RandomForestClassifier(n_estimators=10, bootstrap=False,
                                 random_state=0).fit(Xi, y)
    f = model_from_json(export_forest(clf)[0])
    pred = np.array([int(np.argmax(reference_eval_forest(f, x))) for x in Xi])
    mismatches = int((pred != clf.predict(Xi)).sum())

    report(
        10,
        torch_err < 1e-5 and keras_err < 1e-5 and mismatches == 0,
        f"mlp err torch={torch_err:.2e} keras={keras_err:.2e} (tol 1e-5), "
        f"forest mismatches={mismatches}/{len(Xi)}",
    )
