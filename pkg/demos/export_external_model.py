"""Bring an externally trained model into the toolkit.

Fits a scikit-learn random forest, exports it to the shared model JSON
with cfslogic-exporter, then compiles and evaluates the circuit with
cfslogic.  The two packages only meet at the JSON schema.

Run:  python3 demos/export_external_model.py    (needs scikit-learn)
"""

import json

import numpy as np
from sklearn.ensemble import RandomForestClassifier

from cfslogic import Stimulus, accuracy_of, compile_forest, digits, \
    model_from_json, simulate_and_count
from cfslogic_exporter import export_forest


def main():
    ds = digits(300)
    X, y = ds.features.astype(np.int64), ds.labels

    clf = RandomForestClassifier(n_estimators=10, bootstrap=False,
                                 random_state=0).fit(X, y)
    obj, report = export_forest(clf)
    print("export report:", json.dumps(report.to_json()))

    forest = model_from_json(obj)
    circuit = compile_forest(forest, num_features=ds.num_features)
    stim = Stimulus.from_features(ds.features)
    acc = accuracy_of(simulate_and_count(circuit, stim).outputs, ds.labels)
    sk_acc = (clf.predict(X) == y).mean()
    print(f"sklearn train accuracy:  {sk_acc:.3f}")
    print(f"compiled circuit accuracy: {acc:.3f}")


if __name__ == "__main__":
    main()
