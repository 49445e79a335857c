import numpy as np
import pytest
from sklearn.ensemble import RandomForestClassifier
from sklearn.tree import DecisionTreeClassifier

from cfslogic import digits, model_from_json, reference_eval_forest
from cfslogic_exporter import export_forest


@pytest.fixture(scope="module")
def ds():
    return digits(300)


def test_stump_exports_one_split_two_leaves():
    X = np.array([[0], [10], [200], [210]])
    y = np.array([0, 0, 1, 1])
    stump = DecisionTreeClassifier(max_depth=1, random_state=0).fit(X, y)
    obj, report = export_forest(stump)
    assert obj["kind"] == "forest" and len(obj["trees"]) == 1
    root = obj["trees"][0]
    assert root["feature"] == 0
    assert "counts" in root["left"] and "counts" in root["right"]
    assert root["left"]["counts"][0] == 2 and root["right"]["counts"][1] == 2
    assert report.shape == "forest 1 trees, 3 nodes, depth 1"


def test_thresholds_are_floored_integers(ds):
    X, y = ds.features.astype(np.int64), ds.labels
    clf = RandomForestClassifier(n_estimators=5, bootstrap=False,
                                 random_state=0).fit(X, y)
    obj, _ = export_forest(clf)

    def walk(node):
        if "counts" in node:
            return
        assert isinstance(node["threshold"], int)
        assert 0 <= node["threshold"] <= 255
        walk(node["left"])
        walk(node["right"])

    for t in obj["trees"]:
        walk(t)


def test_leaf_counts_partition_training_set(ds):
    X, y = ds.features.astype(np.int64), ds.labels
    clf = RandomForestClassifier(n_estimators=10, bootstrap=False,
                                 random_state=1).fit(X, y)
    obj, _ = export_forest(clf)
    want = np.bincount(y, minlength=10)

    def total(node):
        if "counts" in node:
            return np.array(node["counts"])
        return total(node["left"]) + total(node["right"])

    for t in obj["trees"]:
        assert (total(t) == want).all()


def test_predictions_exact_on_training_points(ds):
    X, y = ds.features.astype(np.int64), ds.labels
    clf = RandomForestClassifier(n_estimators=10, bootstrap=False,
                                 random_state=2).fit(X, y)
    f = model_from_json(export_forest(clf)[0])
    pred = np.array([int(np.argmax(reference_eval_forest(f, x))) for x in X])
    assert (pred == clf.predict(X)).all()


def test_rejects_weighted_and_bootstrap(ds):
    X, y = ds.features.astype(np.int64), ds.labels
    w = np.linspace(0.5, 1.5, len(y))
    weighted = DecisionTreeClassifier(random_state=0).fit(X, y, sample_weight=w)
    with pytest.raises(ValueError, match="weighted"):
        export_forest(weighted)

    boot = RandomForestClassifier(n_estimators=2, bootstrap=True,
                                  random_state=0).fit(X, y)
    with pytest.raises(ValueError, match="bootstrap"):
        export_forest(boot)


def test_rejects_bad_labels_and_objects():
    X = np.array([[0], [200]])
    clf = DecisionTreeClassifier().fit(X, np.array([3, 12]))
    with pytest.raises(ValueError, match="0..9"):
        export_forest(clf)
    clf2 = DecisionTreeClassifier().fit(X, np.array(["a", "b"]))
    with pytest.raises(ValueError, match="integers"):
        export_forest(clf2)
    with pytest.raises(TypeError):
        export_forest(object())
