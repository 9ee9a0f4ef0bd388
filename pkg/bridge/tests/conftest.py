import csv
import json

import pytest
from sklearn.datasets import load_iris

from tabmi_bridge import BridgeConfig, build_corpus, save_bridge, train_bridge

FEATURES = ["sepal_length", "sepal_width", "petal_length", "petal_width",
            "species"]


def iris_rows():
    data = load_iris()
    rows = []
    for x, y in zip(data.data, data.target):
        rec = {n: repr(float(v)) for n, v in zip(FEATURES, x)}
        rec["species"] = str(data.target_names[y])
        rows.append(rec)
    return rows


@pytest.fixture(scope="session")
def iris_files(tmp_path_factory):
    d = tmp_path_factory.mktemp("iris")
    rows = iris_rows()
    with open(d / "iris.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=FEATURES)
        w.writeheader()
        w.writerows(rows)
    schema = {
        "features": [{"name": n, "kind": "numerical"} for n in FEATURES[:4]]
        + [{"name": "species", "kind": "categorical"}],
        "target": "species",
        "task": "classification",
    }
    (d / "schema.json").write_text(json.dumps(schema))
    return d


@pytest.fixture(scope="session")
def trained(tmp_path_factory):
    """A small model trained on a 40-row two-feature table."""
    rows = (
        [{"age": "39", "job": "clerk"}] * 18
        + [{"age": "50", "job": "smith"}] * 18
        + [{"age": "39", "job": "smith"}] * 2
        + [{"age": "50", "job": "clerk"}] * 2
    )
    corpus = build_corpus(rows, ["age", "job"], seed=0)
    config = BridgeConfig(epochs=40, seed=0)
    model = train_bridge(corpus, config)
    out = tmp_path_factory.mktemp("model")
    save_bridge(model, corpus.vocab, config, str(out))
    return model, corpus, config, str(out)
