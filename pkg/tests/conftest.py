import math

import numpy as np
import pytest
from hypothesis import strategies as st

from tabmi.dataset import CATEGORICAL, NUMERICAL, FeatureSchema, Table, make_table

# ---------------------------------------------------------------------------
# independent oracles (kept deliberately naive; never reuse package code)


def contingency_mi(xs, ys) -> float:
    """Plug-in MI from raw co-occurrence counts, in nats."""
    n = len(xs)
    assert n == len(ys)
    joint: dict = {}
    mx: dict = {}
    my: dict = {}
    for x, y in zip(xs, ys):
        joint[(x, y)] = joint.get((x, y), 0) + 1
        mx[x] = mx.get(x, 0) + 1
        my[y] = my.get(y, 0) + 1
    mi = 0.0
    for (x, y), c in joint.items():
        p = c / n
        mi += p * math.log(p / ((mx[x] / n) * (my[y] / n)))
    return mi


def type7_quantile(values, p: float) -> float:
    v = sorted(values)
    h = (len(v) - 1) * p
    lo = math.floor(h)
    if lo + 1 >= len(v):
        return float(v[lo])
    return float(v[lo] + (h - lo) * (v[lo + 1] - v[lo]))


def fd_count_oracle(values) -> int:
    lo, hi = min(values), max(values)
    iqr = type7_quantile(values, 0.75) - type7_quantile(values, 0.25)
    if hi == lo or iqr == 0:
        return 1
    k = math.ceil((hi - lo) / (2 * iqr * len(values) ** (-1 / 3)))
    return max(1, min(16, k))


def softmax_entropy(logits) -> float:
    z = np.asarray(logits, float)
    z = z - z.max()
    p = np.exp(z)
    p /= p.sum()
    return float(-(p[p > 0] * np.log(p[p > 0])).sum())


def tv_distance(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


# ---------------------------------------------------------------------------
# table builders


def iris_table() -> Table:
    from sklearn.datasets import load_iris

    data = load_iris()
    names = ["sepal_length", "sepal_width", "petal_length", "petal_width"]
    schema = FeatureSchema(
        tuple((n, NUMERICAL) for n in names) + (("species", CATEGORICAL),),
        target="species",
        task="classification",
    )
    rows = [
        {**dict(zip(names, map(float, x))), "species": data.target_names[y]}
        for x, y in zip(data.data, data.target)
    ]
    return make_table(schema, rows)


@pytest.fixture(scope="session")
def iris():
    return iris_table()


def random_table_strategy(max_features: int = 4, max_rows: int = 30,
                          min_rows: int = 2):
    """Hypothesis strategy for small mixed-kind tables."""
    kinds = st.sampled_from([NUMERICAL, CATEGORICAL])

    @st.composite
    def build(draw):
        f = draw(st.integers(1, max_features))
        feats = tuple((f"f{i}", draw(kinds)) for i in range(f))
        schema = FeatureSchema(feats)
        n = draw(st.integers(min_rows, max_rows))
        rows = []
        for _ in range(n):
            rec = {}
            for name, kind in feats:
                if kind == NUMERICAL:
                    rec[name] = draw(
                        st.floats(-100, 100, allow_nan=False, allow_infinity=False)
                    )
                else:
                    rec[name] = draw(st.sampled_from(["a", "b", "c", "d"]))
            rows.append(rec)
        return make_table(schema, rows)

    return build()
