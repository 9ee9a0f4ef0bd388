"""Metric suite: downstream utility, discriminator realism, DCR privacy,
and rule-based constraint violation rates.

Deviations stated in every report: the realism discriminator is a linear
(logistic) classifier rather than a kernel SVM, and DCR encodes
categorical features as a 0/1 mismatch per feature.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dataset import CATEGORICAL, NUMERICAL, FeatureSchema, Table
from .errors import DegenerateTargetError, MalformedPolygonError

log = logging.getLogger("tabmi.evaluation")

REPORT_NOTES = [
    "realism discriminator: linear classifier (logistic loss, L2), not a kernel SVM",
    "DCR categorical encoding: 0/1 mismatch per feature",
]


@dataclass
class Constraint:
    name: str
    kind: str                      # polygon_containment | ordinal_consistency
    params: dict

    @classmethod
    def from_dict(cls, raw: dict) -> "Constraint":
        return cls(raw["name"], raw["kind"], raw.get("params", {}))


@dataclass
class MetricReport:
    utility: dict
    realism: dict
    privacy: dict
    fidelity: dict
    notes: list[str] = field(default_factory=lambda: list(REPORT_NOTES))

    def to_dict(self) -> dict:
        return {
            "utility": self.utility,
            "realism": self.realism,
            "privacy": self.privacy,
            "fidelity": self.fidelity,
            "notes": self.notes,
        }


# ---------------------------------------------------------------------------
# feature encoding


def _encode_for_model(
    table: Table, schema: FeatureSchema, categories: dict[str, list[str]]
) -> np.ndarray:
    """Numeric columns raw + one-hot categoricals (unknown categories -> all
    zeros). Category lists must come from the training side."""
    cols = []
    for name, kind in schema.features:
        if schema.target == name:
            continue
        vals = table.column(name)
        if kind == NUMERICAL:
            cols.append(np.asarray(vals, float)[:, None])
        else:
            cats = categories[name]
            idx = {c: i for i, c in enumerate(cats)}
            onehot = np.zeros((len(vals), len(cats)))
            for r, v in enumerate(vals):
                if v in idx:
                    onehot[r, idx[v]] = 1.0
            cols.append(onehot)
    return np.hstack(cols) if cols else np.zeros((len(table), 0))


def _train_categories(table: Table, schema: FeatureSchema) -> dict[str, list[str]]:
    out = {}
    for name, kind in schema.features:
        if kind == CATEGORICAL and name != schema.target:
            seen: list[str] = []
            for v in table.column(name):
                if v not in seen:
                    seen.append(v)
            out[name] = seen
    return out


def _dcr_encode(table: Table, schema: FeatureSchema, stats: dict) -> list:
    """Per-feature encoding for DCR/discriminator distance semantics:
    numeric min-max scaled by training stats, categorical left symbolic."""
    enc = []
    for name, kind in schema.features:
        vals = table.column(name)
        if kind == NUMERICAL:
            lo, hi = stats[name]
            rng = hi - lo
            arr = np.asarray(vals, float)
            enc.append((arr - lo) / rng if rng > 0 else np.zeros(len(arr)))
        else:
            enc.append(np.asarray(vals, object))
    return enc


def _numeric_stats(table: Table, schema: FeatureSchema) -> dict:
    return {
        name: (min(table.column(name)), max(table.column(name)))
        for name, kind in schema.features
        if kind == NUMERICAL
    }


# ---------------------------------------------------------------------------
# downstream utility


def eval_utility(synthetic: Table, real_test: Table, schema: FeatureSchema) -> dict:
    """Train a CART tree and a bagged forest on synthetic, test on real.

    Classification reports accuracy and macro-F1; regression reports MAPE.
    """
    if schema.target is None or schema.task == "none":
        raise ValueError("schema must declare a target and a task")
    from sklearn.ensemble import RandomForestClassifier, RandomForestRegressor
    from sklearn.metrics import (
        accuracy_score,
        f1_score,
        mean_absolute_percentage_error,
    )
    from sklearn.tree import DecisionTreeClassifier, DecisionTreeRegressor

    cats = _train_categories(synthetic, schema)
    x_train = _encode_for_model(synthetic, schema, cats)
    x_test = _encode_for_model(real_test, schema, cats)
    y_train = synthetic.column(schema.target)
    y_test = real_test.column(schema.target)

    if schema.task == "classification":
        if len(set(y_train)) < 2:
            raise DegenerateTargetError(schema.target)
        models = {
            "decision_tree": DecisionTreeClassifier(
                criterion="gini", max_depth=8, random_state=0
            ),
            "random_forest": RandomForestClassifier(
                n_estimators=25, max_features="sqrt", bootstrap=True, random_state=0
            ),
        }
        out = {}
        for name, model in models.items():
            model.fit(x_train, y_train)
            pred = model.predict(x_test)
            out[name] = {
                "accuracy": float(accuracy_score(y_test, pred)),
                "macro_f1": float(f1_score(y_test, pred, average="macro")),
            }
        return out

    y_train = np.asarray(y_train, float)
    y_test = np.asarray(y_test, float)
    models = {
        "decision_tree": DecisionTreeRegressor(max_depth=8, random_state=0),
        "random_forest": RandomForestRegressor(
            n_estimators=25, max_features="sqrt", bootstrap=True, random_state=0
        ),
    }
    out = {}
    for name, model in models.items():
        model.fit(x_train, y_train)
        pred = model.predict(x_test)
        out[name] = {
            "mape": float(mean_absolute_percentage_error(y_test, pred))
        }
    return out


# ---------------------------------------------------------------------------
# discriminator realism


def eval_discriminator(
    synthetic: Table, real_train: Table, seed: int = 0, folds: int = 5
) -> dict:
    """Mean k-fold accuracy of a linear classifier separating real from
    synthetic. Classes are balanced by subsampling the larger side and each
    fold keeps an exact 1:1 class ratio. Lower accuracy = more realistic.
    """
    from sklearn.linear_model import LogisticRegression
    from sklearn.preprocessing import StandardScaler

    schema = synthetic.schema
    # include the target column as an ordinary feature for the discriminator
    plain = FeatureSchema(schema.features, None, "none")
    cats = _train_categories(
        Table(plain, real_train.rows + synthetic.rows), plain
    )
    x_real = _encode_for_model(Table(plain, real_train.rows), plain, cats)
    x_syn = _encode_for_model(Table(plain, synthetic.rows), plain, cats)

    rng = np.random.default_rng(seed)
    m = min(len(x_real), len(x_syn))
    m -= m % folds                  # exact 1:1 ratio inside every fold
    if m < folds:
        raise ValueError("not enough rows for a balanced fold split")
    x_real = x_real[rng.permutation(len(x_real))[:m]]
    x_syn = x_syn[rng.permutation(len(x_syn))[:m]]

    chunk = m // folds
    accs = []
    for f in range(folds):
        te = slice(f * chunk, (f + 1) * chunk)
        tr_idx = np.r_[0 : f * chunk, (f + 1) * chunk : m]
        x_tr = np.vstack([x_real[tr_idx], x_syn[tr_idx]])
        y_tr = np.r_[np.zeros(len(tr_idx)), np.ones(len(tr_idx))]
        x_te = np.vstack([x_real[te], x_syn[te]])
        y_te = np.r_[np.zeros(chunk), np.ones(chunk)]
        scaler = StandardScaler().fit(x_tr)
        clf = LogisticRegression(max_iter=500, C=1.0, random_state=0)
        clf.fit(scaler.transform(x_tr), y_tr)
        accs.append(float(clf.score(scaler.transform(x_te), y_te)))
    return {"accuracy_mean": float(np.mean(accs)), "accuracy_sd": float(np.std(accs))}


# ---------------------------------------------------------------------------
# DCR privacy


def dcr_distances(synthetic: Table, real_train: Table) -> np.ndarray:
    """Per synthetic row, min L1 distance to any real row.

    Numeric features are min-max scaled to [0, 1] by real-train stats;
    categorical features contribute 0/1 on mismatch.
    """
    schema = synthetic.schema
    stats = _numeric_stats(real_train, schema)
    syn = _dcr_encode(synthetic, schema, stats)
    real = _dcr_encode(real_train, schema, stats)
    n_syn, n_real = len(synthetic), len(real_train)
    dist = np.zeros((n_syn, n_real))
    for j, (name, kind) in enumerate(schema.features):
        if kind == NUMERICAL:
            dist += np.abs(syn[j][:, None] - real[j][None, :])
        else:
            dist += (syn[j][:, None] != real[j][None, :]).astype(float)
    return dist.min(axis=1)


def eval_dcr(synthetic: Table, real_train: Table) -> dict:
    d = dcr_distances(synthetic, real_train)
    return {
        "min": float(d.min()),
        "median": float(np.median(d)),
        "mean": float(d.mean()),
    }


# ---------------------------------------------------------------------------
# constraint fidelity


def _on_segment(px, py, ax, ay, bx, by, eps=1e-12) -> bool:
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    if abs(cross) > eps * max(1.0, abs(bx - ax) + abs(by - ay)):
        return False
    return min(ax, bx) - eps <= px <= max(ax, bx) + eps and \
        min(ay, by) - eps <= py <= max(ay, by) + eps


def point_in_polygon(x: float, y: float, ring: list[tuple[float, float]]) -> bool:
    """Ray casting with boundary points counted as inside."""
    if len(ring) < 3:
        raise MalformedPolygonError("ring needs >= 3 vertices")
    pts = list(ring)
    if pts[0] == pts[-1]:
        pts = pts[:-1]
        if len(pts) < 3:
            raise MalformedPolygonError("degenerate ring")
    inside = False
    n = len(pts)
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        if _on_segment(x, y, ax, ay, bx, by):
            return True
        if (ay > y) != (by > y):
            x_cross = ax + (y - ay) * (bx - ax) / (by - ay)
            if x < x_cross:
                inside = not inside
    return inside


def eval_violations(table: Table, constraint: Constraint) -> float:
    """Fraction of rows violating the constraint; 0 rows -> 0 with a warning."""
    if len(table) == 0:
        warnings.warn("violation rate over 0 rows defined as 0")
        return 0.0
    if constraint.kind == "polygon_containment":
        p = constraint.params
        ring = [tuple(map(float, pt)) for pt in p["polygon"]]
        lon_f, lat_f = p["feature_lon"], p["feature_lat"]
        bad = sum(
            0 if point_in_polygon(float(r[lon_f]), float(r[lat_f]), ring) else 1
            for r in table.rows
        )
    elif constraint.kind == "ordinal_consistency":
        p = constraint.params
        order_map = {str(k): float(v) for k, v in p["order_map"].items()}
        if len(set(order_map.values())) != len(order_map):
            raise ValueError("order_map must be injective")
        cat_f, num_f = p["cat_feature"], p["num_feature"]
        bad = 0
        for r in table.rows:
            expected = order_map.get(str(r[cat_f]))
            if expected is None or not math.isclose(
                float(r[num_f]), expected, rel_tol=0, abs_tol=1e-9
            ):
                bad += 1
    else:
        raise ValueError(f"unknown constraint kind {constraint.kind!r}")
    return bad / len(table)


# ---------------------------------------------------------------------------
# full report


def evaluate(
    synthetic: Table,
    real_train: Table,
    real_test: Table | None = None,
    constraints: list[Constraint] | None = None,
    seed: int = 0,
) -> MetricReport:
    utility: dict = {}
    schema = synthetic.schema
    if real_test is not None and schema.target and schema.task != "none":
        try:
            utility = eval_utility(synthetic, real_test, schema)
        except DegenerateTargetError as exc:
            utility = {"error": f"degenerate target: {exc}"}
    realism = eval_discriminator(synthetic, real_train, seed=seed)
    privacy = eval_dcr(synthetic, real_train)
    fidelity = {
        c.name: eval_violations(synthetic, c) for c in (constraints or [])
    }
    return MetricReport(utility, realism, privacy, fidelity)
