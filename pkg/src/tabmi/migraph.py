"""Pairwise mutual information over pseudo-features and guidance statistics.

All MI values are plug-in estimates from empirical frequencies on the
training split, in nats. Zero-count cells contribute zero; no smoothing
is applied. Pairs whose pseudo-features share a parent feature are
deterministically exclusive and are excluded from every aggregate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Table
from .errors import UnknownFeatureError
from .pseudofeatures import BinLayout, activation_matrix, bin_index_column


def _plugin_terms(p_joint: np.ndarray, p_a: np.ndarray, p_b: np.ndarray) -> np.ndarray:
    """Elementwise p_joint * log(p_joint / (p_a * p_b)) with 0 log 0 = 0."""
    out = np.zeros_like(p_joint)
    mask = p_joint > 0
    denom = p_a * p_b
    out[mask] = p_joint[mask] * np.log(p_joint[mask] / denom[mask])
    return out


@dataclass(frozen=True)
class MIGraph:
    """Symmetric pseudo-pair MI matrix plus per-target aggregates.

    feature_mi[p, j] is the MI between pseudo-feature p and the bin-index
    variable of target feature j (the multi-class realization); tau is
    the default selection threshold; mu[j] the training-wide mean MI for
    target j over pseudo-features outside j.
    """

    features: tuple[str, ...]
    parents: tuple[str, ...]          # parent feature per pseudo id
    mi: np.ndarray                    # (P, P) nats
    feature_mi: np.ndarray            # (P, F) nats
    tau: float
    mu: dict[str, float]

    def feature_index(self, name: str) -> int:
        try:
            return self.features.index(name)
        except ValueError:
            raise UnknownFeatureError(name) from None

    def to_dict(self) -> dict:
        return {
            "features": list(self.features),
            "parents": list(self.parents),
            "mi": self.mi.tolist(),
            "feature_mi": self.feature_mi.tolist(),
            "tau": self.tau,
            "mu": dict(self.mu),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "MIGraph":
        return cls(
            tuple(raw["features"]),
            tuple(raw["parents"]),
            np.asarray(raw["mi"], dtype=float),
            np.asarray(raw["feature_mi"], dtype=float),
            float(raw["tau"]),
            {k: float(v) for k, v in raw["mu"].items()},
        )


def _pairwise_mi(x: np.ndarray) -> np.ndarray:
    """Binary-binary plug-in MI for every column pair of a 0/1 matrix."""
    n = x.shape[0]
    n11 = x.T @ x
    na = x.sum(axis=0)
    n10 = na[:, None] - n11
    n01 = na[None, :] - n11
    n00 = n - n11 - n10 - n01
    pa1 = na / n
    pa0 = 1.0 - pa1
    mi = np.zeros_like(n11)
    for cell, pu, pv in (
        (n11, pa1[:, None], pa1[None, :]),
        (n10, pa1[:, None], pa0[None, :]),
        (n01, pa0[:, None], pa1[None, :]),
        (n00, pa0[:, None], pa0[None, :]),
    ):
        p = cell / n
        with np.errstate(divide="ignore", invalid="ignore"):
            term = np.where(p > 0, p * np.log(p / (pu * pv)), 0.0)
        mi += np.nan_to_num(term, nan=0.0, posinf=0.0, neginf=0.0)
    return np.maximum(mi, 0.0)


def _binary_vs_multiclass_mi(x: np.ndarray, bins: np.ndarray, k: int) -> np.ndarray:
    """MI of each binary column of x against a k-class bin-index vector."""
    n = x.shape[0]
    t = np.zeros((n, k))
    t[np.arange(n), bins] = 1.0
    j1 = x.T @ t                       # (P, k) counts with pseudo active
    marg_c = t.sum(axis=0)             # (k,)
    na = x.sum(axis=0)                 # (P,)
    j0 = marg_c[None, :] - j1
    p1 = (na / n)[:, None]
    p0 = 1.0 - p1
    pc = (marg_c / n)[None, :]
    mi = _plugin_terms(j1 / n, p1, pc) + _plugin_terms(j0 / n, p0, pc)
    return np.maximum(mi.sum(axis=1), 0.0)


def estimate_mi(
    train: Table,
    layout: BinLayout,
    agg: str = "bin_index",
    tau_convention: str = "feature_level",
) -> MIGraph:
    """Build the full MI graph from the training split.

    agg selects how a pseudo-feature is paired with a whole target
    feature: "bin_index" (MI against the target's multi-class bin-index
    variable, the default) or "max" (max pairwise MI over the target's
    pseudo-features, kept for ablation). tau_convention picks which value
    population the default threshold is the median of.
    """
    if agg not in ("bin_index", "max"):
        raise ValueError(f"unknown agg {agg!r}")
    x = activation_matrix(train, layout)
    parents = layout.parent_of()
    features = tuple(layout.feature_order)
    p = layout.n_pseudo

    mi = _pairwise_mi(x)
    # same-parent pairs are exclusive indicators; zero them out
    parent_arr = np.asarray(parents)
    same = parent_arr[:, None] == parent_arr[None, :]
    mi[same] = 0.0

    feature_mi = np.zeros((p, len(features)))
    for j, f in enumerate(features):
        if agg == "bin_index":
            bins = bin_index_column(train, layout, f)
            feature_mi[:, j] = _binary_vs_multiclass_mi(x, bins, layout.count(f))
        else:
            ids = list(layout.ids_of(f))
            feature_mi[:, j] = mi[:, ids].max(axis=1)
        feature_mi[list(layout.ids_of(f)), j] = 0.0

    if tau_convention == "feature_level":
        cross = parent_arr[:, None] != np.asarray(features)[None, :]
        pool = feature_mi[cross]
    elif tau_convention == "pairwise":
        iu = np.triu_indices(p, k=1)
        pool = mi[iu][~same[iu]]
    else:
        raise ValueError(f"unknown tau_convention {tau_convention!r}")
    tau = float(np.median(pool)) if pool.size else 0.0

    mu = {}
    for j, f in enumerate(features):
        outside = parent_arr != f
        vals = feature_mi[outside, j]
        mu[f] = float(vals.mean()) if vals.size else 0.0

    return MIGraph(features, tuple(parents), mi, feature_mi, tau, mu)


def feature_level_mi(graph: MIGraph, pseudo: int, target: str) -> float:
    """MI between one pseudo-feature and a whole target feature, in nats."""
    return float(graph.feature_mi[pseudo, graph.feature_index(target)])


def default_tau(graph: MIGraph) -> float:
    """Median of the feature-level MI values on the training split."""
    return graph.tau


def mu_train(graph: MIGraph, target: str) -> float:
    """Training-wide mean MI between target and non-target pseudo-features."""
    return graph.mu[target]


def export_matrix_csv(graph: MIGraph, path: str) -> None:
    """Cross-feature pseudo-pair MI as (pseudo_id_a, pseudo_id_b, mi) rows."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pseudo_id_a", "pseudo_id_b", "mi"])
        p = graph.mi.shape[0]
        for a in range(p):
            for b in range(a + 1, p):
                if graph.parents[a] != graph.parents[b]:
                    writer.writerow([a, b, repr(float(graph.mi[a, b]))])


def export_aggregates_json(graph: MIGraph, path: str) -> None:
    import json

    payload = {
        "features": list(graph.features),
        "tau": graph.tau,
        "mu_train": dict(graph.mu),
        "feature_mi": {
            f: graph.feature_mi[:, j].tolist() for j, f in enumerate(graph.features)
        },
        "parents": list(graph.parents),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
