"""Fitted synthesis engine: layout + MI graph + backend + guidance config."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .backend import CountBackend, fit_builtin
from .dataset import NUMERICAL, FeatureSchema, Record, Table
from .guidance import GuidanceConfig
from .migraph import MIGraph, estimate_mi
from .pseudofeatures import BinLayout, fit_bins


@dataclass
class Engine:
    schema: FeatureSchema
    layout: BinLayout
    graph: MIGraph
    backend: object                  # CountBackend or HttpBackend
    guidance: GuidanceConfig
    # per numerical feature, training values grouped by bin; used to turn
    # a sampled bin into a concrete value
    bin_values: dict[str, list[list[float]]]
    train_rows: tuple[Record, ...] | None = None

    def with_guidance(self, guidance: GuidanceConfig) -> "Engine":
        return replace(self, guidance=guidance)

    def with_backend(self, backend) -> "Engine":
        return replace(self, backend=backend)


def collect_bin_values(train: Table, layout: BinLayout) -> dict[str, list[list[float]]]:
    out: dict[str, list[list[float]]] = {}
    for name, kind in train.schema.features:
        if kind != NUMERICAL:
            continue
        buckets: list[list[float]] = [[] for _ in range(layout.count(name))]
        for rec in train.rows:
            buckets[layout.local_bin(name, rec[name])].append(float(rec[name]))
        out[name] = buckets
    return out


def fit_engine(
    train: Table,
    guidance: GuidanceConfig | None = None,
    fixed_k: int | None = None,
    agg: str = "bin_index",
    tau_convention: str = "feature_level",
    keep_train_rows: bool = True,
) -> Engine:
    """One-pass fit of layout, MI graph, and the built-in backend."""
    layout = fit_bins(train, fixed_k)
    graph = estimate_mi(train, layout, agg=agg, tau_convention=tau_convention)
    backend = fit_builtin(train, layout)
    return Engine(
        schema=train.schema,
        layout=layout,
        graph=graph,
        backend=backend,
        guidance=guidance or GuidanceConfig(),
        bin_values=collect_bin_values(train, layout),
        train_rows=train.rows if keep_train_rows else None,
    )
