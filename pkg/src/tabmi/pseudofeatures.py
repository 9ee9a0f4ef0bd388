"""Value-aware discretization into binary pseudo-features.

Each numerical feature is cut into k equal-width bins over its training
range, with k chosen by the Freedman-Diaconis count rule
k = ceil(range / (2 * IQR * n^(-1/3))) capped at 16. Intervals are
half-open, the last bin right-closed so the maximum stays assignable.
Categorical features contribute one indicator per observed category.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .dataset import CATEGORICAL, NUMERICAL, Record, Table, Value
from .errors import OutOfRangeError, UnknownFeatureError, UnseenCategoryError

MAX_BINS = 16


@dataclass(frozen=True)
class BinLayout:
    """Per-feature bin/category structure and the global pseudo-id space.

    Global ids are contiguous, assigned in schema feature order, one per
    pseudo-feature (bin or category).
    """

    feature_order: tuple[str, ...]
    cuts: dict[str, tuple[float, ...]]        # numerical feature -> a_0..a_k
    categories: dict[str, tuple[str, ...]]    # categorical feature -> V_f
    offsets: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.offsets:
            off = 0
            for f in self.feature_order:
                self.offsets[f] = off
                off += self.count(f)

    def count(self, feature: str) -> int:
        if feature in self.cuts:
            return len(self.cuts[feature]) - 1
        if feature in self.categories:
            return len(self.categories[feature])
        raise UnknownFeatureError(feature)

    @property
    def n_pseudo(self) -> int:
        return sum(self.count(f) for f in self.feature_order)

    def parent_of(self) -> list[str]:
        """Parent feature name per global pseudo id."""
        out = []
        for f in self.feature_order:
            out.extend([f] * self.count(f))
        return out

    def ids_of(self, feature: str) -> range:
        start = self.offsets[feature]
        return range(start, start + self.count(feature))

    def local_bin(self, feature: str, value: Value) -> int:
        """0-based bin or category index within the feature."""
        if feature in self.categories:
            cats = self.categories[feature]
            try:
                return cats.index(str(value))
            except ValueError:
                raise UnseenCategoryError(f"{feature}: {value!r}") from None
        if feature not in self.cuts:
            raise UnknownFeatureError(feature)
        cuts = self.cuts[feature]
        v = float(value)
        if v < cuts[0] or v > cuts[-1]:
            raise OutOfRangeError(f"{feature}: {v} outside [{cuts[0]}, {cuts[-1]}]")
        k = len(cuts) - 1
        # half-open bins; values on an interior cut go right, the last
        # bin is right-closed
        return min(bisect_right(cuts, v) - 1, k - 1)

    def bin_interval(self, feature: str, local: int) -> tuple[float, float]:
        cuts = self.cuts[feature]
        return cuts[local], cuts[local + 1]

    def to_dict(self) -> dict:
        return {
            "feature_order": list(self.feature_order),
            "cuts": {f: list(c) for f, c in self.cuts.items()},
            "categories": {f: list(c) for f, c in self.categories.items()},
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "BinLayout":
        return cls(
            tuple(raw["feature_order"]),
            {f: tuple(c) for f, c in raw["cuts"].items()},
            {f: tuple(c) for f, c in raw["categories"].items()},
        )


@dataclass(frozen=True)
class PseudoVector:
    """One active pseudo-feature per schema feature, in schema order."""

    ids: tuple[int, ...]

    @property
    def active(self) -> frozenset[int]:
        return frozenset(self.ids)


def fd_bin_count(values: np.ndarray) -> int:
    """Freedman-Diaconis bin count, capped at MAX_BINS.

    Constant features and zero-IQR features collapse to a single bin
    since the rule's denominator vanishes.
    """
    n = len(values)
    lo, hi = float(np.min(values)), float(np.max(values))
    q1, q3 = np.percentile(values, [25, 75])  # linear interpolation (type 7)
    iqr = float(q3 - q1)
    delta = hi - lo
    if delta == 0.0 or iqr == 0.0:
        return 1
    k = math.ceil(delta / (2.0 * iqr * n ** (-1.0 / 3.0)))
    return max(1, min(MAX_BINS, k))


def fit_bins(train: Table, fixed_k: int | None = None) -> BinLayout:
    """Fit cut points / category lists on the training split.

    fixed_k overrides the Freedman-Diaconis count for every numerical
    feature (used by grid-search style configurations).
    """
    cuts: dict[str, tuple[float, ...]] = {}
    categories: dict[str, tuple[str, ...]] = {}
    for name, kind in train.schema.features:
        col = train.column(name)
        if kind == NUMERICAL:
            vals = np.asarray(col, dtype=float)
            lo, hi = float(vals.min()), float(vals.max())
            if fixed_k is not None and hi > lo:
                k = max(1, min(MAX_BINS, fixed_k))
            else:
                k = fd_bin_count(vals)
            w = (hi - lo) / k
            pts = [lo + i * w for i in range(k)] + [hi]
            cuts[name] = tuple(pts)
        else:
            seen: list[str] = []
            for v in col:
                if v not in seen:
                    seen.append(str(v))
            categories[name] = tuple(seen)
    return BinLayout(tuple(train.schema.names), cuts, categories)


def assign_bin(layout: BinLayout, feature: str, value: Value) -> int:
    """Global pseudo-feature id activated by `value` on `feature`."""
    return layout.offsets[feature] + layout.local_bin(feature, value)


def expand(layout: BinLayout, record: Record) -> PseudoVector:
    return PseudoVector(
        tuple(assign_bin(layout, f, record[f]) for f in layout.feature_order)
    )


def activation_matrix(table: Table, layout: BinLayout) -> np.ndarray:
    """N x P binary matrix of pseudo-feature activations."""
    n, p = len(table), layout.n_pseudo
    x = np.zeros((n, p), dtype=np.float64)
    for i, rec in enumerate(table.rows):
        for pid in expand(layout, rec).ids:
            x[i, pid] = 1.0
    return x


def bin_index_column(table: Table, layout: BinLayout, feature: str) -> np.ndarray:
    """Local bin index per row for one feature."""
    return np.asarray(
        [layout.local_bin(feature, rec[feature]) for rec in table.rows],
        dtype=np.int64,
    )
