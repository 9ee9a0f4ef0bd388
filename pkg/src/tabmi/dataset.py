"""CSV ingestion under a typed schema, validation, and deterministic splits.

Tables are immutable after load and safe for concurrent reads. Missing
values are rejected at load time because downstream binning and
dependency estimation assume complete records.
"""
from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import dataclass, field

from .errors import (
    EmptyTableError,
    MissingColumnError,
    SchemaError,
    TypeMismatchError,
)

NUMERICAL = "numerical"
CATEGORICAL = "categorical"

Value = float | str
Record = dict[str, Value]


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature declarations plus the optional prediction task."""

    features: tuple[tuple[str, str], ...]
    target: str | None = None
    task: str = "none"

    def __post_init__(self):
        names = [n for n, _ in self.features]
        if len(names) != len(set(names)):
            raise SchemaError("duplicate feature names")
        if any(not n for n in names):
            raise SchemaError("empty feature name")
        for n, kind in self.features:
            if kind not in (NUMERICAL, CATEGORICAL):
                raise SchemaError(f"feature {n!r}: unknown kind {kind!r}")
        if self.target is not None and self.target not in names:
            raise SchemaError(f"target {self.target!r} not a schema feature")
        if self.task not in ("classification", "regression", "none"):
            raise SchemaError(f"unknown task {self.task!r}")

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.features]

    @property
    def kinds(self) -> dict[str, str]:
        return dict(self.features)

    def kind_of(self, name: str) -> str:
        try:
            return self.kinds[name]
        except KeyError:
            raise SchemaError(f"unknown feature {name!r}") from None

    @classmethod
    def from_json(cls, path: str) -> "FeatureSchema":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        feats = tuple((f["name"], f["kind"]) for f in raw["features"])
        return cls(feats, raw.get("target"), raw.get("task", "none"))

    def to_dict(self) -> dict:
        return {
            "features": [{"name": n, "kind": k} for n, k in self.features],
            "target": self.target,
            "task": self.task,
        }


@dataclass(frozen=True)
class Table:
    schema: FeatureSchema
    rows: tuple[Record, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list[Value]:
        return [r[name] for r in self.rows]


def _parse_numeric(token: str, row: int, feature: str) -> float:
    try:
        v = float(token)
    except ValueError:
        raise TypeMismatchError(row, feature, token) from None
    if not math.isfinite(v):
        raise TypeMismatchError(row, feature, token)
    return v


def load_table(path: str, schema: FeatureSchema) -> Table:
    """Read a headered CSV and validate it against the schema.

    Row order is preserved. Raises MissingColumnError when the header
    lacks schema columns, TypeMismatchError on unparseable numeric cells,
    and EmptyTableError when no data rows are present.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyTableError(f"{path}: no header row") from None
        missing = set(schema.names) - set(header)
        if missing:
            raise MissingColumnError(f"{path}: missing columns {sorted(missing)}")
        col_idx = {name: header.index(name) for name in schema.names}
        rows: list[Record] = []
        for i, raw in enumerate(reader):
            rec: Record = {}
            for name, kind in schema.features:
                token = raw[col_idx[name]] if col_idx[name] < len(raw) else ""
                if token == "":
                    raise TypeMismatchError(i, name, "<missing>")
                if kind == NUMERICAL:
                    rec[name] = _parse_numeric(token, i, name)
                else:
                    if ", " in token:
                        # textualization must stay injective; ", " is the
                        # phrase separator
                        raise TypeMismatchError(i, name, token)
                    rec[name] = token
            rows.append(rec)
    if not rows:
        raise EmptyTableError(f"{path}: zero data rows")
    return Table(schema, tuple(rows))


def make_table(schema: FeatureSchema, rows: list[Record]) -> Table:
    """Build an in-memory Table, applying the same validation as load."""
    if not rows:
        raise EmptyTableError("zero rows")
    out = []
    for i, rec in enumerate(rows):
        if set(rec) != set(schema.names):
            raise MissingColumnError(f"row {i}: keys do not match schema")
        clean: Record = {}
        for name, kind in schema.features:
            v = rec[name]
            if kind == NUMERICAL:
                v = float(v)
                if not math.isfinite(v):
                    raise TypeMismatchError(i, name, repr(v))
            else:
                v = str(v)
                if ", " in v:
                    raise TypeMismatchError(i, name, v)
            clean[name] = v
        out.append(clean)
    return Table(schema, tuple(out))


def write_table(table: Table, path: str) -> None:
    from .backend import format_value

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(table.schema.names)
        for rec in table.rows:
            writer.writerow([format_value(rec[n]) for n in table.schema.names])


def split(table: Table, train_fraction: float, seed: int) -> tuple[Table, Table]:
    """Deterministic disjoint train/test partition.

    floor(N * train_fraction) rows go to train, the remainder to test;
    row order within each side follows the original table.
    """
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must be in (0, 1)")
    n = len(table)
    idx = list(range(n))
    random.Random(seed).shuffle(idx)
    n_train = math.floor(n * train_fraction)
    train_idx = sorted(idx[:n_train])
    test_idx = sorted(idx[n_train:])
    return (
        Table(table.schema, tuple(table.rows[i] for i in train_idx)),
        Table(table.schema, tuple(table.rows[i] for i in test_idx)),
    )
