"""Persisted model artifact: a directory of JSON files plus a hash manifest.

All structured state is JSON (auditable, no binary formats). Writes are
atomic (temp directory + rename) and deterministic, so re-fitting on
identical inputs reproduces byte-identical files apart from the manifest's
timestamp field.
"""
from __future__ import annotations

import hashlib
import json
import os
import shutil
import tempfile
import time

from .backend import CountBackend
from .dataset import FeatureSchema
from .engine import Engine
from .errors import IntegrityError
from .guidance import GuidanceConfig
from .migraph import MIGraph
from .pseudofeatures import BinLayout

FORMAT_VERSION = 1
_FILES = ("schema.json", "bins.json", "migraph.json", "backend.json", "config.json")


def _dump(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def save_artifact(engine: Engine, out_dir: str) -> None:
    parent = os.path.dirname(os.path.abspath(out_dir)) or "."
    os.makedirs(parent, exist_ok=True)
    tmp = tempfile.mkdtemp(prefix=".artifact-", dir=parent)
    try:
        _dump(os.path.join(tmp, "schema.json"), engine.schema.to_dict())
        _dump(os.path.join(tmp, "bins.json"), engine.layout.to_dict())
        _dump(os.path.join(tmp, "migraph.json"), engine.graph.to_dict())
        backend_state = {
            "kind": "builtin",
            "counts": engine.backend.state_dict(),
            "bin_values": engine.bin_values,
        }
        _dump(os.path.join(tmp, "backend.json"), backend_state)
        _dump(
            os.path.join(tmp, "config.json"),
            {
                "guidance": {
                    "mode": engine.guidance.mode,
                    "tau": engine.guidance.tau,
                    "lambda": engine.guidance.lam,
                }
            },
        )
        manifest = {
            "format_version": FORMAT_VERSION,
            "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "files": {f: _sha256(os.path.join(tmp, f)) for f in _FILES},
        }
        _dump(os.path.join(tmp, "manifest.json"), manifest)
        if os.path.exists(out_dir):
            shutil.rmtree(out_dir)
        os.rename(tmp, out_dir)
    except Exception:
        shutil.rmtree(tmp, ignore_errors=True)
        raise


def load_artifact(path: str) -> Engine:
    manifest_path = os.path.join(path, "manifest.json")
    if not os.path.exists(manifest_path):
        raise IntegrityError(f"{path}: no manifest.json")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("format_version") != FORMAT_VERSION:
        raise IntegrityError(
            f"unsupported artifact format {manifest.get('format_version')!r}"
        )
    for name, digest in manifest["files"].items():
        fpath = os.path.join(path, name)
        if not os.path.exists(fpath) or _sha256(fpath) != digest:
            raise IntegrityError(f"{name}: hash mismatch or missing")

    def read(name: str) -> dict:
        with open(os.path.join(path, name), encoding="utf-8") as fh:
            return json.load(fh)

    schema_raw = read("schema.json")
    schema = FeatureSchema(
        tuple((f["name"], f["kind"]) for f in schema_raw["features"]),
        schema_raw.get("target"),
        schema_raw.get("task", "none"),
    )
    layout = BinLayout.from_dict(read("bins.json"))
    graph = MIGraph.from_dict(read("migraph.json"))
    backend_raw = read("backend.json")
    backend = CountBackend.from_state(layout, backend_raw["counts"])
    cfg = read("config.json")["guidance"]
    guidance = GuidanceConfig(cfg["mode"], cfg["tau"], cfg["lambda"])
    return Engine(
        schema=schema,
        layout=layout,
        graph=graph,
        backend=backend,
        guidance=guidance,
        bin_values=backend_raw["bin_values"],
        train_rows=None,
    )
