import hashlib
import json
import os

import pytest
from click.testing import CliRunner

from tabmi.artifact import load_artifact, save_artifact
from tabmi.cli import main
from tabmi.dataset import write_table, split
from tabmi.engine import fit_engine
from tabmi.errors import IntegrityError


@pytest.fixture(scope="module")
def workdir(tmp_path_factory, iris):
    d = tmp_path_factory.mktemp("cli")
    train, test = split(iris, 0.8, seed=0)
    write_table(iris, str(d / "iris.csv"))
    write_table(train, str(d / "train.csv"))
    write_table(test, str(d / "test.csv"))
    (d / "schema.json").write_text(json.dumps(iris.schema.to_dict()))
    return d


def _run(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def test_fit_sample_eval_roundtrip(workdir):
    art = workdir / "artifact"
    res = _run("fit", "--data", workdir / "train.csv",
               "--schema", workdir / "schema.json", "--out", art)
    assert res.exit_code == 0, res.output
    res = _run("sample", "--artifact", art, "--count", 40, "--seed", 3,
               "--out", workdir / "synth.csv",
               "--provenance", workdir / "prov.json")
    assert res.exit_code == 0, res.output
    res = _run("eval", "--synthetic", workdir / "synth.csv",
               "--real-train", workdir / "train.csv",
               "--real-test", workdir / "test.csv",
               "--schema", workdir / "schema.json",
               "--report", workdir / "report.json")
    assert res.exit_code == 0, res.output
    report = json.loads((workdir / "report.json").read_text())
    assert set(report) == {"utility", "realism", "privacy", "fidelity", "notes"}
    prov = json.loads((workdir / "prov.json").read_text())
    assert len(prov) == 40


def test_sample_guidance_override(workdir):
    art = workdir / "artifact"
    res = _run("sample", "--artifact", art, "--count", 5, "--seed", 1,
               "--guidance", "lc", "--out", workdir / "s_lc.csv")
    assert res.exit_code == 0, res.output


def test_sample_seed_prefix_requires_data(workdir):
    art = workdir / "artifact"
    res = _run("sample", "--artifact", art, "--count", 5,
               "--prefix-mode", "seed:2", "--out", workdir / "s_seed.csv")
    assert res.exit_code == 1
    res = _run("sample", "--artifact", art, "--count", 5,
               "--prefix-mode", "seed:2", "--data", workdir / "train.csv",
               "--out", workdir / "s_seed.csv")
    assert res.exit_code == 0, res.output


def test_mi_graph_export(workdir):
    res = _run("mi-graph", "export", "--artifact", workdir / "artifact",
               "--out-prefix", workdir / "mig")
    assert res.exit_code == 0, res.output
    lines = (workdir / "mig.csv").read_text().splitlines()
    assert lines[0] == "pseudo_id_a,pseudo_id_b,mi"
    agg = json.loads((workdir / "mig.json").read_text())
    assert {"tau", "mu_train", "feature_mi"} <= set(agg)


def test_sweep_command(workdir):
    res = _run("sweep", "--artifact", workdir / "artifact",
               "--real-train", workdir / "train.csv",
               "--real-test", workdir / "test.csv",
               "--quantiles", "0,0.5", "--count", 30,
               "--report", workdir / "sweep.csv")
    assert res.exit_code == 0, res.output
    assert len((workdir / "sweep.csv").read_text().splitlines()) == 3


def test_run_end_to_end(workdir, tmp_path):
    res = _run("run", "--data", workdir / "iris.csv",
               "--schema", workdir / "schema.json",
               "--workdir", tmp_path / "e2e", "--seed", 1, "--count", 40)
    assert res.exit_code == 0, res.output
    report = json.loads((tmp_path / "e2e" / "report.json").read_text())
    assert report["utility"]


def test_error_is_machine_readable(workdir, tmp_path):
    res = _run("fit", "--data", workdir / "train.csv",
               "--schema", workdir / "schema.json",
               "--out", tmp_path / "a", "--bins", "notanumber")
    assert res.exit_code == 1
    err = json.loads(res.output.strip().splitlines()[-1])
    assert "error" in err and "message" in err


def test_corrupted_manifest_refused(workdir, tmp_path, iris):
    train, _ = split(iris, 0.8, seed=0)
    art = tmp_path / "art"
    save_artifact(fit_engine(train), str(art))
    bins = art / "bins.json"
    bins.write_text(bins.read_text() + " ")
    with pytest.raises(IntegrityError):
        load_artifact(str(art))
    res = _run("sample", "--artifact", art, "--count", 1,
               "--out", tmp_path / "x.csv")
    assert res.exit_code == 1
    assert json.loads(res.output.strip().splitlines()[-1])["error"] == "IntegrityError"


def test_refit_byte_identical_modulo_timestamp(workdir, tmp_path, iris):
    train, _ = split(iris, 0.8, seed=0)
    a, b = tmp_path / "a", tmp_path / "b"
    save_artifact(fit_engine(train), str(a))
    save_artifact(fit_engine(train), str(b))
    for name in ("schema.json", "bins.json", "migraph.json", "backend.json",
                 "config.json"):
        ha = hashlib.sha256((a / name).read_bytes()).hexdigest()
        hb = hashlib.sha256((b / name).read_bytes()).hexdigest()
        assert ha == hb, name
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    assert ma["files"] == mb["files"]


def test_artifact_roundtrip_sampling_identical(workdir, tmp_path, iris):
    from tabmi.sampler import SamplerConfig, synthesize

    train, _ = split(iris, 0.8, seed=0)
    engine = fit_engine(train)
    art = tmp_path / "rt"
    save_artifact(engine, str(art))
    loaded = load_artifact(str(art))
    direct = synthesize(engine, 10, SamplerConfig(seed=6))
    via_artifact = synthesize(loaded, 10, SamplerConfig(seed=6))
    assert [r.values for r in direct] == [r.values for r in via_artifact]
