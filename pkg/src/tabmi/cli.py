"""Command-line entry point: fit / sample / eval / sweep / mi-graph export."""
from __future__ import annotations

import json
import logging
import os
import sys

import click

from . import artifact as artifact_io
from .dataset import FeatureSchema, Table, load_table, split as split_table, write_table
from .engine import collect_bin_values, fit_engine
from .errors import TabmiError
from .evaluation import Constraint, evaluate
from .guidance import GuidanceConfig
from .migraph import export_aggregates_json, export_matrix_csv
from .sampler import SamplerConfig, records_to_table, synthesize
from .sweep import SweepPlan, run_sweep, write_sweep_csv

_GUIDANCE = {"fs": "feature_selector", "lc": "logit_correction", "none": "none"}


def _setup_logging() -> None:
    level = os.environ.get("SAGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def _fail(exc: Exception) -> None:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    click.echo(json.dumps(payload), err=True)
    sys.exit(1)


def _guidance_config(guidance: str, tau: str, lam: float) -> GuidanceConfig:
    tau_val = None if tau == "auto" else float(tau)
    return GuidanceConfig(mode=_GUIDANCE[guidance], tau=tau_val, lam=lam)


@click.group()
@click.option("--threads", default=1, show_default=True, help="Worker threads.")
@click.pass_context
def main(ctx, threads):
    _setup_logging()
    ctx.obj = {"threads": threads}


@main.command()
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--bins", default="auto", show_default=True,
              help="'auto' (Freedman-Diaconis) or a fixed bin count.")
@click.option("--guidance", type=click.Choice(list(_GUIDANCE)), default="fs",
              show_default=True)
@click.option("--tau", default="auto", show_default=True)
@click.option("--lambda", "lam", default=1.0, show_default=True)
@click.option("--agg", type=click.Choice(["bin_index", "max"]), default="bin_index")
def fit(data, schema_path, out_dir, bins, guidance, tau, lam, agg):
    """Fit a model artifact from a training CSV."""
    try:
        schema = FeatureSchema.from_json(schema_path)
        train = load_table(data, schema)
        fixed_k = None if bins == "auto" else int(bins)
        engine = fit_engine(
            train,
            guidance=_guidance_config(guidance, tau, lam),
            fixed_k=fixed_k,
            agg=agg,
        )
        artifact_io.save_artifact(engine, out_dir)
        click.echo(json.dumps({"artifact": out_dir, "tau": engine.graph.tau}))
    except (TabmiError, ValueError, OSError, KeyError) as exc:
        _fail(exc)


def _load_engine(path, backend_url=None, data=None):
    engine = artifact_io.load_artifact(path)
    if backend_url:
        from .backend import HttpBackend

        engine = engine.with_backend(HttpBackend(backend_url, engine.layout))
    if data:
        train = load_table(data, engine.schema)
        engine.train_rows = train.rows
    return engine


@main.command()
@click.option("--artifact", "artifact_dir", required=True, type=click.Path(exists=True))
@click.option("--count", required=True, type=int)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_csv", required=True, type=click.Path())
@click.option("--guidance", type=click.Choice(list(_GUIDANCE)), default=None,
              help="Override the artifact's guidance mode.")
@click.option("--tau", default=None)
@click.option("--lambda", "lam", default=None, type=float)
@click.option("--nucleus-p", default=0.95, show_default=True)
@click.option("--temperature", default=1.0, show_default=True)
@click.option("--prefix-mode", default="prompt_only", show_default=True,
              help="'prompt_only' or 'seed:K' (requires --data).")
@click.option("--data", default=None, type=click.Path(exists=True),
              help="Training CSV, needed for seed:K prefix mode.")
@click.option("--backend", "backend_url", default=None,
              help="'http:<url>' to score via an external backend.")
@click.option("--provenance", "prov_path", default=None, type=click.Path())
@click.pass_context
def sample(ctx, artifact_dir, count, seed, out_csv, guidance, tau, lam,
           nucleus_p, temperature, prefix_mode, data, backend_url, prov_path):
    """Synthesize records from a fitted artifact and write them as CSV."""
    try:
        url = None
        if backend_url:
            if not backend_url.startswith("http:") and not backend_url.startswith("https:"):
                raise ValueError("--backend expects 'builtin' or an http URL")
            url = backend_url[len("http:"):] if backend_url.startswith("http:") \
                and not backend_url.startswith("http://") else backend_url
        engine = _load_engine(artifact_dir, url, data)
        g = engine.guidance
        if guidance or tau is not None or lam is not None:
            g = GuidanceConfig(
                mode=_GUIDANCE[guidance] if guidance else g.mode,
                tau=(None if tau in (None, "auto") else float(tau)),
                lam=g.lam if lam is None else lam,
            )
            engine = engine.with_guidance(g)
        if prefix_mode.startswith("seed:"):
            cfg = SamplerConfig(
                nucleus_p=nucleus_p, temperature=temperature, seed=seed,
                prefix_mode="seed_k", seed_k=int(prefix_mode.split(":", 1)[1]),
            )
        else:
            cfg = SamplerConfig(
                nucleus_p=nucleus_p, temperature=temperature, seed=seed
            )
        records = synthesize(engine, count, cfg, threads=ctx.obj["threads"])
        write_table(records_to_table(engine.schema, records), out_csv)
        if prov_path:
            with open(prov_path, "w", encoding="utf-8") as fh:
                json.dump([r.provenance for r in records], fh, indent=2)
        click.echo(json.dumps({"written": out_csv, "count": count}))
    except (TabmiError, ValueError, OSError, KeyError) as exc:
        _fail(exc)


@main.command("eval")
@click.option("--synthetic", required=True, type=click.Path(exists=True))
@click.option("--real-train", required=True, type=click.Path(exists=True))
@click.option("--real-test", default=None, type=click.Path(exists=True))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--constraints", "constraints_path", default=None,
              type=click.Path(exists=True))
@click.option("--report", "report_path", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
def eval_cmd(synthetic, real_train, real_test, schema_path, constraints_path,
             report_path, seed):
    """Run the metric suite and write a JSON report."""
    try:
        schema = FeatureSchema.from_json(schema_path)
        syn = load_table(synthetic, schema)
        train = load_table(real_train, schema)
        test = load_table(real_test, schema) if real_test else None
        constraints = []
        if constraints_path:
            with open(constraints_path, encoding="utf-8") as fh:
                constraints = [Constraint.from_dict(c) for c in json.load(fh)]
        report = evaluate(syn, train, test, constraints, seed=seed)
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        click.echo(json.dumps({"report": report_path}))
    except (TabmiError, ValueError, OSError, KeyError) as exc:
        _fail(exc)


@main.group("mi-graph")
def mi_graph():
    """MI graph utilities."""


@mi_graph.command("export")
@click.option("--artifact", "artifact_dir", required=True, type=click.Path(exists=True))
@click.option("--out-prefix", required=True)
def mi_export(artifact_dir, out_prefix):
    """Write the pairwise matrix as CSV and feature-level aggregates as JSON."""
    try:
        engine = artifact_io.load_artifact(artifact_dir)
        export_matrix_csv(engine.graph, out_prefix + ".csv")
        export_aggregates_json(engine.graph, out_prefix + ".json")
        click.echo(json.dumps(
            {"matrix": out_prefix + ".csv", "aggregates": out_prefix + ".json"}
        ))
    except (TabmiError, ValueError, OSError, KeyError) as exc:
        _fail(exc)


@main.command()
@click.option("--artifact", "artifact_dir", required=True, type=click.Path(exists=True))
@click.option("--real-train", required=True, type=click.Path(exists=True))
@click.option("--real-test", default=None, type=click.Path(exists=True))
@click.option("--quantiles", default="0,0.25,0.5,0.75,0.9", show_default=True)
@click.option("--count", default=200, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--guidance", type=click.Choice(["fs", "lc"]), default="fs")
@click.option("--report", "report_path", required=True, type=click.Path())
def sweep(artifact_dir, real_train, real_test, quantiles, count, seed, guidance,
          report_path):
    """Sweep the MI threshold over quantiles and write a metric-curve CSV."""
    try:
        engine = artifact_io.load_artifact(artifact_dir)
        train = load_table(real_train, engine.schema)
        test = load_table(real_test, engine.schema) if real_test else None
        plan = SweepPlan(
            quantiles=tuple(float(q) for q in quantiles.split(",")),
            mode=_GUIDANCE[guidance],
            count=count,
            sampler=SamplerConfig(seed=seed),
        )
        rows = run_sweep(engine, plan, train, test)
        write_sweep_csv(rows, report_path)
        click.echo(json.dumps({"report": report_path, "points": len(rows)}))
    except (TabmiError, ValueError, OSError, KeyError) as exc:
        _fail(exc)


@main.command()
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--workdir", required=True, type=click.Path())
@click.option("--train-fraction", default=0.8, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--guidance", type=click.Choice(list(_GUIDANCE)), default="fs")
@click.option("--count", default=None, type=int,
              help="Synthetic rows; defaults to the train split size.")
@click.option("--constraints", "constraints_path", default=None,
              type=click.Path(exists=True))
def run(data, schema_path, workdir, train_fraction, seed, guidance, count,
        constraints_path):
    """End-to-end pipeline: split, fit, sample, evaluate."""
    try:
        os.makedirs(workdir, exist_ok=True)
        schema = FeatureSchema.from_json(schema_path)
        table = load_table(data, schema)
        train, test = split_table(table, train_fraction, seed)
        train_csv = os.path.join(workdir, "train.csv")
        test_csv = os.path.join(workdir, "test.csv")
        write_table(train, train_csv)
        write_table(test, test_csv)
        engine = fit_engine(train, guidance=_guidance_config(guidance, "auto", 1.0))
        artifact_io.save_artifact(engine, os.path.join(workdir, "artifact"))
        m = count or len(train)
        records = synthesize(engine, m, SamplerConfig(seed=seed))
        synth = records_to_table(schema, records)
        synth_csv = os.path.join(workdir, "synthetic.csv")
        write_table(synth, synth_csv)
        constraints = []
        if constraints_path:
            with open(constraints_path, encoding="utf-8") as fh:
                constraints = [Constraint.from_dict(c) for c in json.load(fh)]
        report = evaluate(synth, train, test, constraints, seed=seed)
        report_path = os.path.join(workdir, "report.json")
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        click.echo(json.dumps({"report": report_path, "synthetic": synth_csv}))
    except (TabmiError, ValueError, OSError, KeyError) as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
