"""Command-line entry points for the testbed pipeline."""

from __future__ import annotations

import json
from pathlib import Path

import click

from . import dataset as ds
from . import report as report_mod
from .ids import evaluate, load_model, save_model, train
from .ids.models import ALGORITHMS
from .scenario import (
    Dataset,
    config_hash,
    derive_seed,
    load_config,
    run_capture,
    run_scenario,
    write_registry,
    write_tap_log,
)


@click.group(context_settings={"auto_envvar_prefix": "AQUADUCT"})
def main():
    """Water-tank SCADA testbed: traffic generation, datasets, detection."""


@main.command()
@click.option("--config", "-c", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "-o", "outdir", required=True, type=click.Path())
def run(config_path, outdir):
    """Full pipeline: capture, dataset, offline train/test, online deploy, report."""
    config = load_config(config_path)
    report = run_scenario(config, outdir)
    report_mod.render_report(report, outdir)
    click.echo(f"report written to {Path(outdir) / 'report.json'}")
    for model in sorted(report["models"]):
        offline = report["models"][model]["offline"]["accuracy"]
        online = report["models"][model]["online"]["accuracy"]
        click.echo(f"  {model}: offline accuracy {offline:.2f}%, online {online:.2f}%")


@main.command("dataset")
@click.option("--config", "-c", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "-o", "outdir", required=True, type=click.Path())
def dataset_cmd(config_path, outdir):
    """Capture traffic and write the labeled flow dataset only."""
    config = load_config(config_path)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    capture = run_capture(config, "offline")
    write_tap_log(capture.events, outdir / "tap.log")
    write_registry(capture.registry, outdir / "ground_truth.json")
    data = Dataset(capture.labeled, provenance=f"{config_hash(config)}:{config.master_seed}")
    ds.write_csv(data, outdir / "dataset.csv")
    info = ds.stats(data)
    click.echo(
        f"{info['total_rows']} flows ({info['normal_pct']:.2f}% normal) "
        f"-> {outdir / 'dataset.csv'}"
    )


@main.command("train")
@click.option("--data", "-d", "data_path", required=True, type=click.Path(exists=True))
@click.option("--model", "-m", "algorithm", required=True, type=click.Choice(ALGORITHMS))
@click.option("--out", "-o", "model_path", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
def train_cmd(data_path, algorithm, model_path, seed):
    """Train one model on a dataset CSV and save it."""
    data = ds.read_csv(data_path)
    model = train(algorithm, data, seed=seed)
    save_model(model, model_path)
    click.echo(f"{algorithm} trained on {len(data.rows)} rows -> {model_path}")


@main.command("evaluate")
@click.option("--model", "-m", "model_path", required=True, type=click.Path(exists=True))
@click.option("--data", "-d", "data_path", required=True, type=click.Path(exists=True))
def evaluate_cmd(model_path, data_path):
    """Score a saved model against a labeled dataset CSV."""
    model = load_model(model_path)
    data = ds.read_csv(data_path)
    cm, metrics = evaluate(model, data)
    click.echo(json.dumps(
        {
            "algorithm": model.algorithm,
            "confusion": {"tp": cm.tp, "tn": cm.tn, "fp": cm.fp, "fn": cm.fn},
            "accuracy": metrics.accuracy,
            "far": metrics.far,
            "und": metrics.und,
        },
        indent=2,
    ))


@main.command("report")
@click.option("--report", "-r", "report_path", required=True, type=click.Path(exists=True))
@click.option("--out", "-o", "outdir", required=True, type=click.Path())
def report_cmd(report_path, outdir):
    """Render summary text, chart data, and figures from a report.json."""
    report = report_mod.load_report(report_path)
    created = report_mod.render_report(report, outdir)
    for path in created:
        click.echo(path)


@main.command("serve")
@click.option("--config", "-c", "config_path", required=True, type=click.Path(exists=True))
@click.option("--model", "-m", "model_path", type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--time-scale", default=1.0, show_default=True,
              help="Wall seconds per virtual second.")
@click.option("--frontend", type=click.Path(exists=True),
              help="Directory with the built browser HMI to serve at /.")
def serve_cmd(config_path, model_path, host, port, time_scale, frontend):
    """Run a live paced session with the HTTP/WS API (and optional HMI)."""
    import uvicorn

    from .api import LiveSession, create_app

    config = load_config(config_path)
    model = load_model(model_path) if model_path else None
    session = LiveSession(config, model, time_scale=time_scale)
    session.start()
    app = create_app(session, frontend_dir=frontend)
    try:
        uvicorn.run(app, host=host, port=port, log_level="info")
    finally:
        session.stop()


if __name__ == "__main__":
    main()
