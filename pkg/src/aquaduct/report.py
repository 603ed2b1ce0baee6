"""Run-report rendering: summary text, per-metric chart data, figures.

Produces the offline-vs-online comparison as grouped bar charts (one
figure per metric, one group per model, two bars per group) plus the
same numbers as delimited chart data, so the figures can be rebuilt
from text alone.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

METRIC_KEYS = ("accuracy", "far", "und")
METRIC_TITLES = {
    "accuracy": "Accuracy (%)",
    "far": "False alarm rate (%)",
    "und": "Un-detection rate (%)",
}


def load_report(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _fmt(value) -> str:
    return "undefined" if value is None else f"{value:.3f}"


def write_summary(report: dict, path):
    lines = []
    prov = report["provenance"]
    lines.append(f"scenario {prov['config_hash']} seed {prov['master_seed']}")
    ds = report["dataset"]
    lines.append(
        f"dataset: {ds['total_rows']} flows, "
        f"{ds['normal_pct']:.2f}% normal, {ds['attack_pct']:.2f}% attack"
    )
    for kind, pct in ds.get("by_kind_pct", {}).items():
        lines.append(f"  {kind}: {pct:.4f}%")
    sp = report["split"]
    lines.append(f"split: {sp['train_rows']} train / {sp['test_rows']} test")
    lines.append("")
    header = f"{'model':<22}{'phase':<10}{'accuracy':>10}{'far':>10}{'und':>10}"
    lines.append(header)
    lines.append("-" * len(header))
    for model in sorted(report["models"]):
        for phase in ("offline", "online"):
            m = report["models"][model][phase]
            lines.append(
                f"{model:<22}{phase:<10}{_fmt(m['accuracy']):>10}"
                f"{_fmt(m['far']):>10}{_fmt(m['und']):>10}"
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_chart_data(report: dict, metric: str, path):
    lines = ["model,offline,online"]
    for model in sorted(report["models"]):
        off = report["models"][model]["offline"][metric]
        on = report["models"][model]["online"][metric]
        lines.append(f"{model},{'' if off is None else off},{'' if on is None else on}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def plot_metric(report: dict, metric: str, path):
    models = sorted(report["models"])
    offline = [report["models"][m]["offline"][metric] or 0.0 for m in models]
    online = [report["models"][m]["online"][metric] or 0.0 for m in models]
    x = range(len(models))
    width = 0.38
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.bar([i - width / 2 for i in x], offline, width, label="offline", color="#3465a4")
    ax.bar([i + width / 2 for i in x], online, width, label="online", color="#cc6600")
    ax.set_xticks(list(x))
    ax.set_xticklabels([m.replace("_", " ") for m in models], rotation=15)
    ax.set_ylabel(METRIC_TITLES[metric])
    ax.set_title(f"{METRIC_TITLES[metric]}: offline vs online")
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def render_report(report: dict, outdir) -> list[str]:
    """Write summary, chart CSVs, and figures; returns the created paths."""
    outdir = Path(outdir)
    charts = outdir / "charts"
    charts.mkdir(parents=True, exist_ok=True)
    created = []
    summary = outdir / "report.txt"
    write_summary(report, summary)
    created.append(str(summary))
    for metric in METRIC_KEYS:
        csv_path = charts / f"{metric}.csv"
        png_path = charts / f"{metric}.png"
        write_chart_data(report, metric, csv_path)
        plot_metric(report, metric, png_path)
        created.extend([str(csv_path), str(png_path)])
    return created
