"""Report emission: JSON + CSV rows plus matplotlib figures rendered to files."""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .evaluation import EvalReport  # noqa: E402


def write_reports(reports, out_dir) -> dict:
    """Write report.json, report.csv, and report.png; returns written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jpath = out / "report.json"
    jpath.write_text(json.dumps([r.to_dict() for r in reports], indent=2))
    cpath = out / "report.csv"
    cpath.write_text("\n".join([EvalReport.CSV_HEADER]
                               + [r.csv_row() for r in reports]) + "\n")
    fpath = out / "report.png"
    _metric_figure(reports, fpath)
    return {"json": str(jpath), "csv": str(cpath), "figure": str(fpath)}


def _metric_figure(reports, path) -> None:
    labels = [f"{r.setting[:5]}/{r.strategy}" for r in reports]
    xs = range(len(reports))
    fig, ax = plt.subplots(figsize=(max(4, 1.4 * len(reports)), 3.2))
    w = 0.38
    ax.bar([x - w / 2 for x in xs], [r.ap_mean for r in reports], w,
           yerr=[r.ap_std for r in reports], capsize=3, label="AP")
    ax.bar([x + w / 2 for x in xs], [r.auc_mean for r in reports], w,
           yerr=[r.auc_std for r in reports], capsize=3, label="AUC")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_training_curve(log_rows, out_dir) -> str:
    """Loss/validation-AP curve for a training run."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "training.png"
    epochs = [r.epoch for r in log_rows]
    fig, ax1 = plt.subplots(figsize=(5, 3.2))
    ax1.plot(epochs, [r.train_loss for r in log_rows], color="tab:blue",
             label="train loss")
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("train loss", color="tab:blue")
    ax2 = ax1.twinx()
    ax2.plot(epochs, [r.val_ap for r in log_rows], color="tab:orange",
             label="val AP")
    ax2.set_ylabel("val AP", color="tab:orange")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)
