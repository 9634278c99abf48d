"""Report writers: canonical JSON, CSV tables, and matplotlib figures.

Reports embed the resolved config, the seed, and the artifact version, and
contain no timestamps, so a replay with the same config is byte-identical.
Figures are rendered next to the delimited output.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from . import __version__  # noqa: E402


def report_payload(command: str, config: dict, body: dict) -> dict:
    return {"command": command, "version": __version__,
            "config": config, **body}


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2,
                               default=str) + "\n")
    return path


def write_csv(path, rows, fieldnames=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = list(rows)
    if fieldnames is None:
        fieldnames = list(rows[0].keys()) if rows else []
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return path


def verification_figure(report: dict, path) -> Path:
    """Bar chart of per-check averages against their thresholds."""
    checks = report["checks"]
    names = [c["name"] for c in checks]
    avgs = [c["average"] for c in checks]
    thrs = [c["threshold"] for c in checks]
    colors = ["tab:green" if c["pass"] else "tab:red" for c in checks]
    fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(names)), 3.2))
    xs = range(len(names))
    ax.bar(xs, avgs, color=colors)
    ax.plot(xs, thrs, "k_", markersize=18, label="threshold")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("observed average")
    ax.set_title(f"{report['protocol']}  (n={report['n']}, "
                 f"{'pass' if report['pass'] else 'FAIL'})")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def attack_figure(result: dict, path) -> Path:
    """Monte-Carlo estimate with its interval, against the exact value."""
    fig, ax = plt.subplots(figsize=(4, 3))
    est = result.get("estimate")
    ci = result.get("ci95")
    if est is not None:
        if ci:
            err = [[est - ci[0]], [ci[1] - est]]
            ax.errorbar([0], [est], yerr=err, fmt="o", capsize=6,
                        label="estimate (95% CI)")
        else:
            ax.plot([0], [est], "o", label="estimate")
    if result.get("exact") is not None:
        ax.axhline(result["exact"]["value"], color="tab:red", ls="--",
                   label="exact")
    ax.set_xticks([])
    ax.set_ylabel("success probability")
    ax.set_title(result["attack"])
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def sweep_figure(rows, x_key: str, y_keys, path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.4))
    xs = [row[x_key] for row in rows]
    for y in y_keys:
        ax.plot(xs, [row.get(y) for row in rows], marker="o", label=y)
    ax.set_xlabel(x_key)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def audit_figure(value_bits: float, threshold_label: str, path, title: str) -> Path:
    fig, ax = plt.subplots(figsize=(4, 3))
    ax.bar([0], [value_bits], color="tab:green" if value_bits == 0 else "tab:red")
    ax.set_xticks([0])
    ax.set_xticklabels([threshold_label], fontsize=8)
    ax.set_ylabel("mutual information (bits)")
    ax.set_title(title)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
