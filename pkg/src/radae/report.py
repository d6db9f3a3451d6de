"""Optional figure rendering from the CSV artifacts.

The CSVs remain the contract; these plots are a convenience layer written
next to them. A run directory yields collision, width and timing curves; a
compare directory yields per-variant overlays from comparison.csv.
"""
from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .errors import ConfigError


def _read_csv(path: Path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _run_figures(run_dir: Path) -> list[Path]:
    summary = _read_csv(run_dir / "summary.csv")
    episodes = _read_csv(run_dir / "episodes.csv")
    made = []

    ends = [int(r["window_end"]) for r in summary]
    if ends:
        m = ends[1] - ends[0] if len(ends) > 1 else ends[0]
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(ends, [float(r["pct"]) for r in summary], "o-", label="L_NW %")
        ax.plot(ends, [float(r["l_w"]) * 100.0 / m for r in summary],
                "s--", label="L_W %")
        ax.set_xlabel("episode")
        ax.set_ylabel("collisions per window (%)")
        ax.legend()
        made.append(_save(fig, run_dir / "collisions.png"))

        fig, ax = plt.subplots(figsize=(6, 4))
        for i in (1, 2, 3):
            ax.plot(ends, [float(r[f"mean_width_l{i}"]) for r in summary],
                    label=f"layer {i}")
        ax.set_xlabel("episode")
        ax.set_ylabel("mean width")
        ax.legend()
        made.append(_save(fig, run_dir / "widths.png"))

    fig, ax = plt.subplots(figsize=(6, 4))
    eps = [int(r["episode"]) for r in episodes]
    ax.plot(eps, [float(r["train_time_s"]) for r in episodes],
            label="train (model s)", lw=0.8)
    ax.plot(eps, [float(r["predict_time_s"]) for r in episodes],
            label="predict (model s)", lw=0.8)
    ax.set_xlabel("episode")
    ax.set_ylabel("deterministic cost (s)")
    ax.set_yscale("log")
    ax.legend()
    made.append(_save(fig, run_dir / "times.png"))
    return made


def _compare_figure(cmp_dir: Path) -> list[Path]:
    rows = _read_csv(cmp_dir / "comparison.csv")
    series = defaultdict(lambda: defaultdict(list))
    for r in rows:
        key = f"{r['config']}/{r['variant']}"
        series[key][int(r["window_end"])].append(float(r["pct"]))
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for key, per_end in sorted(series.items()):
        ends = sorted(per_end)
        means = [sum(per_end[e]) / len(per_end[e]) for e in ends]
        ax.plot(ends, means, "o-", label=f"{key} (mean of {len(per_end[ends[0]])} seeds)")
    ax.set_xlabel("episode")
    ax.set_ylabel("collisions per window (%)")
    ax.legend()
    return [_save(fig, cmp_dir / "comparison.png")]


def render_report(target: Path) -> list[Path]:
    """Figures for a run directory or a compare directory; returns paths."""
    if (target / "comparison.csv").is_file():
        return _compare_figure(target)
    if (target / "summary.csv").is_file():
        return _run_figures(target)
    raise ConfigError(f"{target}: no summary.csv or comparison.csv to plot")
