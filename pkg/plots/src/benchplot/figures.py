"""Figure rendering: optimality curves, correlation histograms, acceptance boxes.

Output is deterministic for identical inputs: a fixed SVG hash salt, no date
metadata, and group iteration in sorted order.  Input CSVs are never written.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schema import ACCEPT_COLUMNS, CURVES_COLUMNS, HIST_COLUMNS, SchemaError, read_rows

plt.rcParams["svg.hashsalt"] = "benchplot"

_KINDS = ("curves", "histogram", "acceptance")


@dataclass
class FigureSpec:
    """One figure: input CSVs, kind, grouping keys, output path, labels."""

    inputs: list[str]
    kind: str
    out: str
    group_keys: list[str] = field(default_factory=list)
    xlabel: str | None = None
    ylabel: str | None = None
    raster: bool = False
    beta_window: tuple[float, float] = (1.0, 8.0)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")


def _save(fig, spec: FigureSpec) -> None:
    if spec.raster:
        fig.savefig(spec.out, format="png", dpi=150)
    else:
        fig.savefig(spec.out, format="svg", metadata={"Date": None})
    plt.close(fig)


def _group_label(row: dict, keys: list[str]) -> str:
    return " ".join(str(row[k]) for k in keys if str(row[k]) not in ("-", ""))


def plot_curves(spec: FigureSpec) -> str:
    """Percent-optimal vs iteration budget, one line per group, +/-1 std band."""
    keys = spec.group_keys or ["method", "source", "param"]
    rows = read_rows(spec.inputs, CURVES_COLUMNS)
    for key in keys:
        if key not in rows[0]:
            raise SchemaError(f"grouping column '{key}' not present")
    groups: dict[str, list[dict]] = {}
    for row in rows:
        groups.setdefault(_group_label(row, keys) or "all", []).append(row)

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label in sorted(groups):
        pts = sorted(groups[label], key=lambda r: r["budget_m"])
        x = np.array([p["budget_m"] for p in pts])
        y = np.array([p["pct_optimal"] for p in pts])
        s = np.array([p["pct_std"] for p in pts])
        if len(pts) == 1:
            ax.plot(x, y, "o", label=label)
        else:
            ax.plot(x, y, "-o", markersize=3.5, label=label)
            ax.fill_between(x, y - s, y + s, alpha=0.25, linewidth=0)
    ax.set_xscale("log")
    ax.set_xlabel(spec.xlabel or "iterations (multiples of n)")
    ax.set_ylabel(spec.ylabel or "optimal solutions found [%]")
    ax.set_ylim(bottom=0)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    _save(fig, spec)
    return spec.out


def plot_histogram(spec: FigureSpec) -> str:
    """Binned correlation values, one bar group per parameter value."""
    keys = spec.group_keys or ["source", "param"]
    rows = read_rows(spec.inputs, HIST_COLUMNS)
    for key in keys:
        if key not in rows[0]:
            raise SchemaError(f"grouping column '{key}' not present")
    groups: dict[str, list[dict]] = {}
    for row in rows:
        groups.setdefault(_group_label(row, keys) or "all", []).append(row)

    labels = sorted(groups)
    n_bins = {label: len(groups[label]) for label in labels}
    if len(set(n_bins.values())) > 1:
        raise SchemaError(f"mismatched bin counts between groups: {n_bins}")

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    width_scale = 1.0 / (len(labels) + 0.5)
    for gi, label in enumerate(labels):
        pts = sorted(groups[label], key=lambda r: r["bin_lo"])
        lo = np.array([p["bin_lo"] for p in pts])
        hi = np.array([p["bin_hi"] for p in pts])
        counts = np.array([p["count"] for p in pts])
        width = (hi - lo) * width_scale
        ax.bar(lo + (gi + 0.5) * width, counts, width=width, label=label, align="center")
    ax.set_xlabel(spec.xlabel or "correlation value")
    ax.set_ylabel(spec.ylabel or "edge count")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3, axis="y")
    _save(fig, spec)
    return spec.out


def plot_acceptance(spec: FigureSpec) -> str:
    """Box summaries of per-run acceptance rates inside the beta window."""
    keys = spec.group_keys or ["source", "param"]
    rows = read_rows(spec.inputs, ACCEPT_COLUMNS)
    for key in keys:
        if key not in rows[0]:
            raise SchemaError(f"grouping column '{key}' not present")
    lo, hi = spec.beta_window
    per_run: dict[tuple[str, str, str], list[float]] = {}
    for row in rows:
        if not lo <= row["beta"] <= hi:
            continue
        if row["accepted"] not in (0.0, 1.0):
            raise SchemaError(
                f"column 'accepted' must be 0/1, found {row['accepted']!r}"
            )
        run_key = (_group_label(row, keys) or "all", row["graph_id"], row["rep"])
        per_run.setdefault(run_key, []).append(row["accepted"])
    if not per_run:
        raise SchemaError("no acceptance events inside the beta window")

    groups: dict[str, list[float]] = {}
    for (label, _gid, _rep), events in per_run.items():
        groups.setdefault(label, []).append(float(np.mean(events)))

    labels = sorted(groups)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.boxplot(
        [groups[label] for label in labels],
        tick_labels=labels,
        showfliers=True,
        whis=(5, 95),
    )
    ax.set_xlabel(spec.xlabel or "correlation source")
    ax.set_ylabel(spec.ylabel or f"acceptance rate, beta in [{lo:g}, {hi:g}]")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(alpha=0.3, axis="y")
    _save(fig, spec)
    return spec.out


RENDERERS = {
    "curves": plot_curves,
    "histogram": plot_histogram,
    "acceptance": plot_acceptance,
}


def render(spec: FigureSpec) -> str:
    return RENDERERS[spec.kind](spec)
