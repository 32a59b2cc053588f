"""Figure rendering with verifiable sidecar JSON.

Every rendered figure writes ``<out>.json`` holding the exact plotted series
(labels, x, y as parsed from the input CSVs).  Figures are checked by
comparing sidecars instead of diffing pixels.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .reader import RESULTS_COLUMNS, TAIL_COLUMNS, SchemaError, column, read_rows

KINDS = ("avg-complexity", "tail", "error-rate", "comparison")


@dataclass
class FigureSpec:
    inputs: list[str]
    kind: str
    output: str
    labels: list[str] = field(default_factory=list)
    log_x: bool = False
    log_y: bool = True
    complexity_floor: float | None = None  # 2MT line on complexity panels

    def label_for(self, index: int) -> str:
        if index < len(self.labels):
            return self.labels[index]
        return os.path.splitext(os.path.basename(self.inputs[index]))[0]


def _series_results(spec: FigureSpec, y_column: str) -> list[dict]:
    series = []
    for i, path in enumerate(spec.inputs):
        rows = read_rows(path, RESULTS_COLUMNS)
        series.append({"label": spec.label_for(i),
                       "x": column(rows, "snr_db"),
                       "y": column(rows, y_column)})
    return series


def _series_tail(spec: FigureSpec) -> list[dict]:
    series = []
    for i, path in enumerate(spec.inputs):
        rows = read_rows(path, TAIL_COLUMNS)
        by_snr: dict[float, list[tuple[float, float]]] = {}
        for r in rows:
            by_snr.setdefault(float(r["snr_db"]), []).append(
                (float(r["L"]), float(r["prob"])))
        for snr in sorted(by_snr):
            pts = by_snr[snr]
            series.append({"label": f"{spec.label_for(i)} {snr:g} dB",
                           "x": [p[0] for p in pts],
                           "y": [p[1] for p in pts]})
    return series


def _draw(ax, series, log_x, log_y, x_label, y_label, floor=None):
    for s in series:
        ax.plot(s["x"], s["y"], marker="o", markersize=3, label=s["label"])
    if floor is not None:
        ax.axhline(floor, linestyle="--", color="gray", linewidth=1)
        ax.annotate(f"2MT = {floor:g}", xy=(0.02, floor), xycoords=("axes fraction", "data"),
                    fontsize=8, color="gray", va="bottom")
    if log_x:
        ax.set_xscale("log")
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)


def render(spec: FigureSpec) -> str:
    """Render one figure plus its sidecar JSON; returns the image path."""
    if spec.kind not in KINDS:
        raise ValueError(f"unknown figure kind {spec.kind!r}")
    if not spec.inputs:
        raise SchemaError("no input CSVs given")

    if spec.kind == "avg-complexity":
        series = _series_results(spec, "avg_C")
        fig, ax = plt.subplots(figsize=(6.4, 4.4))
        _draw(ax, series, spec.log_x, spec.log_y, "SNR (dB)",
              "average complexity (nodes)", floor=spec.complexity_floor)
    elif spec.kind == "error-rate":
        series = _series_results(spec, "err_rate")
        fig, ax = plt.subplots(figsize=(6.4, 4.4))
        _draw(ax, series, spec.log_x, spec.log_y, "SNR (dB)", "error rate")
    elif spec.kind == "tail":
        series = _series_tail(spec)
        fig, ax = plt.subplots(figsize=(6.4, 4.4))
        _draw(ax, series, True, True, "L (nodes)", "Pr(C >= L)")
    else:  # comparison: error-rate panel plus average-complexity panel
        err = _series_results(spec, "err_rate")
        cpx = _series_results(spec, "avg_C")
        fig, (ax_a, ax_b) = plt.subplots(1, 2, figsize=(11.0, 4.4))
        _draw(ax_a, err, spec.log_x, True, "SNR (dB)", "error rate")
        _draw(ax_b, cpx, spec.log_x, True, "SNR (dB)",
              "average complexity (nodes)", floor=spec.complexity_floor)
        series = [dict(s, panel="error-rate") for s in err] + \
                 [dict(s, panel="avg-complexity") for s in cpx]

    fig.tight_layout()
    fig.savefig(spec.output, dpi=130)
    plt.close(fig)

    sidecar = {
        "kind": spec.kind,
        "inputs": list(spec.inputs),
        "log_x": spec.log_x,
        "log_y": spec.log_y,
        "complexity_floor": spec.complexity_floor,
        "series": series,
    }
    with open(sidecar_path(spec.output), "w") as fh:
        fh.write(json.dumps(sidecar, sort_keys=True, separators=(",", ":")))
    return spec.output


def sidecar_path(output: str) -> str:
    return output + ".json"
