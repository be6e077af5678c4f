"""Two-panel achievable-rate-region figure from frontier CSVs.

Input files follow the simulator's summarize schema:

    scheme,arch,csi_alpha,weight_idx,u1,u2,R1,R2,wsr,n_runs

One series per (scheme, arch) pair; points are connected in weight order
with the two single-user corner rows (weight_idx -1 and -2) anchoring the
ends of the line.  No smoothing or hull interpolation is applied: the lines
show the achieved points.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

CSV_COLUMNS = (
    "scheme", "arch", "csi_alpha", "weight_idx",
    "u1", "u2", "R1", "R2", "wsr", "n_runs",
)

SeriesKey = Tuple[str, str]   # (scheme, arch)
SeriesData = Dict[str, Tuple[List[float], List[float]]]


class PlotDataError(ValueError):
    """Raised for malformed CSVs or series selections."""


@dataclass
class PlotSpec:
    """What to draw: one CSV per panel, which series, where to write."""

    panel_a: str
    panel_b: str
    out_path: str
    series: Optional[Sequence[SeriesKey]] = None   # None = all in the CSV
    panel_titles: Tuple[str, str] = ("Perfect CSI", "Imperfect CSI")
    xlabel: str = "R1 (bit/s/Hz)"
    ylabel: str = "R2 (bit/s/Hz)"
    styles: Dict[SeriesKey, dict] = field(default_factory=dict)


def read_frontier(path: str) -> Dict[SeriesKey, List[dict]]:
    """Parse a frontier CSV into rows grouped by (scheme, arch)."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(header) != CSV_COLUMNS:
                raise PlotDataError(
                    f"{path}: unexpected header {header}; "
                    f"expected {list(CSV_COLUMNS)}"
                )
            groups: Dict[SeriesKey, List[dict]] = {}
            for line_no, row in enumerate(reader, start=2):
                if len(row) != len(CSV_COLUMNS):
                    raise PlotDataError(
                        f"{path}:{line_no}: expected {len(CSV_COLUMNS)} fields"
                    )
                entry = dict(zip(CSV_COLUMNS, row))
                key = (entry["scheme"], entry["arch"])
                groups.setdefault(key, []).append(entry)
            return groups
    except OSError as exc:
        raise PlotDataError(f"cannot read {path!r}: {exc}") from exc


def _order_points(rows: List[dict]) -> Tuple[List[float], List[float]]:
    """Corner -1 (R2 = 0 end), the sweep in weight order, corner -2."""
    def rank(entry: dict) -> Tuple[int, int]:
        w = int(entry["weight_idx"])
        if w == -1:
            return (0, 0)
        if w == -2:
            return (2, 0)
        return (1, w)

    ordered = sorted(rows, key=rank)
    xs = [float(e["R1"]) for e in ordered]
    ys = [float(e["R2"]) for e in ordered]
    return xs, ys


def series_label(key: SeriesKey) -> str:
    scheme, arch = key
    names = {"rs1": "RSMA", "hrs": "HRS", "sdma": "SDMA", "noma": "NOMA"}
    ris = "no RIS" if arch == "none" else "RIS"
    return f"{names.get(scheme, scheme.upper())} ({ris})"


def _panel_series(
    path: str, wanted: Optional[Sequence[SeriesKey]]
) -> Dict[SeriesKey, Tuple[List[float], List[float]]]:
    groups = read_frontier(path)
    if wanted is None:
        keys = sorted(groups.keys())
    else:
        keys = [tuple(k) for k in wanted]
        missing = [k for k in keys if k not in groups]
        if missing:
            raise PlotDataError(
                f"{path}: series {missing} not present; "
                f"available: {sorted(groups.keys())}"
            )
    if not keys:
        raise PlotDataError(f"{path}: no series selected")
    return {k: _order_points(groups[k]) for k in keys}


_DEFAULT_CYCLE = [
    dict(color="tab:blue", marker="o"),
    dict(color="tab:orange", marker="s"),
    dict(color="tab:green", marker="^"),
    dict(color="tab:red", marker="v"),
    dict(color="tab:purple", marker="d"),
    dict(color="tab:brown", marker="x"),
]


def render(spec: PlotSpec) -> Dict[str, SeriesData]:
    """Draw the two panels and write the image (format by file extension).

    Returns the plotted point arrays per panel and series label, so callers
    can verify exactly what was drawn.
    """
    panels = {
        "a": _panel_series(spec.panel_a, spec.series),
        "b": _panel_series(spec.panel_b, spec.series),
    }

    fig, axes = plt.subplots(1, 2, figsize=(10.0, 4.2), sharey=False)
    plotted: Dict[str, SeriesData] = {"a": {}, "b": {}}
    for ax, panel, title in zip(axes, ("a", "b"), spec.panel_titles):
        for idx, (key, (xs, ys)) in enumerate(sorted(panels[panel].items())):
            style = dict(_DEFAULT_CYCLE[idx % len(_DEFAULT_CYCLE)])
            style.update(spec.styles.get(key, {}))
            style.setdefault("markersize", 3.5)
            style.setdefault("linewidth", 1.4)
            label = series_label(key)
            ax.plot(xs, ys, label=label, **style)
            plotted[panel][label] = (xs, ys)
        ax.set_title(f"({panel}) {title}")
        ax.set_xlabel(spec.xlabel)
        ax.set_ylabel(spec.ylabel)
        ax.grid(True, alpha=0.3)
        ax.set_xlim(left=0.0)
        ax.set_ylim(bottom=0.0)
        ax.legend(fontsize=8)
    fig.tight_layout()

    out = Path(spec.out_path)
    if out.parent and not out.parent.exists():
        raise PlotDataError(f"output directory {out.parent} does not exist")
    fig.savefig(out)
    plt.close(fig)
    return plotted
