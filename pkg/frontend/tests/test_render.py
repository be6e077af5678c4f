"""Rendering from frontier CSVs: series selection, ordering, errors,
reproducible plotted data."""
import os
from pathlib import Path

import pytest

from plotviz import PlotDataError, PlotSpec, read_frontier, render

HEADER = "scheme,arch,csi_alpha,weight_idx,u1,u2,R1,R2,wsr,n_runs"


def _series_rows(scheme, arch, pts, csi="1"):
    """Sweep rows plus the two corner rows for one (scheme, arch)."""
    rows = []
    for widx, (r1, r2) in enumerate(pts):
        rows.append(
            f"{scheme},{arch},{csi},{widx},0.5,0.5,{r1},{r2},{(r1 + r2) / 2},1"
        )
    r1max = max(p[0] for p in pts) * 1.05
    r2max = max(p[1] for p in pts) * 1.05
    rows.append(f"{scheme},{arch},{csi},-1,1,0,{r1max},0,{r1max},1")
    rows.append(f"{scheme},{arch},{csi},-2,0,1,0,{r2max},{r2max},1")
    return rows


def _write_csv(path: Path, series):
    lines = [HEADER]
    for scheme, arch, pts in series:
        lines.extend(_series_rows(scheme, arch, pts))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


TRI = [(3.0, 1.0), (2.5, 2.5), (1.0, 3.0)]
FULL = [
    ("rs1", "single", [(3.2, 1.1), (2.7, 2.7), (1.1, 3.2)]),
    ("rs1", "none", [(2.2, 0.8), (1.8, 1.8), (0.8, 2.2)]),
    ("sdma", "single", [(3.0, 1.0), (2.4, 2.4), (1.0, 3.0)]),
    ("sdma", "none", [(2.0, 0.7), (1.6, 1.6), (0.7, 2.0)]),
    ("noma", "single", [(2.8, 0.9), (2.0, 2.0), (0.9, 2.8)]),
    ("noma", "none", [(1.9, 0.6), (1.4, 1.4), (0.6, 1.9)]),
]


def test_read_frontier_groups_series(tmp_path):
    path = _write_csv(tmp_path / "a.csv", FULL)
    groups = read_frontier(path)
    assert len(groups) == 6
    assert len(groups[("rs1", "single")]) == 5  # 3 sweep + 2 corners


def test_single_series_renders_file(tmp_path):
    a = _write_csv(tmp_path / "a.csv", [("rs1", "single", TRI)])
    b = _write_csv(tmp_path / "b.csv", [("rs1", "single", TRI)])
    out = tmp_path / "fig.png"
    plotted = render(PlotSpec(panel_a=a, panel_b=b, out_path=str(out)))
    assert out.exists() and out.stat().st_size > 0
    assert len(plotted["a"]) == 1
    xs, ys = plotted["a"]["RSMA (RIS)"]
    # corner -1 first (R2 = 0), sweep in weight order, corner -2 last
    assert ys[0] == 0.0 and xs[-1] == 0.0
    assert xs[1:-1] == [3.0, 2.5, 1.0]


def test_full_dataset_six_series_per_panel(tmp_path):
    a = _write_csv(tmp_path / "a.csv", FULL)
    b = _write_csv(tmp_path / "b.csv", FULL)
    out = tmp_path / "fig.pdf"
    plotted = render(PlotSpec(panel_a=a, panel_b=b, out_path=str(out)))
    assert len(plotted["a"]) == 6
    assert len(plotted["b"]) == 6
    assert out.exists() and out.stat().st_size > 0
    labels = set(plotted["a"])
    assert "RSMA (RIS)" in labels and "SDMA (no RIS)" in labels


def test_empty_series_selection_errors_and_writes_nothing(tmp_path):
    a = _write_csv(tmp_path / "a.csv", [("rs1", "single", TRI)])
    out = tmp_path / "fig.png"
    with pytest.raises(PlotDataError):
        render(PlotSpec(panel_a=a, panel_b=a, out_path=str(out), series=[]))
    assert not out.exists()


def test_missing_series_error_lists_available(tmp_path):
    a = _write_csv(tmp_path / "a.csv", [("rs1", "single", TRI)])
    out = tmp_path / "fig.png"
    with pytest.raises(PlotDataError) as err:
        render(PlotSpec(
            panel_a=a, panel_b=a, out_path=str(out),
            series=[("hrs", "fully")],
        ))
    assert "rs1" in str(err.value)  # the available series are listed
    assert not out.exists()


def test_bad_header_rejected(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n", encoding="utf-8")
    with pytest.raises(PlotDataError):
        read_frontier(str(bad))


def test_identical_inputs_identical_plotted_data(tmp_path):
    a = _write_csv(tmp_path / "a.csv", FULL)
    b = _write_csv(tmp_path / "b.csv", FULL)
    out1, out2 = tmp_path / "f1.png", tmp_path / "f2.png"
    p1 = render(PlotSpec(panel_a=a, panel_b=b, out_path=str(out1)))
    p2 = render(PlotSpec(panel_a=a, panel_b=b, out_path=str(out2)))
    assert p1 == p2


def test_style_override_applies(tmp_path):
    a = _write_csv(tmp_path / "a.csv", [("rs1", "single", TRI)])
    out = tmp_path / "fig.svg"
    plotted = render(PlotSpec(
        panel_a=a, panel_b=a, out_path=str(out),
        styles={("rs1", "single"): {"color": "black"}},
    ))
    assert out.exists()
    assert len(plotted["b"]) == 1
