"""CLI behavior and exit codes."""
from pathlib import Path

from plotviz.cli import main

HEADER = "scheme,arch,csi_alpha,weight_idx,u1,u2,R1,R2,wsr,n_runs"


def _csv(path: Path, scheme="rs1", arch="single"):
    rows = [HEADER]
    for widx, (r1, r2) in enumerate([(3.0, 1.0), (2.0, 2.0), (1.0, 3.0)]):
        rows.append(f"{scheme},{arch},1,{widx},0.5,0.5,{r1},{r2},{(r1+r2)/2},1")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return str(path)


def test_plot_roundtrip(tmp_path):
    a = _csv(tmp_path / "a.csv")
    b = _csv(tmp_path / "b.csv")
    out = tmp_path / "fig.png"
    assert main(["plot", "--panel-a", a, "--panel-b", b, "--out", str(out)]) == 0
    assert out.exists() and out.stat().st_size > 0


def test_plot_with_series_filter(tmp_path):
    a = _csv(tmp_path / "a.csv")
    b = _csv(tmp_path / "b.csv")
    out = tmp_path / "fig.png"
    code = main([
        "plot", "--panel-a", a, "--panel-b", b, "--out", str(out),
        "--series", "rs1:single",
    ])
    assert code == 0


def test_missing_series_exit_code(tmp_path):
    a = _csv(tmp_path / "a.csv")
    out = tmp_path / "fig.png"
    code = main([
        "plot", "--panel-a", a, "--panel-b", a, "--out", str(out),
        "--series", "sdma:none",
    ])
    assert code == 1
    assert not out.exists()


def test_malformed_series_token(tmp_path):
    a = _csv(tmp_path / "a.csv")
    code = main([
        "plot", "--panel-a", a, "--panel-b", a,
        "--out", str(tmp_path / "f.png"), "--series", "justscheme",
    ])
    assert code == 1


def test_missing_input_file(tmp_path):
    code = main([
        "plot", "--panel-a", str(tmp_path / "nope.csv"),
        "--panel-b", str(tmp_path / "nope.csv"),
        "--out", str(tmp_path / "f.png"),
    ])
    assert code == 1
