"""Secondary acceptance: render every figure kind from real sweep artifacts.

The CSVs are produced by the solver CLI (scaled-down sweeps), consumed here
purely through the published artifact format.
"""

import subprocess
import sys

import numpy as np
import pytest

from spongebc_figures.cli import main
from spongebc_figures.reader import read_csv

T_SHORT = str(16 * np.pi)


def _cli(*args):
    proc = subprocess.run([sys.executable, "-m", "spongebc.cli", *args],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="module")
def artifacts(tmp_path_factory):
    out = tmp_path_factory.mktemp("artifacts")
    cache = str(out / "cache")
    _cli("sweep", "--preset", "table3", "--out", str(out), "--n", "10",
         "--omega-over-l", "1.0", "--equation", "linear", "--t-final", T_SHORT,
         "--fine-n", "40", "--threads", "2", "--cache-dir", cache)
    _cli("sweep", "--preset", "fig_sdo_sigma", "--out", str(out), "--n", "10",
         "--omega-over-l", "1.0", "--equation", "nonlinear", "--t-final", T_SHORT,
         "--sigma", "0.5", "--sigma", "2.0", "--threads", "2", "--cache-dir", cache)
    _cli("sweep", "--preset", "fig_reflection", "--out", str(out), "--n", "6",
         "--sigma", "2.0", "--threads", "2", "--cache-dir", cache)
    _cli("sweep", "--preset", "fig_entropy", "--out", str(out), "--n", "10",
         "--omega-over-l", "1.0", "--sigma", "2.0", "--t-final", T_SHORT,
         "--cache-dir", cache)
    config = out / "run.cfg"
    config.write_text(
        f"equation = nonlinear\nn = 10\nmethod = rm\nomega_over_l = 1\n"
        f"t_final = {4 * np.pi}\noutput_dt = {np.pi}\n"
    )
    _cli("run", "--config", str(config), "--out", str(out), "--snapshots",
         "--cache-dir", cache)
    return out


def test_all_five_figure_kinds_render(artifacts):
    jobs = [
        ("error_curves", "table3.csv"),
        ("sigma_curves", "fig_sdo_sigma.csv"),
        ("reflection", "fig_reflection.csv"),
        ("entropy", "fig_entropy.csv"),
        ("snapshot", "snapshot.csv"),
    ]
    for kind, csv_name in jobs:
        out_png = artifacts / f"{kind}.png"
        code = main(["--kind", kind, "--in", str(artifacts / csv_name),
                     "--out", str(out_png)])
        assert code == 0, (kind, csv_name)
        assert out_png.stat().st_size > 1000, kind
        print(f"ACCEPTANCE figures-{kind}: PASS")


def test_error_curves_log_scale_with_discretization_baseline(artifacts, monkeypatch):
    import matplotlib.pyplot as plt
    from spongebc_figures.render import render_error_curves

    captured = {}
    orig = plt.Figure.savefig

    def capture(fig, *a, **k):
        captured["axes"] = fig.get_axes()
        return orig(fig, *a, **k)

    monkeypatch.setattr(plt.Figure, "savefig", capture)
    _, rows = read_csv(str(artifacts / "table3.csv"), expected_kind="errors")
    assert any(r["e_num"] is not None for r in rows), "sweep must carry e_num"
    render_error_curves(rows, str(artifacts / "check.png"))
    ax = captured["axes"][0]
    assert ax.get_yscale() == "log"
    labels = [line.get_label() for line in ax.get_lines()]
    assert any("discretization error" in lab for lab in labels)
    print("ACCEPTANCE figures-log-baseline: PASS")
