import numpy as np
import pytest

from spongebc_figures import SchemaError, read_csv, render
from spongebc_figures.cli import main
from spongebc_figures.reader import COLUMNS


def _write(path, kind, rows):
    cols = COLUMNS[kind]
    lines = [f"# spongebc-csv schema=1 kind={kind}", ",".join(cols)]
    for row in rows:
        lines.append(",".join(str(row.get(c, "")) for c in cols))
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def _error_rows():
    rows = []
    for method in ("rm", "sdo"):
        for omega in (0.125, 0.5, 1.0):
            rows.append({"preset": "t", "method": method, "equation": "linear",
                         "n": 50, "omega_over_l": omega,
                         "requested_omega_over_l": omega, "sigma": 30.0,
                         "status": "ok", "e_abc": 1e-3 / (1 + omega),
                         "e_num": 5e-3, "runtime_s": 1.0})
    rows.append({"preset": "t", "method": "extrapolation", "equation": "linear",
                 "n": 50, "omega_over_l": 0.0, "requested_omega_over_l": 0.0,
                 "sigma": "", "status": "ok", "e_abc": 3e-2, "e_num": 5e-3,
                 "runtime_s": 1.0})
    rows.append({"preset": "t", "method": "sdo", "equation": "nonlinear",
                 "n": 50, "omega_over_l": 1.0, "requested_omega_over_l": 1.0,
                 "sigma": 30.0, "status": "diverged", "e_abc": "inf", "e_num": "",
                 "runtime_s": 1.0})
    return rows


class TestReader:
    def test_reads_valid(self, tmp_path):
        path = _write(tmp_path / "e.csv", "errors", _error_rows())
        kind, rows = read_csv(path)
        assert kind == "errors"
        assert rows[0]["e_abc"] == pytest.approx(1e-3 / 1.125)
        assert rows[-1]["e_abc"] == np.inf
        assert rows[-1]["e_num"] is None

    def test_rejects_empty(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(SchemaError):
            read_csv(str(path))

    def test_rejects_missing_tag(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(SchemaError):
            read_csv(str(path))

    def test_rejects_wrong_columns(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("# spongebc-csv schema=1 kind=entropy\nlabel,t\nfoo,1\n")
        with pytest.raises(SchemaError):
            read_csv(str(path))

    def test_rejects_wrong_kind(self, tmp_path):
        path = _write(tmp_path / "e.csv", "errors", _error_rows())
        with pytest.raises(SchemaError):
            read_csv(path, expected_kind="entropy")

    def test_rejects_no_data(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("# spongebc-csv schema=1 kind=entropy\nlabel,t,entropy\n")
        with pytest.raises(SchemaError):
            read_csv(str(path))

    def test_rejects_future_schema(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("# spongebc-csv schema=2 kind=entropy\nlabel,t,entropy\na,1,2\n")
        with pytest.raises(SchemaError):
            read_csv(str(path))


class TestRender:
    def test_error_curves(self, tmp_path):
        path = _write(tmp_path / "e.csv", "errors", _error_rows())
        out = tmp_path / "fig.png"
        render("error_curves", path, str(out))
        assert out.stat().st_size > 1000

    def test_error_curves_log_axes_and_baseline(self, tmp_path, monkeypatch):
        # inspect the axes the renderer produces
        import matplotlib.pyplot as plt
        from spongebc_figures.render import render_error_curves

        captured = {}
        orig_savefig = plt.Figure.savefig

        def capture(fig, *a, **k):
            captured["axes"] = fig.get_axes()
            return orig_savefig(fig, *a, **k)

        monkeypatch.setattr(plt.Figure, "savefig", capture)
        _, rows = read_csv(_write(tmp_path / "e.csv", "errors", _error_rows()))
        render_error_curves(rows, str(tmp_path / "fig.png"))
        ax = captured["axes"][0]
        assert ax.get_yscale() == "log" and ax.get_xscale() == "log"
        labels = [line.get_label() for line in ax.get_lines()]
        assert any("discretization error" in lab for lab in labels)

    def test_sigma_curves(self, tmp_path):
        rows = []
        for sigma in (1.0, 10.0):
            for omega in (0.25, 1.0):
                rows.append({"preset": "s", "method": "sdo", "equation": "nonlinear",
                             "n": 50, "omega_over_l": omega,
                             "requested_omega_over_l": omega, "sigma": sigma,
                             "status": "ok", "e_abc": 1e-3 * sigma / omega,
                             "e_num": "", "runtime_s": 0.1})
        path = _write(tmp_path / "s.csv", "errors", rows)
        out = tmp_path / "fig.png"
        render("sigma_curves", path, str(out))
        assert out.stat().st_size > 1000

    def test_reflection(self, tmp_path):
        rows = []
        for sigma in (1.0, 4.0, 16.0):
            rows.append({"method": "sdo", "equation": "linear", "n": 50,
                         "omega_over_l": 1.0, "sigma": sigma, "dx": 0.125,
                         "c_r_theory": np.exp(-sigma), "c_r_num": 0.5 * np.exp(-sigma)})
        for n in (10, 25):
            rows.append({"method": "rm", "equation": "linear", "n": n,
                         "omega_over_l": 1.0, "sigma": "", "dx": 2 * np.pi / n,
                         "c_r_theory": 10.0 ** -n, "c_r_num": 5.0 ** -n})
        path = _write(tmp_path / "r.csv", "reflection", rows)
        out = tmp_path / "fig.png"
        render("reflection", path, str(out))
        assert out.stat().st_size > 1000

    def test_entropy(self, tmp_path):
        rows = [{"label": lab, "t": t, "entropy": -26.4 + 0.01 * t * (lab == "slow-only")}
                for lab in ("slow-only", "slow-damp") for t in np.linspace(0, 10, 20)]
        path = _write(tmp_path / "en.csv", "entropy", rows)
        out = tmp_path / "fig.png"
        render("entropy", path, str(out))
        assert out.stat().st_size > 1000

    def test_snapshot(self, tmp_path):
        rows = []
        for t in (0.0, 1.0):
            for x in np.linspace(0.05, 4.0, 40):
                rows.append({"t": t, "x": x, "V": 1.0, "u": 0.4 * np.sin(x - t),
                             "E": 3.5, "p": 1.4})
        path = _write(tmp_path / "sn.csv", "snapshot", rows)
        out = tmp_path / "fig.png"
        render("snapshot", path, str(out))
        assert out.stat().st_size > 1000

    def test_unknown_kind(self, tmp_path):
        path = _write(tmp_path / "e.csv", "errors", _error_rows())
        with pytest.raises(SchemaError):
            render("pie_chart", path, str(tmp_path / "fig.png"))


class TestCli:
    def test_ok(self, tmp_path):
        path = _write(tmp_path / "e.csv", "errors", _error_rows())
        out = tmp_path / "fig.png"
        assert main(["--kind", "error_curves", "--in", path, "--out", str(out)]) == 0
        assert out.exists()

    def test_empty_csv_nonzero_exit(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        code = main(["--kind", "entropy", "--in", str(path), "--out",
                     str(tmp_path / "fig.png")])
        assert code == 2
