"""Rendering smoke tests on synthetic schema-conforming panel CSVs."""

import numpy as np
import pytest

from lambda_sim_plots import FIGURE_PRESETS, RenderError, render_figure
from lambda_sim_plots.cli import main
from lambda_sim_plots.render import read_panel_csv, split_curve_name

RS = ("0.1", "0.2", "0.5", "0.8")
GAMMAS = {"a": "0", "b": "0.1", "c": "0.5", "d": "1"}


def write_panel(path, fig_id, letter, kind, n=40):
    t = np.linspace(0.0, 20.0, n)
    lines = [
        "# lambda-sim 0.1.0",
        f"# figure = {fig_id}",
        f"# panel = {letter}",
        f"# gamma = {GAMMAS[letter]}",
    ]
    if kind == "fidelity":
        names = [f"F[r={r}]" for r in RS]
        cols = [np.exp(-float(r) * t) for r in RS]
    else:
        names, cols = [], []
        for r in RS:
            for pop in ("pa", "pb", "pc"):
                names.append(f"{pop}[r={r}]")
                cols.append(np.full_like(t, 1.0 / 3.0))
    lines.append("t," + ",".join(names))
    for i, tv in enumerate(t):
        lines.append(f"{tv:.6g}," + ",".join(f"{c[i]:.6g}" for c in cols))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


@pytest.fixture
def fidelity_dir(tmp_path):
    for letter in "abcd":
        write_panel(tmp_path / f"fig2_panel_{letter}.csv", "fig2", letter, "fidelity")
    return tmp_path


@pytest.fixture
def population_dir(tmp_path):
    for letter in "ab":
        write_panel(tmp_path / f"fig5_panel_{letter}.csv", "fig5", letter, "populations")
    return tmp_path


class TestCurveNames:
    def test_split(self):
        assert split_curve_name("F[r=0.1]") == ("F", "r=0.1")
        assert split_curve_name("pa[r=0.8]") == ("pa", "r=0.8")

    def test_malformed_rejected(self):
        with pytest.raises(RenderError):
            split_curve_name("F(r=0.1)")


class TestReadPanelCsv:
    def test_metadata_and_columns(self, fidelity_dir):
        panel = read_panel_csv(fidelity_dir / "fig2_panel_a.csv")
        assert panel.metadata["gamma"] == "0"
        assert list(panel.columns) == [f"F[r={r}]" for r in RS]
        assert panel.times.size == 40

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_panel_csv(tmp_path / "nope.csv")

    def test_empty_rejected(self, tmp_path):
        bad = tmp_path / "fig2_panel_a.csv"
        bad.write_text("# only metadata\n", encoding="utf-8")
        with pytest.raises(RenderError):
            read_panel_csv(bad)


class TestRenderFidelity:
    def test_four_panels_and_labels(self, fidelity_dir, tmp_path):
        out = tmp_path / "fig2.png"
        result = render_figure(FIGURE_PRESETS["fig2"], fidelity_dir, out)
        assert out.exists() and out.stat().st_size > 0
        assert result.n_panels == 4
        assert result.legend_labels == tuple(f"r={r}" for r in RS)

    def test_byte_deterministic(self, fidelity_dir, tmp_path):
        out1, out2 = tmp_path / "one.png", tmp_path / "two.png"
        render_figure(FIGURE_PRESETS["fig2"], fidelity_dir, out1)
        render_figure(FIGURE_PRESETS["fig2"], fidelity_dir, out2)
        assert out1.read_bytes() == out2.read_bytes()

    def test_missing_panel_file_fails(self, fidelity_dir, tmp_path):
        (fidelity_dir / "fig2_panel_d.csv").unlink()
        with pytest.raises(FileNotFoundError):
            render_figure(FIGURE_PRESETS["fig2"], fidelity_dir, tmp_path / "x.png")

    def test_wrong_columns_fail(self, population_dir, tmp_path):
        # population columns offered to a fidelity preset: descriptive error
        for letter in "ab":
            src = population_dir / f"fig5_panel_{letter}.csv"
            (population_dir / f"fig6_panel_{letter}.csv").write_bytes(src.read_bytes())
        for letter in "cd":
            write_panel(population_dir / f"fig6_panel_{letter}.csv", "fig6", letter,
                        "populations")
        with pytest.raises(RenderError, match="fidelity"):
            render_figure(FIGURE_PRESETS["fig6"], population_dir, tmp_path / "x.png")


class TestRenderPopulations:
    def test_three_by_two_layout(self, population_dir, tmp_path):
        out = tmp_path / "fig5.png"
        result = render_figure(FIGURE_PRESETS["fig5"], population_dir, out)
        assert out.exists()
        assert result.n_panels == 6
        assert set(result.legend_labels) == {f"r={r}" for r in RS}


class TestCli:
    def test_render_roundtrip(self, fidelity_dir, tmp_path, capsys):
        out = tmp_path / "fig2.png"
        rc = main(["render", "--figure", "fig2", "--csv-dir", str(fidelity_dir),
                   "--out", str(out)])
        assert rc == 0
        assert out.exists()
        assert "4 panels" in capsys.readouterr().out

    def test_empty_csv_gives_nonzero_exit(self, tmp_path, capsys):
        for letter in "abcd":
            (tmp_path / f"fig2_panel_{letter}.csv").write_text("", encoding="utf-8")
        rc = main(["render", "--figure", "fig2", "--csv-dir", str(tmp_path),
                   "--out", str(tmp_path / "x.png")])
        assert rc == 1
        assert "no data rows" in capsys.readouterr().err

    def test_unknown_figure_is_usage_error(self):
        with pytest.raises(SystemExit) as err:
            main(["render", "--figure", "fig77", "--csv-dir", ".", "--out", "x.png"])
        assert err.value.code == 2
