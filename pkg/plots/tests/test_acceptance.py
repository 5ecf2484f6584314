"""Renders the standard figures from real simulator CSVs (external interface).

Data comes from the ``lambda-sim figures`` command invoked as a subprocess;
this package consumes only the documented panel-CSV schema.
"""

import subprocess
import sys

import pytest

from lambda_sim_plots import FIGURE_PRESETS, render_figure

EXPECTED_LABELS = ("r=0.1", "r=0.2", "r=0.5", "r=0.8")


@pytest.fixture(scope="module")
def csv_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("panel-csvs")
    for fig in ("fig2", "fig5", "fig6", "fig9"):
        cmd = [sys.executable, "-m", "lambda_sim.cli", "figures",
               "--which", fig, "--out-dir", str(out), "--points", "201"]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
    return out


@pytest.mark.parametrize("fig,panels", [("fig2", 4), ("fig6", 4)])
def test_criterion_10_fidelity_layouts(csv_dir, tmp_path, fig, panels):
    result = render_figure(FIGURE_PRESETS[fig], csv_dir, tmp_path / f"{fig}.png")
    assert (tmp_path / f"{fig}.png").stat().st_size > 0
    assert result.n_panels == panels
    assert result.legend_labels == EXPECTED_LABELS


@pytest.mark.parametrize("fig", ["fig5", "fig9"])
def test_criterion_10_population_layouts(csv_dir, tmp_path, fig):
    result = render_figure(FIGURE_PRESETS[fig], csv_dir, tmp_path / f"{fig}.png")
    assert (tmp_path / f"{fig}.png").stat().st_size > 0
    assert result.n_panels == 6
    assert set(result.legend_labels) == set(EXPECTED_LABELS)
