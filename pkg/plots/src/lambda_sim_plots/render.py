"""Render panel CSVs into deterministic multi-panel PNG figures.

The CSVs are read-only inputs with '#'-metadata lines, a header row and
numeric rows; curve count and legend labels come from the header names
(``F[r=0.1]`` or ``pa[r=0.1]``), never from hard-coded physics.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .presets import POPULATION_LABELS, TIME_LABEL, FigurePreset

_FIGSIZE = {"fidelity": (9.0, 7.0), "populations": (9.0, 9.5)}
_DPI = 130


class RenderError(RuntimeError):
    """Schema mismatch, empty data or missing columns in a panel CSV."""


@dataclass(frozen=True)
class RenderResult:
    figure_id: str
    out_path: str
    n_panels: int
    legend_labels: tuple[str, ...]


@dataclass(frozen=True)
class PanelData:
    path: str
    metadata: dict
    times: np.ndarray
    columns: dict  # header name -> values


def read_panel_csv(path) -> PanelData:
    if not os.path.exists(path):
        raise FileNotFoundError(f"panel CSV not found: {path}")
    metadata = {}
    header = None
    rows = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    metadata[key.strip()] = value.strip()
                continue
            if header is None:
                header = [cell.strip() for cell in line.split(",")]
                continue
            rows.append([float(cell) for cell in line.split(",")])
    if header is None or not rows:
        raise RenderError(f"{path}: no data rows")
    if header[0] != "t":
        raise RenderError(f"{path}: first column must be 't', found {header[0]!r}")
    data = np.asarray(rows, dtype=float)
    if data.shape[1] != len(header):
        raise RenderError(f"{path}: row width does not match the header")
    columns = {name: data[:, i] for i, name in enumerate(header[1:], start=1)}
    return PanelData(path=str(path), metadata=metadata, times=data[:, 0], columns=columns)


def split_curve_name(name: str) -> tuple[str, str]:
    """'pa[r=0.1]' -> ('pa', 'r=0.1'); 'F[r=0.5]' -> ('F', 'r=0.5')."""
    if "[" not in name or not name.endswith("]"):
        raise RenderError(f"unrecognized curve column {name!r}")
    prefix, _, label = name[:-1].partition("[")
    return prefix, label


def _style_for(preset: FigurePreset, label: str) -> str:
    try:
        r_value = float(label.partition("=")[2])
    except ValueError:
        return "-"
    return preset.styles.get(r_value, "-")


def _panel_title(letter: str, metadata: dict) -> str:
    gamma = metadata.get("gamma")
    if gamma is None:
        return f"({letter})"
    return rf"({letter}) $\Gamma/\Omega_0$ = {gamma}"


def render_figure(preset: FigurePreset, csv_dir, out_path) -> RenderResult:
    """Draw one figure from its panel CSVs and write a PNG.

    The output is deterministic: fixed canvas, fixed dpi, no timestamp or
    writer metadata, so identical inputs give identical bytes.
    """
    panels = [read_panel_csv(os.path.join(csv_dir, name)) for name in preset.csv_names()]
    legend_labels: list[str] = []

    if preset.kind == "fidelity":
        fig, axes = plt.subplots(2, 2, figsize=_FIGSIZE["fidelity"], sharex=True)
        axes = axes.ravel()
        for ax, letter, panel in zip(axes, preset.panel_letters, panels):
            curves = [(name, *split_curve_name(name)) for name in panel.columns]
            f_curves = [(name, label) for name, prefix, label in curves if prefix == "F"]
            if not f_curves:
                raise RenderError(f"{panel.path}: no fidelity columns in header")
            for name, label in f_curves:
                ax.plot(panel.times, panel.columns[name], _style_for(preset, label),
                        linewidth=1.2, label=label)
                if label not in legend_labels:
                    legend_labels.append(label)
            ax.set_ylim(0.0, 1.0)
            ax.set_title(_panel_title(letter, panel.metadata), fontsize=10)
            ax.set_ylabel("fidelity", fontsize=9)
            ax.set_xlabel(TIME_LABEL, fontsize=9)
            ax.legend(fontsize=7)
        n_panels = len(axes)
    else:
        rows = ("pa", "pb", "pc")
        fig, axes = plt.subplots(3, 2, figsize=_FIGSIZE["populations"], sharex="col")
        for j, (letter, panel) in enumerate(zip(preset.panel_letters, panels)):
            curves = [(name, *split_curve_name(name)) for name in panel.columns]
            for i, prefix in enumerate(rows):
                ax = axes[i, j]
                row_curves = [(name, label) for name, pfx, label in curves if pfx == prefix]
                if not row_curves:
                    raise RenderError(f"{panel.path}: missing {prefix!r} columns")
                for name, label in row_curves:
                    ax.plot(panel.times, panel.columns[name], _style_for(preset, label),
                            linewidth=1.2, label=label)
                    if label not in legend_labels:
                        legend_labels.append(label)
                ax.set_ylim(0.0, 1.0)
                ax.set_ylabel(POPULATION_LABELS[prefix], fontsize=9)
                if i == 0:
                    ax.set_title(_panel_title(letter, panel.metadata), fontsize=10)
                if i == 2:
                    ax.set_xlabel(TIME_LABEL, fontsize=9)
                ax.legend(fontsize=7)
        n_panels = axes.size

    fig.suptitle(preset.figure_id, fontsize=11)
    fig.tight_layout(rect=(0.0, 0.0, 1.0, 0.97))
    fig.savefig(out_path, dpi=_DPI, metadata={"Software": None})
    plt.close(fig)
    return RenderResult(
        figure_id=preset.figure_id,
        out_path=str(out_path),
        n_panels=n_panels,
        legend_labels=tuple(legend_labels),
    )
