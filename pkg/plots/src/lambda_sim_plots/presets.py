"""Figure layout presets mirroring the standard storage/retrieval panels."""

from __future__ import annotations

from dataclasses import dataclass, field

# switching-rate curve styles: dashed, continuous, dotted, dot-dashed
CURVE_STYLES = {0.1: "--", 0.2: "-", 0.5: ":", 0.8: "-."}

# panel letter -> decay rate, in reading order (a)-(d)
PANEL_GAMMAS = (("a", 0.0), ("b", 0.1), ("c", 0.5), ("d", 1.0))

TIME_LABEL = r"time (units of $\Omega_0^{-1}$)"

POPULATION_LABELS = {"pa": r"$|A_0|^2$", "pb": r"$|B_1|^2$", "pc": r"$|C_0|^2$"}


@dataclass(frozen=True)
class FigurePreset:
    """Panel layout for one figure id.

    ``fidelity`` presets render the four decay-rate panels in a 2x2 grid;
    ``populations`` presets render a 3x2 grid (one row per level population,
    columns for the first two decay-rate panels).
    """

    figure_id: str
    kind: str  # "fidelity" | "populations"
    styles: dict = field(default_factory=lambda: dict(CURVE_STYLES))

    @property
    def panel_letters(self) -> tuple[str, ...]:
        return tuple(letter for letter, _ in PANEL_GAMMAS) if self.kind == "fidelity" else ("a", "b")

    @property
    def panel_count(self) -> int:
        return 4 if self.kind == "fidelity" else 6

    def csv_names(self) -> list[str]:
        return [f"{self.figure_id}_panel_{letter}.csv" for letter in self.panel_letters]


FIGURE_PRESETS = {
    "fig2": FigurePreset("fig2", "fidelity"),
    "fig3": FigurePreset("fig3", "fidelity"),
    "fig4": FigurePreset("fig4", "fidelity"),
    "fig5": FigurePreset("fig5", "populations"),
    "fig6": FigurePreset("fig6", "fidelity"),
    "fig7": FigurePreset("fig7", "fidelity"),
    "fig8": FigurePreset("fig8", "fidelity"),
    "fig9": FigurePreset("fig9", "populations"),
}
