"""Figure rendering for lambda-sim panel CSVs."""

__version__ = "0.1.0"

from .presets import FIGURE_PRESETS, FigurePreset  # noqa: F401
from .render import RenderError, RenderResult, render_figure  # noqa: F401
