"""CLI: ``lambda-sim-plots render --figure fig2 --csv-dir D --out fig2.png``."""

from __future__ import annotations

import argparse
import sys

from .presets import FIGURE_PRESETS
from .render import RenderError, render_figure


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lambda-sim-plots",
        description="Render lambda-sim panel CSVs into multi-panel figures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="render one figure from panel CSVs")
    p_render.add_argument("--figure", required=True, choices=sorted(FIGURE_PRESETS))
    p_render.add_argument("--csv-dir", required=True, dest="csv_dir")
    p_render.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = render_figure(FIGURE_PRESETS[args.figure], args.csv_dir, args.out)
    except (RenderError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {result.out_path}: {result.n_panels} panels, "
          f"{len(result.legend_labels)} curve labels")
    return 0


if __name__ == "__main__":
    sys.exit(main())
