"""Command-line interface: run, sweep, table1, figures, validate.

Exit codes: 0 success, 2 usage/configuration error, 3 numerical failure,
4 validation failure.  All physics flags are the scaled ratios (units of
Omega_0).  Precedence is CLI flag > config-file entry > built-in default.
"""

from __future__ import annotations

import argparse
import sys

from .harness import (
    DISSIPATION_MODES,
    FIGURE_PRESETS,
    RunSpec,
    SweepSpec,
    cmd_figures,
    cmd_run,
    cmd_sweep,
    cmd_table1,
    table1_report_text,
)
from .propagator import ADAPTIVE, FIXED_RK4, IntegrationError, SolverOptions
from .validate import CHECKS, format_report, run_checks

USAGE_ERROR = 2
NUMERICAL_ERROR = 3
VALIDATION_ERROR = 4

# config schema: section -> key -> coercion
_CONFIG_SCHEMA = {
    "run": {
        "process": str, "dissipation": str, "t_end": float, "stride": float,
        "seed": int, "n_traj": int, "out": str, "level": float,
    },
    "params": {
        "g0": float, "r": float, "gamma": float, "delta": float,
        "phi": float, "n": int,
    },
    "solver": {
        "method": str, "rtol": float, "atol": float, "max_step": float,
    },
}


class ConfigError(ValueError):
    pass


def parse_config(path: str) -> dict:
    """Parse the line-oriented ``key = value`` config with [section] headers.

    Unknown sections or keys are hard errors; silent typos must not corrupt
    physics parameters.
    """
    values: dict = {}
    section = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                if section not in _CONFIG_SCHEMA:
                    raise ConfigError(f"{path}:{lineno}: unknown section [{section}]")
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            if section is None:
                raise ConfigError(f"{path}:{lineno}: key outside any [section]")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            schema = _CONFIG_SCHEMA[section]
            if key not in schema:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r} in [{section}]")
            try:
                values[(section, key)] = schema[key](value)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    return values


def _merged(args, config: dict, section: str, key: str, default):
    """CLI flag > config entry > default."""
    flag = getattr(args, key if key != "out" else "out", None)
    if flag is not None:
        return flag
    return config.get((section, key), default)


def _solver_from(args, config: dict) -> SolverOptions:
    return SolverOptions(
        method=_merged(args, config, "solver", "method", ADAPTIVE),
        rel_tol=_merged(args, config, "solver", "rtol", 1e-9),
        abs_tol=_merged(args, config, "solver", "atol", 1e-11),
        max_step=_merged(args, config, "solver", "max_step", 0.1),
    )


def _add_physics_flags(p: argparse.ArgumentParser):
    p.add_argument("--g0", type=float, help="signal coupling g0/Omega_0")
    p.add_argument("--r", type=float, help="switching rate r/Omega_0")
    p.add_argument("--gamma", type=float, help="decay rate Gamma/Omega_0")
    p.add_argument("--delta", type=float, help="common detuning Delta/Omega_0")
    p.add_argument("--phi", type=float, help="control-field phase (rad)")
    p.add_argument("--n", type=int, help="cavity photon number")


def _add_solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--method", choices=(ADAPTIVE, FIXED_RK4))
    p.add_argument("--rtol", type=float, dest="rtol")
    p.add_argument("--atol", type=float, dest="atol")
    p.add_argument("--max-step", type=float, dest="max_step")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lambda-sim",
        description="Single-photon storage/retrieval dynamics in a driven "
                    "three-level cavity-QED system (scaled units, Omega_0 = 1).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate one trajectory and write a CSV")
    p_run.add_argument("--process", choices=("storage", "retrieval", "constant"))
    p_run.add_argument("--dissipation", choices=DISSIPATION_MODES)
    p_run.add_argument("--level", type=float, help="constant-pulse amplitude")
    p_run.add_argument("--t-end", type=float, dest="t_end")
    p_run.add_argument("--stride", type=float, help="output stride (default t_end/2000)")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--n-traj", type=int, dest="n_traj")
    p_run.add_argument("--config", help="config file (key = value with [section]s)")
    p_run.add_argument("--out", help="output CSV path")
    _add_physics_flags(p_run)
    _add_solver_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="cartesian parameter sweep, one CSV row per cell")
    p_sweep.add_argument("--process", default="storage",
                         help="comma list of processes")
    p_sweep.add_argument("--g0", default="0.05", help="comma list of g0 values")
    p_sweep.add_argument("--r", default="0.1,0.2,0.5,0.8", help="comma list of r values")
    p_sweep.add_argument("--gamma", default="0", help="comma list of gamma values")
    p_sweep.add_argument("--dissipation", choices=DISSIPATION_MODES, default="auto")
    p_sweep.add_argument("--workers", type=int)
    p_sweep.add_argument("--out", required=True)
    _add_solver_flags(p_sweep)

    p_table = sub.add_parser("table1", help="reproduce the published retrieval-fidelity table")
    p_table.add_argument("--out-dir", default=".", dest="out_dir")
    p_table.add_argument("--workers", type=int)
    _add_solver_flags(p_table)

    p_fig = sub.add_parser("figures", help="emit per-panel CSV data for the standard figures")
    p_fig.add_argument("--which", default="all",
                       help="figure id (%s) or 'all'" % ", ".join(sorted(FIGURE_PRESETS)))
    p_fig.add_argument("--out-dir", default=".", dest="out_dir")
    p_fig.add_argument("--points", type=int, default=2001)
    p_fig.add_argument("--workers", type=int)
    _add_solver_flags(p_fig)

    p_val = sub.add_parser("validate", help="run the invariant self-check suite")
    p_val.add_argument("--check", action="append", dest="checks",
                       help="run only the named check (repeatable)")
    p_val.add_argument("--perturb", metavar="CHECK",
                       help="multiply the named check's metric by 1e9 (negative control)")
    return parser


def _do_run(args) -> int:
    config = parse_config(args.config) if args.config else {}
    spec = RunSpec(
        process=_merged(args, config, "run", "process", "storage"),
        dissipation=_merged(args, config, "run", "dissipation", "auto"),
        g0=_merged(args, config, "params", "g0", 0.1),
        r=_merged(args, config, "params", "r", 0.1),
        gamma=_merged(args, config, "params", "gamma", 0.0),
        delta=_merged(args, config, "params", "delta", 0.0),
        phi=_merged(args, config, "params", "phi", 0.0),
        n=_merged(args, config, "params", "n", 0),
        level=_merged(args, config, "run", "level", 1.0),
        t_end=_merged(args, config, "run", "t_end", None),
        stride=_merged(args, config, "run", "stride", None),
        seed=_merged(args, config, "run", "seed", 20100712),
        n_traj=_merged(args, config, "run", "n_traj", 10000),
        solver=_solver_from(args, config),
    )
    out = _merged(args, config, "run", "out", None)
    if out is None:
        raise ConfigError("an output path is required (--out or [run] out)")
    output = cmd_run(spec, out)
    readout = output.readout()
    print(f"wrote {out}: process={spec.process} dissipation={spec.mode} "
          f"g0={spec.g0:g} r={spec.r:g} gamma={spec.gamma:g} "
          f"F({readout.t_readout:g}) = {readout.f_final:.6f}")
    return 0


def _parse_list(text: str, cast):
    try:
        return tuple(cast(item) for item in text.split(",") if item != "")
    except ValueError as exc:
        raise ConfigError(f"bad list {text!r}: {exc}") from exc


def _do_sweep(args) -> int:
    spec = SweepSpec(
        processes=_parse_list(args.process, str),
        g0_values=_parse_list(args.g0, float),
        r_values=_parse_list(args.r, float),
        gamma_values=_parse_list(args.gamma, float),
        template=RunSpec(dissipation=args.dissipation, solver=_solver_from(args, {})),
    )
    rows = cmd_sweep(spec, args.out, workers=args.workers)
    print(f"wrote {args.out}: {len(rows)} cells")
    return 0


def _do_table1(args) -> int:
    rows = cmd_table1(args.out_dir, solver=_solver_from(args, {}), workers=args.workers)
    print(table1_report_text(rows), end="")
    flagged = [row for row in rows if row["flagged"]]
    print(f"{len(rows)} cells, {len(flagged)} flagged beyond 0.03")
    return 0


def _do_figures(args) -> int:
    written = cmd_figures(args.which, args.out_dir, points=args.points,
                          solver=_solver_from(args, {}), workers=args.workers)
    print(f"wrote {len(written)} panel files to {args.out_dir}")
    return 0


def _do_validate(args) -> int:
    perturb = {args.perturb: 1e9} if args.perturb else None
    if args.perturb and args.perturb not in CHECKS:
        raise ConfigError(f"unknown check {args.perturb!r}")
    if args.checks:
        for name in args.checks:
            if name not in CHECKS:
                raise ConfigError(f"unknown check {name!r}")
    results = run_checks(args.checks, perturb)
    print(format_report(results))
    return 0 if all(res.ok for res in results) else VALIDATION_ERROR


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _do_run, "sweep": _do_sweep, "table1": _do_table1,
        "figures": _do_figures, "validate": _do_validate,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
