"""Run presets, parameter sweeps, CSV emission and published-value comparisons.

All trajectory CSVs share one schema,

    t,omega_c,F,pa,pb,pc,reV1,imV1,reV2,imV2,reV3,imV3,Z

preceded by '#'-prefixed metadata lines echoing every parameter.  Floats are
written with 12 significant digits and LF line endings, so identical specs
produce byte-identical files.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .densitymatrix import evolve_master, monte_carlo_ensemble
from .diagnostics import ReadoutResult, berry_retrieval_fidelity, steady_state_readout
from .dissipative import evolve_dissipative
from .model import ControlPulse, StateVector, SystemParams, dark_state
from .propagator import SolverOptions, TrajectoryRecord, _frames_on_grid, evolve_eigenbasis

THREADS_ENV = "LAMBDA_SIM_THREADS"

TRAJECTORY_HEADER = "t,omega_c,F,pa,pb,pc,reV1,imV1,reV2,imV2,reV3,imV3,Z"
SWEEP_HEADER = ("process,dissipation,g0,r,gamma,delta,F_final,pa,pb,pc,"
                "saturation_drift,t_readout")

DISSIPATION_MODES = ("auto", "none", "resummed", "montecarlo", "master")

# Published steady-state retrieval fidelities (Gamma = 0): (r, g0) ->
# (exact-numerics column, superadiabatic column).
PUBLISHED_TABLE1 = {
    (0.001, 0.05): (0.91, 0.9996), (0.001, 0.1): (0.99, 1.0), (0.001, 0.2): (0.999, 1.0),
    (0.01, 0.05): (0.425, 0.544), (0.01, 0.1): (0.73, 0.957), (0.01, 0.2): (0.96, 1.0),
    (0.1, 0.05): (0.14, 0.076), (0.1, 0.1): (0.28, 0.269), (0.1, 0.2): (0.53, 0.712),
    (0.2, 0.05): (0.11, 0.039), (0.2, 0.1): (0.21, 0.145), (0.2, 0.2): (0.40, 0.463),
    (0.5, 0.05): (0.08, 0.016), (0.5, 0.1): (0.135, 0.061), (0.5, 0.2): (0.28, 0.220),
    (0.8, 0.05): (0.06, 0.01), (0.8, 0.1): (0.12, 0.038), (0.8, 0.2): (0.24, 0.144),
}
TABLE1_R_VALUES = (0.001, 0.01, 0.1, 0.2, 0.5, 0.8)
TABLE1_G0_VALUES = (0.05, 0.1, 0.2)
TABLE1_FLAG_THRESHOLD = 0.03

FIGURE_PRESETS = {
    "fig2": ("storage", 0.05, "fidelity"),
    "fig3": ("storage", 0.1, "fidelity"),
    "fig4": ("storage", 0.2, "fidelity"),
    "fig5": ("storage", 0.1, "populations"),
    "fig6": ("retrieval", 0.05, "fidelity"),
    "fig7": ("retrieval", 0.1, "fidelity"),
    "fig8": ("retrieval", 0.2, "fidelity"),
    "fig9": ("retrieval", 0.1, "populations"),
}
PANEL_GAMMAS = ((ord("a"), 0.0), (ord("b"), 0.1), (ord("c"), 0.5), (ord("d"), 1.0))
CURVE_RS = (0.1, 0.2, 0.5, 0.8)


def fmt(value: float) -> str:
    """Fixed 12-significant-digit decimal formatting used in every CSV."""
    return f"{value:.12g}"


def worker_count(requested: int | None, n_items: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    limit = int(cap) if cap else (os.cpu_count() or 1)
    want = requested if requested is not None else limit
    return max(1, min(want, limit, n_items))


@dataclass(frozen=True)
class RunSpec:
    """Everything needed to reproduce one trajectory."""

    process: str = "storage"
    dissipation: str = "auto"
    g0: float = 0.1
    r: float = 0.1
    gamma: float = 0.0
    delta: float = 0.0
    phi: float = 0.0
    n: int = 0
    level: float = 1.0
    t_end: float | None = None
    stride: float | None = None
    seed: int = 20100712
    n_traj: int = 10000
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if self.process not in ("storage", "retrieval", "constant"):
            raise ValueError(f"unknown process {self.process!r}")
        if self.dissipation not in DISSIPATION_MODES:
            raise ValueError(f"unknown dissipation mode {self.dissipation!r}")
        if self.t_end is not None and self.t_end <= 0.0:
            raise ValueError("t_end must be positive")
        if self.stride is not None and self.stride <= 0.0:
            raise ValueError("stride must be positive")

    @property
    def mode(self) -> str:
        if self.dissipation != "auto":
            return self.dissipation
        return "none" if self.gamma == 0.0 else "resummed"

    def params(self) -> SystemParams:
        return SystemParams(
            g0=self.g0, r=self.r, gamma=self.gamma, delta_s=self.delta,
            delta_c=self.delta, n=self.n, phi=self.phi,
        )

    def pulse(self) -> ControlPulse:
        params = self.params()
        if self.process == "storage":
            return ControlPulse.storage(params)
        if self.process == "retrieval":
            return ControlPulse.retrieval(params)
        return ControlPulse.constant(params, self.level)

    def grid(self) -> np.ndarray:
        t_end = self.t_end if self.t_end is not None else 8.0 / self.r
        stride = self.stride if self.stride is not None else t_end / 2000.0
        n_points = int(round(t_end / stride)) + 1
        return np.linspace(0.0, t_end, n_points)


@dataclass(frozen=True)
class RunOutput:
    """Uniform column view of one run, ready for CSV emission."""

    spec: RunSpec
    times: np.ndarray
    omega_c: np.ndarray
    fidelity: np.ndarray
    populations: np.ndarray      # (N, 3)
    eigen_columns: np.ndarray    # (N, 3) complex; modal magnitudes for ensembles
    norm: np.ndarray
    record: TrajectoryRecord | None = None

    def readout(self) -> ReadoutResult:
        if self.record is not None:
            return steady_state_readout(self.record, self.spec.pulse())
        pulse = self.spec.pulse()
        t_readout = 8.0 / pulse.r
        if self.times[-1] < t_readout - 1e-9:
            raise ValueError("trajectory ends before the readout time")
        idx = int(np.argmin(np.abs(self.times - t_readout)))
        window = (self.times >= 4.0 / pulse.r) & (self.times <= t_readout + 1e-9)
        drift = float(np.max(np.abs(self.fidelity[window] - self.fidelity[idx])))
        return ReadoutResult(
            f_final=float(self.fidelity[idx]),
            populations=tuple(float(x) for x in self.populations[idx]),
            t_readout=float(self.times[idx]),
            saturation_drift=drift,
        )


def _ensemble_columns(params: SystemParams, pulse: ControlPulse, times, rhos):
    """F, populations, modal magnitudes and trace for a density-matrix run."""
    omega = np.asarray(pulse.amplitude(times), dtype=float)
    vec, _ = _frames_on_grid(params, omega)
    modal = np.sqrt(np.abs(np.einsum("nik,nij,njk->nk", vec.conj(), rhos, vec)))
    fid = modal[:, 0]
    pops = np.abs(np.einsum("nii->ni", rhos))
    trace = np.einsum("nii->n", rhos).real
    return fid, pops, modal.astype(complex), trace


def execute_run(spec: RunSpec) -> RunOutput:
    """Run one spec with the engine selected by its dissipation mode."""
    params = spec.params()
    pulse = spec.pulse()
    grid = spec.grid()
    opts = replace(spec.solver, output_grid=grid)
    span = (0.0, float(grid[-1]))
    init = dark_state(params, pulse.amplitude(0.0))
    mode = spec.mode

    if mode == "none":
        eigen_init = StateVector.eigen([1.0, 0.0, 0.0])
        record = evolve_eigenbasis(params, pulse, span, eigen_init, opts)
    elif mode == "resummed":
        record = evolve_dissipative(params, pulse, span, init, opts)
    elif mode == "montecarlo":
        result = monte_carlo_ensemble(
            params, pulse, span, init, spec.n_traj, spec.seed, opts,
            workers=worker_count(None, max(1, spec.n_traj // 256)),
        )
        fid, pops, modal, trace = _ensemble_columns(params, pulse, result.times, result.rho_mean)
        return RunOutput(spec, result.times, np.asarray(pulse.amplitude(result.times)),
                         fid, pops, modal, trace)
    else:
        rho0 = np.outer(init.amps, init.amps.conj())
        master = evolve_master(params, pulse, span, rho0, opts)
        fid, pops, modal, trace = _ensemble_columns(params, pulse, master.times, master.rhos)
        return RunOutput(spec, master.times, np.asarray(pulse.amplitude(master.times)),
                         fid, pops, modal, trace)

    return RunOutput(
        spec, record.times, np.asarray(pulse.amplitude(record.times)),
        record.fidelity, record.populations, record.eigen_amps, record.norm,
        record=record,
    )


def _metadata_lines(spec: RunSpec) -> list[str]:
    lines = [
        f"# lambda-sim {__version__}",
        f"# process = {spec.process}",
        f"# dissipation = {spec.mode}",
        f"# g0 = {fmt(spec.g0)}",
        f"# r = {fmt(spec.r)}",
        f"# gamma = {fmt(spec.gamma)}",
        f"# delta = {fmt(spec.delta)}",
        f"# phi = {fmt(spec.phi)}",
        f"# n = {spec.n}",
        f"# t_end = {fmt(spec.grid()[-1])}",
        f"# points = {spec.grid().size}",
        f"# method = {spec.solver.method}",
        f"# rtol = {fmt(spec.solver.rel_tol)}",
        f"# atol = {fmt(spec.solver.abs_tol)}",
        f"# max_step = {fmt(spec.solver.max_step)}",
    ]
    if spec.process == "constant":
        lines.insert(3, f"# level = {fmt(spec.level)}")
    if spec.mode == "montecarlo":
        lines.append(f"# seed = {spec.seed}")
        lines.append(f"# n_traj = {spec.n_traj}")
    if spec.mode in ("montecarlo", "master"):
        lines.append("# eigen columns hold modal magnitudes sqrt(<u_k|rho|u_k>); Z is tr(rho)")
    return lines


def write_trajectory_csv(path, output: RunOutput) -> None:
    rows = [TRAJECTORY_HEADER]
    for i, t in enumerate(output.times):
        v = output.eigen_columns[i]
        cells = [
            fmt(t), fmt(output.omega_c[i]), fmt(output.fidelity[i]),
            fmt(output.populations[i, 0]), fmt(output.populations[i, 1]),
            fmt(output.populations[i, 2]),
            fmt(v[0].real), fmt(v[0].imag), fmt(v[1].real), fmt(v[1].imag),
            fmt(v[2].real), fmt(v[2].imag), fmt(output.norm[i]),
        ]
        rows.append(",".join(cells))
    text = "\n".join(_metadata_lines(output.spec) + rows) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_run(spec: RunSpec, out_path) -> RunOutput:
    output = execute_run(spec)
    write_trajectory_csv(out_path, output)
    return output


# ---------------------------------------------------------------------------
# sweeps

@dataclass(frozen=True)
class SweepSpec:
    """Cartesian grid of runs; iteration is lexicographic in
    (process, g0, r, gamma)."""

    processes: tuple[str, ...] = ("storage",)
    g0_values: tuple[float, ...] = (0.05,)
    r_values: tuple[float, ...] = CURVE_RS
    gamma_values: tuple[float, ...] = (0.0,)
    template: RunSpec = field(default_factory=RunSpec)

    def __post_init__(self):
        for name in ("processes", "g0_values", "r_values", "gamma_values"):
            if not getattr(self, name):
                raise ValueError(f"{name} must not be empty")

    def cells(self) -> list[RunSpec]:
        out = []
        for process in sorted(self.processes):
            for g0 in sorted(self.g0_values):
                for r in sorted(self.r_values):
                    for gamma in sorted(self.gamma_values):
                        out.append(replace(
                            self.template, process=process, g0=g0, r=r,
                            gamma=gamma, t_end=None,
                        ))
        return out


def _sweep_cell(spec: RunSpec) -> dict:
    readout = execute_run(spec).readout()
    return {
        "process": spec.process, "dissipation": spec.mode, "g0": spec.g0,
        "r": spec.r, "gamma": spec.gamma, "delta": spec.delta,
        "F_final": readout.f_final, "pa": readout.populations[0],
        "pb": readout.populations[1], "pc": readout.populations[2],
        "saturation_drift": readout.saturation_drift,
        "t_readout": readout.t_readout,
    }


def run_sweep(spec: SweepSpec, workers: int | None = None) -> list[dict]:
    """Execute all cells; rows come back in grid order regardless of workers."""
    cells = spec.cells()
    n_workers = worker_count(workers, len(cells))
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(cell) for cell in cells]
    return rows


def write_sweep_csv(path, spec: SweepSpec, rows: list[dict]) -> None:
    lines = [
        f"# lambda-sim {__version__}",
        f"# processes = {','.join(sorted(spec.processes))}",
        f"# g0 = {','.join(fmt(v) for v in sorted(spec.g0_values))}",
        f"# r = {','.join(fmt(v) for v in sorted(spec.r_values))}",
        f"# gamma = {','.join(fmt(v) for v in sorted(spec.gamma_values))}",
        SWEEP_HEADER,
    ]
    for row in rows:
        lines.append(",".join([
            row["process"], row["dissipation"], fmt(row["g0"]), fmt(row["r"]),
            fmt(row["gamma"]), fmt(row["delta"]), fmt(row["F_final"]),
            fmt(row["pa"]), fmt(row["pb"]), fmt(row["pc"]),
            fmt(row["saturation_drift"]), fmt(row["t_readout"]),
        ]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_sweep(spec: SweepSpec, out_path, workers: int | None = None) -> list[dict]:
    rows = run_sweep(spec, workers)
    write_sweep_csv(out_path, spec, rows)
    return rows


# ---------------------------------------------------------------------------
# published-table comparison

def run_table1(
    solver: SolverOptions | None = None,
    r_values: tuple[float, ...] = TABLE1_R_VALUES,
    g0_values: tuple[float, ...] = TABLE1_G0_VALUES,
    workers: int | None = None,
) -> list[dict]:
    """Steady-state retrieval fidelities (Gamma = 0) against published values."""
    solver = solver or SolverOptions()
    specs = [
        RunSpec(process="retrieval", g0=g0, r=r, gamma=0.0, solver=solver)
        for r in r_values for g0 in g0_values
    ]
    n_workers = worker_count(workers, len(specs))
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            readouts = list(pool.map(_table1_cell, specs))
    else:
        readouts = [_table1_cell(s) for s in specs]

    rows = []
    for spec, f_sim in zip(specs, readouts):
        published = PUBLISHED_TABLE1.get((spec.r, spec.g0))
        f_berry = berry_retrieval_fidelity(spec.g0, spec.r)
        row = {
            "r": spec.r, "g0": spec.g0, "F_sim": f_sim, "F_berry": f_berry,
            "F_published": published[0] if published else float("nan"),
            "F_berry_published": published[1] if published else float("nan"),
        }
        row["dev_sim"] = abs(row["F_sim"] - row["F_published"])
        row["dev_berry"] = abs(row["F_berry"] - row["F_berry_published"])
        row["flagged"] = row["dev_sim"] > TABLE1_FLAG_THRESHOLD
        rows.append(row)
    return rows


def _table1_cell(spec: RunSpec) -> float:
    return execute_run(spec).readout().f_final


def table1_csv_text(rows: list[dict]) -> str:
    lines = [
        f"# lambda-sim {__version__}",
        "r,g0,F_sim,F_berry,F_published,F_berry_published,dev_sim,dev_berry,flagged",
    ]
    for row in rows:
        lines.append(",".join([
            fmt(row["r"]), fmt(row["g0"]), fmt(row["F_sim"]), fmt(row["F_berry"]),
            fmt(row["F_published"]), fmt(row["F_berry_published"]),
            fmt(row["dev_sim"]), fmt(row["dev_berry"]), str(int(row["flagged"])),
        ]))
    return "\n".join(lines) + "\n"


def table1_report_text(rows: list[dict]) -> str:
    g0s = sorted({row["g0"] for row in rows})
    by_cell = {(row["r"], row["g0"]): row for row in rows}
    header = "steady-state retrieval fidelity (gamma = 0)"
    col = "".join(f"|  g0={g0:<4g} sim  closed  publ " for g0 in g0s)
    lines = [header, f"{'r':>6} {col}"]
    for r in sorted({row["r"] for row in rows}):
        cells = ""
        for g0 in g0s:
            row = by_cell[(r, g0)]
            mark = "*" if row["flagged"] else " "
            cells += (f"| {row['F_sim']:6.3f} {row['F_berry']:6.3f} "
                      f"{row['F_published']:6.3f}{mark} ")
        lines.append(f"{r:>6g} {cells}")
    lines.append("(* = |sim - published| > 0.03)")
    return "\n".join(lines) + "\n"


def cmd_table1(out_dir, solver: SolverOptions | None = None,
               workers: int | None = None) -> list[dict]:
    rows = run_table1(solver, workers=workers)
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "table1.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(table1_csv_text(rows))
    with open(os.path.join(out_dir, "table1.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(table1_report_text(rows))
    return rows


# ---------------------------------------------------------------------------
# figure data

def figure_panel_files(which: str) -> list[str]:
    """Panel CSV names a figure id (or 'all') will produce."""
    if which == "all":
        ids = sorted(FIGURE_PRESETS)
    elif which in FIGURE_PRESETS:
        ids = [which]
    else:
        raise ValueError(f"unknown figure id {which!r}")
    return [f"{fig}_panel_{chr(letter)}.csv" for fig in ids
            for letter, _ in PANEL_GAMMAS]


def run_figure(
    fig_id: str,
    out_dir,
    points: int = 2001,
    solver: SolverOptions | None = None,
    workers: int | None = None,
) -> list[str]:
    """Write the four panel CSVs (one per decay rate) for one figure.

    Every curve is run on the common grid [0, 8/min(r)] so a panel shares a
    single time column; fidelity presets emit one F column per r, population
    presets a (pa, pb, pc) column group per r.
    """
    if fig_id not in FIGURE_PRESETS:
        raise ValueError(f"unknown figure id {fig_id!r}")
    process, g0, kind = FIGURE_PRESETS[fig_id]
    solver = solver or SolverOptions()
    t_end = 8.0 / min(CURVE_RS)
    stride = t_end / (points - 1)

    specs = [
        RunSpec(process=process, g0=g0, r=r, gamma=gamma, t_end=t_end,
                stride=stride, solver=solver)
        for _, gamma in PANEL_GAMMAS for r in CURVE_RS
    ]
    n_workers = worker_count(workers, len(specs))
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            outputs = list(pool.map(execute_run, specs))
    else:
        outputs = [execute_run(s) for s in specs]

    os.makedirs(out_dir, exist_ok=True)
    written = []
    for ip, (letter, gamma) in enumerate(PANEL_GAMMAS):
        panel_outputs = outputs[ip * len(CURVE_RS):(ip + 1) * len(CURVE_RS)]
        times = panel_outputs[0].times
        if kind == "fidelity":
            names = [f"F[r={fmt(r)}]" for r in CURVE_RS]
            columns = [out.fidelity for out in panel_outputs]
        else:
            names, columns = [], []
            for r, out in zip(CURVE_RS, panel_outputs):
                for j, pop in enumerate(("pa", "pb", "pc")):
                    names.append(f"{pop}[r={fmt(r)}]")
                    columns.append(out.populations[:, j])
        lines = [
            f"# lambda-sim {__version__}",
            f"# figure = {fig_id}",
            f"# panel = {chr(letter)}",
            f"# process = {process}",
            f"# g0 = {fmt(g0)}",
            f"# gamma = {fmt(gamma)}",
            "t," + ",".join(names),
        ]
        for i, t in enumerate(times):
            lines.append(fmt(t) + "," + ",".join(fmt(col[i]) for col in columns))
        name = f"{fig_id}_panel_{chr(letter)}.csv"
        with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        written.append(name)
    return written


def cmd_figures(which: str, out_dir, points: int = 2001,
                solver: SolverOptions | None = None,
                workers: int | None = None) -> list[str]:
    ids = sorted(FIGURE_PRESETS) if which == "all" else [which]
    written = []
    for fig_id in ids:
        written.extend(run_figure(fig_id, out_dir, points, solver, workers))
    return written
