"""Prints one pass/fail line per acceptance criterion at the end of the run."""

_TITLES = {
    "test_criterion_01": "published retrieval-fidelity table reproduced within 0.03",
    "test_criterion_02": "superadiabatic closed-form column regenerated within 0.001",
    "test_criterion_03": "quoted storage fidelities reproduced within 0.03",
    "test_criterion_04": "eigen-route vs bare-route trajectories agree within 1e-6",
    "test_criterion_05": "resummed ODE matches 512-node quadrature within 1e-4",
    "test_criterion_06a": "storage fidelity decreases with switching rate (gamma=0)",
    "test_criterion_06b": "storage fidelity decreases with decay rate",
    "test_criterion_06c": "retrieval fidelity peaks at gamma = 0.1 on the grid",
    "test_criterion_06d": "retrieval fidelity at gamma=0.1 increases with switching rate",
    "test_criterion_07": "conservation and structure bounds hold",
    "test_criterion_08": "jump ensemble, master equation and resummed model agree",
    "test_criterion_09": "sweeps, table and ensembles are bit-deterministic",
}

_results: dict[str, bool] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    for key in _TITLES:
        if name.startswith(key + "_") or name.split("[")[0] == key:
            _results[key] = _results.get(key, True) and report.passed
            break


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for key, title in _TITLES.items():
        if key in _results:
            status = "PASS" if _results[key] else "FAIL"
            terminalreporter.write_line(f"  [{status}] {key}: {title}")
