"""Dissipationless propagation of the driven Lambda system.

Two independent integration routes are provided: the eigenbasis coefficient
ODEs (slow amplitudes V_k plus co-integrated dynamical phases X_k) and the
bare-basis Schrodinger equation, which serves as the cross-check oracle.
Both run on an adaptive Runge-Kutta core with PI step control; a fixed-step
RK4 is retained for bit-reproducible regression baselines.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .model import (
    EIGEN,
    RETRIEVAL,
    STORAGE,
    SQRT1_2,
    ControlPulse,
    StateVector,
    SystemParams,
)

ADAPTIVE = "adaptive"
FIXED_RK4 = "rk4"

_NORM_TOL = 1e-8


class IntegrationError(RuntimeError):
    """Raised when the ODE integrator fails; carries the time reached."""

    def __init__(self, message: str, t_reached: float):
        super().__init__(f"{message} (integration reached t={t_reached:g})")
        self.t_reached = t_reached


@dataclass(frozen=True)
class SolverOptions:
    """Integration controls shared by all evolution routines.

    ``method`` is ``adaptive`` (high-order Runge-Kutta with PI step control,
    default) or ``rk4`` (fixed step of size max_step).  ``output_grid``
    overrides the default uniform readout grid.
    """

    method: str = ADAPTIVE
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = 0.1
    output_grid: np.ndarray | None = None

    def __post_init__(self):
        if self.method not in (ADAPTIVE, FIXED_RK4):
            raise ValueError(f"unknown method {self.method!r}")
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_step <= 0.0:
            raise ValueError("max_step must be positive")
        if self.output_grid is not None:
            grid = np.asarray(self.output_grid, dtype=float)
            if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0.0):
                raise ValueError("output_grid must be strictly increasing")
            object.__setattr__(self, "output_grid", grid)


@dataclass(frozen=True)
class TrajectoryRecord:
    """Time series of one run: amplitudes, fidelity, populations, norm.

    ``bare_amps`` holds the normalized state; ``eigen_amps`` the slow
    coefficients (V_k without dissipation, W_k with); ``norm`` is Z(t), the
    norm of the raw (pre-normalization) state, identically 1 for unitary
    evolution.
    """

    params: SystemParams
    pulse: ControlPulse
    times: np.ndarray
    bare_amps: np.ndarray
    eigen_amps: np.ndarray
    phases: np.ndarray
    fidelity: np.ndarray
    populations: np.ndarray
    norm: np.ndarray

    def __post_init__(self):
        n = self.times.shape[0]
        for name in ("bare_amps", "eigen_amps", "phases", "populations"):
            if getattr(self, name).shape[0] != n:
                raise ValueError(f"{name} length does not match times")
        for name in ("fidelity", "norm"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} length does not match times")
        for name in ("times", "bare_amps", "eigen_amps", "phases", "fidelity",
                     "populations", "norm"):
            getattr(self, name).setflags(write=False)


def default_grid(t_span: tuple[float, float], points: int = 2001) -> np.ndarray:
    return np.linspace(t_span[0], t_span[1], points)


def _resolve_grid(t_span, opts: SolverOptions) -> np.ndarray:
    if opts.output_grid is not None:
        grid = opts.output_grid
        if grid[0] < t_span[0] - 1e-12 or grid[-1] > t_span[1] + 1e-12:
            raise ValueError("output_grid must lie inside t_span")
        return grid
    return default_grid(t_span)


def _scalar_pulse(pulse: ControlPulse):
    """Fast scalar closures (amplitude, derivative) for the ODE hot path."""
    r, w0 = pulse.r, pulse.omega0
    if pulse.kind == STORAGE:
        def amp(t): return w0 * (1.0 - math.tanh(r * t))
        def damp(t):
            c = math.cosh(r * t)
            return -w0 * r / (c * c)
    elif pulse.kind == RETRIEVAL:
        def amp(t): return w0 * math.tanh(r * t)
        def damp(t):
            c = math.cosh(r * t)
            return w0 * r / (c * c)
    else:
        level = pulse.level
        def amp(t): return level
        def damp(t): return 0.0
    return amp, damp


def _integrate(rhs, t_span, y0, grid, opts: SolverOptions):
    """Integrate complex ODE and sample on grid; returns (n_times, n_states)."""
    if opts.method == FIXED_RK4:
        return _rk4_on_grid(rhs, y0, grid, opts.max_step)
    sol = solve_ivp(
        rhs,
        t_span,
        y0,
        method="DOP853",
        t_eval=grid,
        rtol=opts.rel_tol,
        atol=opts.abs_tol,
        max_step=opts.max_step,
        dense_output=False,
    )
    if not sol.success:
        raise IntegrationError(sol.message, float(sol.t[-1]) if sol.t.size else t_span[0])
    return sol.y.T.copy()


def _rk4_on_grid(rhs, y0, grid, h_max):
    y = np.asarray(y0, dtype=complex).copy()
    out = np.empty((grid.size, y.size), dtype=complex)
    out[0] = y
    for i in range(grid.size - 1):
        t0, t1 = grid[i], grid[i + 1]
        nsub = max(1, int(math.ceil((t1 - t0) / h_max)))
        h = (t1 - t0) / nsub
        t = t0
        for _ in range(nsub):
            k1 = np.asarray(rhs(t, y))
            k2 = np.asarray(rhs(t + 0.5 * h, y + 0.5 * h * k1))
            k3 = np.asarray(rhs(t + 0.5 * h, y + 0.5 * h * k2))
            k4 = np.asarray(rhs(t + h, y + h * k3))
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
        out[i + 1] = y
    return out


def _frames_on_grid(params: SystemParams, omega: np.ndarray):
    """Vectorized eigenvectors/eigenvalues on a grid of control amplitudes.

    Returns (vectors (N,3,3) with u_k in column k, lambdas (N,3)).
    """
    g = params.g_n
    delta = params.delta
    theta = np.arctan2(g, omega)
    omega_eff = np.hypot(g, omega)
    psi = np.arctan2(omega_eff, -0.5 * delta)
    omega_r = 0.5 * np.sqrt(delta**2 + 4.0 * omega_eff**2)
    lambdas = np.stack(
        [np.full_like(omega, delta), 0.5 * delta + omega_r, 0.5 * delta - omega_r],
        axis=1,
    )
    ct = np.where(omega == 0.0, 0.0, np.cos(theta))  # exact |c> at zero control
    st = np.where(omega == 0.0, 1.0, np.sin(theta))
    ch, sh = np.cos(0.5 * psi), np.sin(0.5 * psi)
    eip = cmath.exp(1j * params.phi)
    vec = np.zeros((omega.size, 3, 3), dtype=complex)
    vec[:, 1, 0] = ct * eip
    vec[:, 2, 0] = st
    vec[:, 0, 1] = ch
    vec[:, 1, 1] = sh * st
    vec[:, 2, 1] = -sh * ct * np.conj(eip)
    vec[:, 0, 2] = -sh
    vec[:, 1, 2] = ch * st
    vec[:, 2, 2] = -ch * ct * np.conj(eip)
    return vec, lambdas


def assemble_record(
    params: SystemParams,
    pulse: ControlPulse,
    times: np.ndarray,
    bare_raw: np.ndarray,
    phases: np.ndarray | None,
    eigen_amps: np.ndarray | None = None,
) -> TrajectoryRecord:
    """Build a TrajectoryRecord from raw bare amplitudes on the grid.

    ``bare_raw`` may be unnormalized (dissipative runs); Z(t) is its norm and
    the stored state is bare_raw/Z.  Eigen coefficients are obtained by
    projection unless supplied by the integrator.
    """
    times = np.asarray(times, dtype=float)
    znorm = np.linalg.norm(bare_raw, axis=1)
    if np.any(znorm < 1e-14):
        raise DegenerateNormError(float(times[np.argmax(znorm < 1e-14)]))
    psi = bare_raw / znorm[:, None]
    populations = np.abs(psi) ** 2

    if phases is None or not params.two_photon_resonant:
        nan3 = np.full((times.size, 3), np.nan)
        return TrajectoryRecord(
            params=params, pulse=pulse, times=times, bare_amps=psi,
            eigen_amps=nan3.astype(complex), phases=nan3,
            fidelity=np.full(times.size, np.nan), populations=populations,
            norm=znorm,
        )

    omega = np.asarray(pulse.amplitude(times), dtype=float)
    vec, _ = _frames_on_grid(params, omega)
    if eigen_amps is None:
        proj = np.einsum("nij,nj->ni", vec.conj().transpose(0, 2, 1), psi)
        eigen_amps = proj * np.exp(1j * phases)
    fidelity = np.abs(np.einsum("ni,ni->n", vec[:, :, 0].conj(), psi))
    return TrajectoryRecord(
        params=params, pulse=pulse, times=times, bare_amps=psi,
        eigen_amps=eigen_amps, phases=phases, fidelity=fidelity,
        populations=populations, norm=znorm,
    )


class DegenerateNormError(RuntimeError):
    def __init__(self, t: float):
        super().__init__(f"state norm fell below 1e-14 at t={t:g}")
        self.t = t


def _check_normalized(state: StateVector):
    if abs(state.norm - 1.0) > _NORM_TOL:
        raise ValueError(f"initial state must be normalized (norm={state.norm!r})")


def evolve_eigenbasis(
    params: SystemParams,
    pulse: ControlPulse,
    t_span: tuple[float, float],
    init: StateVector,
    opts: SolverOptions | None = None,
) -> TrajectoryRecord:
    """Integrate the eigenbasis coefficient ODEs.

    dV_m/dt = -sum_{k != m} V_k <u_m|du_k/dt> exp(-i (X_k - X_m)), with the
    phases X_k co-integrated so step control keeps them consistent with the
    amplitudes.  The coefficient norm is conserved to solver accuracy.
    """
    opts = opts or SolverOptions()
    if init.basis != EIGEN:
        raise ValueError("evolve_eigenbasis expects an eigen-basis initial state")
    _check_normalized(init)
    grid = _resolve_grid(t_span, opts)

    g = params.g_n
    delta = params.delta
    phi = params.phi
    amp, damp = _scalar_pulse(pulse)
    emip = cmath.exp(-1j * phi)
    resonance = delta == 0.0

    def rhs(t, y):
        v1, v2, v3, x1, x2, x3 = y
        w = amp(t)
        dw = damp(t)
        d2 = g * g + w * w
        omega_r = 0.5 * math.sqrt(delta * delta + 4.0 * d2)
        th_dot = -g * dw / d2
        if resonance:
            sh = ch = SQRT1_2
            psi_dot = 0.0
        else:
            oeff = math.sqrt(d2)
            half_psi = 0.5 * math.atan2(oeff, -0.5 * delta)
            sh, ch = math.sin(half_psi), math.cos(half_psi)
            psi_dot = -2.0 * delta * w * dw / (oeff * (delta * delta + 4.0 * d2))
        c12 = th_dot * sh * emip
        c13 = th_dot * ch * emip
        c23 = -0.5 * psi_dot
        e21 = cmath.exp(-1j * (x2 - x1))
        e31 = cmath.exp(-1j * (x3 - x1))
        e32 = cmath.exp(-1j * (x3 - x2))
        dv1 = -(v2 * c12 * e21 + v3 * c13 * e31)
        dv2 = v1 * c12.conjugate() * e21.conjugate() - v3 * c23 * e32
        dv3 = v1 * c13.conjugate() * e31.conjugate() + v2 * c23 * e32.conjugate()
        return (dv1, dv2, dv3, delta, 0.5 * delta + omega_r, 0.5 * delta - omega_r)

    phases0 = init.phases if init.phases is not None else np.zeros(3)
    y0 = np.concatenate([init.amps, phases0.astype(complex)])
    y = _integrate(rhs, t_span, y0, grid, opts)
    eigen = y[:, :3]
    phases = y[:, 3:].real

    omega = np.asarray(pulse.amplitude(grid), dtype=float)
    vec, _ = _frames_on_grid(params, omega)
    bare = np.einsum("nij,nj->ni", vec, eigen * np.exp(-1j * phases))
    return assemble_record(params, pulse, grid, bare, phases, eigen_amps=eigen)


def evolve_bare(
    params: SystemParams,
    pulse: ControlPulse,
    t_span: tuple[float, float],
    init: StateVector,
    opts: SolverOptions | None = None,
) -> TrajectoryRecord:
    """Integrate i dX/dt = H(t) X directly in the bare basis.

    Works for unequal detunings as well; at two-photon resonance the phases
    X_k are co-integrated so the record carries eigen coefficients too.
    """
    opts = opts or SolverOptions()
    if init.basis != "bare":
        raise ValueError("evolve_bare expects a bare-basis initial state")
    _check_normalized(init)
    grid = _resolve_grid(t_span, opts)

    g = params.g_n
    ds, dc = params.delta_s, params.delta_c
    eip = cmath.exp(1j * params.phi)
    amp, _ = _scalar_pulse(pulse)
    resonant = params.two_photon_resonant
    delta = params.delta if resonant else 0.0

    if resonant:
        def rhs(t, y):
            a, b, c, _x1, _x2, _x3 = y
            w = amp(t)
            oc = w * eip
            omega_r = 0.5 * math.sqrt(delta * delta + 4.0 * (g * g + w * w))
            da = -1j * (g * b - oc * c)
            db = -1j * (g * a + ds * b)
            dcc = -1j * (-oc.conjugate() * a + dc * c)
            return (da, db, dcc, delta, 0.5 * delta + omega_r, 0.5 * delta - omega_r)

        y0 = np.concatenate([init.amps, np.zeros(3, dtype=complex)])
        y = _integrate(rhs, t_span, y0, grid, opts)
        return assemble_record(params, pulse, grid, y[:, :3], y[:, 3:].real)

    def rhs(t, y):
        a, b, c = y
        w = amp(t)
        oc = w * eip
        return (
            -1j * (g * b - oc * c),
            -1j * (g * a + ds * b),
            -1j * (-oc.conjugate() * a + dc * c),
        )

    y = _integrate(rhs, t_span, init.amps, grid, opts)
    return assemble_record(params, pulse, grid, y, None)


def propagate_between(
    params: SystemParams,
    pulse: ControlPulse,
    t1: float,
    t2: float,
    init: StateVector,
    opts: SolverOptions | None = None,
) -> StateVector:
    """Apply the unitary evolution from t1 to t2 under the pulse clock.

    H is evaluated at absolute time, so composing consecutive segments
    reproduces a single longer propagation.
    """
    opts = opts or SolverOptions()
    if init.basis != "bare":
        raise ValueError("propagate_between expects a bare-basis state")
    if t1 < 0.0 or t2 < t1:
        raise ValueError(f"need 0 <= t1 <= t2, got t1={t1}, t2={t2}")
    if t2 == t1:
        return StateVector.bare(init.amps.copy())

    g = params.g_n
    ds, dc = params.delta_s, params.delta_c
    eip = cmath.exp(1j * params.phi)
    amp, _ = _scalar_pulse(pulse)

    def rhs(t, y):
        a, b, c = y
        oc = amp(t) * eip
        return (
            -1j * (g * b - oc * c),
            -1j * (g * a + ds * b),
            -1j * (-oc.conjugate() * a + dc * c),
        )

    grid = np.array([t1, t2])
    y = _integrate(rhs, (t1, t2), init.amps, grid, opts)
    return StateVector.bare(y[-1])


def propagator_solution(
    params: SystemParams,
    pulse: ControlPulse,
    t_end: float,
    opts: SolverOptions | None = None,
    t_start: float = 0.0,
):
    """Dense-output solution for the full 3x3 propagator U(t, t_start).

    Returns the scipy OdeSolution; evaluating it at t and reshaping to (3,3)
    gives U(t).  Two-time propagators follow from U(t, s) = U(t) U(s)^dagger.
    """
    opts = opts or SolverOptions()
    g = params.g_n
    ds, dc = params.delta_s, params.delta_c
    eip = cmath.exp(1j * params.phi)
    amp, _ = _scalar_pulse(pulse)

    def rhs(t, y):
        u = y.reshape(3, 3)
        oc = amp(t) * eip
        h = np.array(
            [[0.0, g, -oc], [g, ds, 0.0], [-oc.conjugate(), 0.0, dc]],
            dtype=complex,
        )
        return (-1j * (h @ u)).ravel()

    sol = solve_ivp(
        rhs,
        (t_start, t_end),
        np.eye(3, dtype=complex).ravel(),
        method="DOP853",
        rtol=opts.rel_tol,
        atol=opts.abs_tol,
        max_step=opts.max_step,
        dense_output=True,
    )
    if not sol.success:
        raise IntegrationError(sol.message, float(sol.t[-1]) if sol.t.size else t_start)
    return sol.sol
