"""Fidelity, populations, steady-state readout and adiabaticity indicators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import BARE, EIGEN, ControlPulse, EigenFrame, StateVector, SystemParams
from .propagator import TrajectoryRecord


def fidelity(frame: EigenFrame, state: StateVector) -> float:
    """Overlap magnitude |<u_1(t)|Psi(t)>| with the instantaneous dark state."""
    if state.basis == EIGEN:
        return float(abs(state.amps[0]))
    return float(abs(np.vdot(frame.dark_vector, state.amps)))


def populations(state: StateVector) -> tuple[float, float, float]:
    """Bare-level probabilities (|a|^2, |b|^2, |c|^2)."""
    if state.basis != BARE:
        raise ValueError("populations are defined for bare-basis states")
    p = np.abs(state.amps) ** 2
    return float(p[0]), float(p[1]), float(p[2])


def berry_retrieval_fidelity(g0: float, r: float, omega0: float = 1.0) -> float:
    """Superadiabatic closed-form retrieval fidelity without dissipation.

    1 - P_inf with P_inf = exp(-2 pi (sqrt(omega0^2 + g0^2) - omega0)/r),
    the asymptotic transfer probability out of the dark state for the
    tanh switching protocol.
    """
    if g0 <= 0.0 or r <= 0.0:
        raise ValueError("g0 and r must be positive")
    p_inf = math.exp(-2.0 * math.pi * (math.hypot(omega0, g0) - omega0) / r)
    return 1.0 - p_inf


@dataclass(frozen=True)
class OregVectors:
    """SU(3) coherence vector S of the dark state and the stationary direction."""

    s: np.ndarray
    gamma1: np.ndarray
    d1: float

    def __post_init__(self):
        self.s.setflags(write=False)
        self.gamma1.setflags(write=False)


def oreg_vectors(params: SystemParams, omega_c: float) -> OregVectors:
    """Eight-component vectors S and Gamma_1 for the dark state.

    S = (0, 0, -sin 2theta, 0, 0, 0, cos^2 theta, (1 - 3 sin^2 theta)/sqrt 3),
    Gamma_1 = (-g_n, -Omega_C, 0, 0, 0, 0, Delta, -Delta/sqrt 3) normalized
    by sqrt(g_n^2 + Omega_C^2 + 4 Delta^2/3).
    """
    g = params.g_n
    delta = params.delta
    theta = math.atan2(g, omega_c)
    st, ct = math.sin(theta), math.cos(theta)
    s = np.array(
        [0.0, 0.0, -math.sin(2.0 * theta), 0.0, 0.0, 0.0,
         ct * ct, (1.0 - 3.0 * st * st) / math.sqrt(3.0)]
    )
    norm = math.sqrt(g * g + omega_c * omega_c + 4.0 * delta * delta / 3.0)
    gamma1 = np.array(
        [-g, -omega_c, 0.0, 0.0, 0.0, 0.0, delta, -delta / math.sqrt(3.0)]
    ) / norm
    return OregVectors(s=s, gamma1=gamma1, d1=oreg_d1(params, omega_c))


def oreg_d1(params: SystemParams, omega_c: float) -> float:
    """Projection D_1 = S . Gamma_1; vanishes identically on resonance.

    The dot product collapses to (2 Delta / 3) / sqrt(g^2 + Omega_C^2 +
    4 Delta^2 / 3), so D_1 = 0 exactly when Delta = 0.
    """
    delta = params.delta
    if delta == 0.0:
        return 0.0
    g = params.g_n
    norm = math.sqrt(g * g + omega_c * omega_c + 4.0 * delta * delta / 3.0)
    return (2.0 * delta / 3.0) / norm


@dataclass(frozen=True)
class ReadoutResult:
    """Steady-state values of one trajectory plus a saturation check."""

    f_final: float
    populations: tuple[float, float, float]
    t_readout: float
    saturation_drift: float


def steady_state_readout(traj: TrajectoryRecord, pulse: ControlPulse) -> ReadoutResult:
    """Read fidelity/populations at t = 8/r and report the late-time drift.

    The drift is max |F(t) - F_final| over t in [4/r, 8/r]; the pulse is flat
    to ~4e-7 on that window, so any residual drift measures non-saturation.
    """
    t_readout = 8.0 / pulse.r
    times = traj.times
    if times[-1] < t_readout - 1e-9:
        raise ValueError(
            f"trajectory ends at t={times[-1]:g}, before the readout time {t_readout:g}"
        )
    idx = int(np.argmin(np.abs(times - t_readout)))
    f_final = float(traj.fidelity[idx])
    pops = tuple(float(x) for x in traj.populations[idx])
    window = (times >= 4.0 / pulse.r) & (times <= t_readout + 1e-9)
    drift = float(np.max(np.abs(traj.fidelity[window] - f_final))) if np.any(window) else 0.0
    return ReadoutResult(
        f_final=f_final, populations=pops, t_readout=float(times[idx]),
        saturation_drift=drift,
    )
