"""Spontaneous-decay dynamics via the resummed collapse-history wavefunction.

The unnormalized state is the coherent sum over Poisson-distributed collapse
histories,

    phi(t) = e^{-Gamma t} U(t) psi0
             + (Gamma/2) int_0^t dt1 (1 - e^{-Gamma t1}) e^{-Gamma (t-t1)}
               U(t, t1) (e_b + e_c),

and the physical state is phi/Z with Z = ||phi||.  Differentiating the
integral gives an equivalent inhomogeneous linear ODE,

    dphi/dt = -(i H(t) + Gamma) phi + (Gamma/2) (1 - e^{-Gamma t}) (e_b + e_c),

which is what ``evolve_dissipative`` integrates (O(T) cost).  The direct
quadrature of the integral is kept as an independent oracle.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .model import ControlPulse, StateVector, SystemParams
from .propagator import (
    DegenerateNormError,
    SolverOptions,
    TrajectoryRecord,
    _integrate,
    _resolve_grid,
    _scalar_pulse,
    assemble_record,
    propagator_solution,
)

_SOURCE = np.array([0.0, 1.0, 1.0], dtype=complex)  # e_b + e_c


@dataclass(frozen=True)
class DissipativeState:
    """Unnormalized amplitudes phi(t), their norm Z, and the time stamp."""

    phi_unnormalized: np.ndarray
    Z: float
    t: float

    @property
    def normalized(self) -> np.ndarray:
        if self.Z < 1e-14:
            raise DegenerateNormError(self.t)
        return self.phi_unnormalized / self.Z


def evolve_dissipative(
    params: SystemParams,
    pulse: ControlPulse,
    t_span: tuple[float, float],
    init: StateVector,
    opts: SolverOptions | None = None,
) -> TrajectoryRecord:
    """Integrate the resummed-wavefunction ODE and return a normalized record.

    With gamma = 0 the source vanishes and the result coincides with
    ``evolve_bare``.  The record's ``norm`` column is Z(t).
    """
    opts = opts or SolverOptions()
    if init.basis != "bare":
        raise ValueError("evolve_dissipative expects a bare-basis initial state")
    if abs(init.norm - 1.0) > 1e-8:
        raise ValueError("initial state must be normalized")
    grid = _resolve_grid(t_span, opts)

    g = params.g_n
    gamma = params.gamma
    ds, dc = params.delta_s, params.delta_c
    eip = cmath.exp(1j * params.phi)
    amp, _ = _scalar_pulse(pulse)
    resonant = params.two_photon_resonant
    delta = params.delta if resonant else 0.0
    half_gamma = 0.5 * gamma

    def rhs(t, y):
        a, b, c, _x1, _x2, _x3 = y
        w = amp(t)
        oc = w * eip
        src = half_gamma * (1.0 - math.exp(-gamma * t)) if gamma > 0.0 else 0.0
        omega_r = 0.5 * math.sqrt(delta * delta + 4.0 * (g * g + w * w))
        da = -1j * (g * b - oc * c) - gamma * a
        db = -1j * (g * a + ds * b) - gamma * b + src
        dcc = -1j * (-oc.conjugate() * a + dc * c) - gamma * c + src
        return (da, db, dcc, delta, 0.5 * delta + omega_r, 0.5 * delta - omega_r)

    y0 = np.concatenate([init.amps, np.zeros(3, dtype=complex)])
    y = _integrate(rhs, t_span, y0, grid, opts)
    phases = y[:, 3:].real if resonant else None
    return assemble_record(params, pulse, grid, y[:, :3], phases)


def quadrature_oracle(
    params: SystemParams,
    pulse: ControlPulse,
    t: float,
    init: StateVector,
    opts: SolverOptions | None = None,
    n_quad: int = 512,
) -> DissipativeState:
    """Evaluate the collapse-history integral directly at time t.

    Composite trapezoid over n_quad intervals; each node needs the two-time
    propagator U(t, t1), obtained from one dense propagator solve via
    U(t, t1) = U(t) U(t1)^dagger.  Converges to the ODE solution as
    n_quad -> infinity at second order.
    """
    opts = opts or SolverOptions()
    if n_quad < 16:
        raise ValueError("n_quad must be at least 16")
    if init.basis != "bare":
        raise ValueError("quadrature_oracle expects a bare-basis initial state")
    gamma = params.gamma

    usol = propagator_solution(params, pulse, t, opts)
    u_t = usol(t).reshape(3, 3)
    phi = math.exp(-gamma * t) * (u_t @ init.amps)

    if gamma > 0.0:
        nodes = np.linspace(0.0, t, n_quad + 1)
        u_nodes = usol(nodes).T.reshape(-1, 3, 3)
        # U(t, t1) s = U(t) (U(t1)^dagger s), batched over nodes
        vecs = np.einsum("ij,nkj,k->ni", u_t, u_nodes.conj(), _SOURCE)
        weights = (1.0 - np.exp(-gamma * nodes)) * np.exp(-gamma * (t - nodes))
        integral = np.trapezoid(weights[:, None] * vecs, nodes, axis=0)
        phi = phi + 0.5 * gamma * integral

    z = float(np.linalg.norm(phi))
    return DissipativeState(phi_unnormalized=phi, Z=z, t=t)


def eigen_coefficients(traj: TrajectoryRecord, frames=None) -> np.ndarray:
    """Eigenbasis coefficients W_k(t) = <u_k(t)|Psi(t)> e^{+i X_k(t)}.

    ``frames`` may supply precomputed (N,3,3) eigenvector stacks; otherwise
    they are rebuilt from the record's pulse.  Completeness gives
    sum_k |W_k|^2 = 1 at every time.
    """
    from .propagator import _frames_on_grid

    if frames is None:
        omega = np.asarray(traj.pulse.amplitude(traj.times), dtype=float)
        frames, _ = _frames_on_grid(traj.params, omega)
    proj = np.einsum("nij,nj->ni", frames.conj().transpose(0, 2, 1), traj.bare_amps)
    return proj * np.exp(1j * traj.phases)


def poisson_weight(l: int, t: float, gamma: float) -> float:
    """Probability that exactly l collapses occurred up to time t.

    P_l(t) = (Gamma t)^l / l! * e^{-Gamma t}; the weights over l >= 1 sum to
    1 - e^{-Gamma t}.
    """
    if l < 0 or int(l) != l:
        raise ValueError("l must be a non-negative integer")
    if t < 0.0:
        raise ValueError("t must be non-negative")
    x = gamma * t
    if x == 0.0:
        return 1.0 if l == 0 else 0.0
    return x**l / math.factorial(l) * math.exp(-x)
