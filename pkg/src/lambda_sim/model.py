"""Three-level Lambda atom coupled to a cavity mode and a classical control field.

Everything here is expressed in internal units where the control amplitude
scale Omega_0 = 1 and time is measured in 1/Omega_0.  The truncated basis is
(a, b, c) = (|a,n>, |b,n+1>, |c,n>): the excited level with n cavity photons
and the two lower levels it is coupled to by the quantized signal mode (rate
g_n = g0*sqrt(n+1)) and the control field Omega_C(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT1_2 = math.sqrt(0.5)

STORAGE = "storage"
RETRIEVAL = "retrieval"
CONSTANT = "constant"

BARE = "bare"
EIGEN = "eigen"


@dataclass(frozen=True)
class SystemParams:
    """Scaled physical constants of one storage/retrieval run.

    All rates are in units of Omega_0, time in 1/Omega_0.

    Attributes
    ----------
    g0 : signal (cavity) Rabi coupling.
    r : switching rate of the control pulse.
    gamma : spontaneous decay rate of the excited level.
    delta_s, delta_c : signal and control detunings.
    n : photon number of the signal manifold.
    phi : constant phase of the control field.
    omega0 : control amplitude scale (1 in internal units).
    """

    g0: float
    r: float
    gamma: float = 0.0
    delta_s: float = 0.0
    delta_c: float = 0.0
    n: int = 0
    phi: float = 0.0
    omega0: float = 1.0

    def __post_init__(self):
        if self.g0 <= 0.0:
            raise ValueError(f"g0 must be positive, got {self.g0}")
        if self.r <= 0.0:
            raise ValueError(f"r must be positive, got {self.r}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if self.n < 0 or int(self.n) != self.n:
            raise ValueError(f"n must be a non-negative integer, got {self.n}")
        if self.omega0 <= 0.0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")

    @property
    def g_n(self) -> float:
        """Effective signal coupling g0*sqrt(n+1); strictly positive."""
        return self.g0 * math.sqrt(self.n + 1)

    @property
    def two_photon_resonant(self) -> bool:
        return self.delta_s == self.delta_c

    @property
    def delta(self) -> float:
        """Common detuning at two-photon resonance."""
        if not self.two_photon_resonant:
            raise ValueError(
                "delta is only defined at two-photon resonance "
                f"(delta_s={self.delta_s}, delta_c={self.delta_c})"
            )
        return self.delta_s


@dataclass(frozen=True)
class ControlPulse:
    """Control-field protocol Omega_C(t) for t >= 0.

    kind is one of ``storage`` (omega0*(1 - tanh(r t)), switches off),
    ``retrieval`` (omega0*tanh(r t), switches on) or ``constant`` (fixed
    ``level``).
    """

    kind: str
    r: float
    omega0: float = 1.0
    level: float = 0.0

    def __post_init__(self):
        if self.kind not in (STORAGE, RETRIEVAL, CONSTANT):
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        if self.r <= 0.0:
            raise ValueError(f"r must be positive, got {self.r}")
        if self.level < 0.0:
            raise ValueError(f"level must be non-negative, got {self.level}")

    @classmethod
    def storage(cls, params: SystemParams) -> "ControlPulse":
        return cls(STORAGE, params.r, params.omega0)

    @classmethod
    def retrieval(cls, params: SystemParams) -> "ControlPulse":
        return cls(RETRIEVAL, params.r, params.omega0)

    @classmethod
    def constant(cls, params: SystemParams, level: float) -> "ControlPulse":
        return cls(CONSTANT, params.r, params.omega0, level=level)

    def amplitude(self, t):
        """Omega_C(t); accepts scalars or arrays, rejects negative times."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0):
            raise ValueError("pulse amplitude is only defined for t >= 0")
        if self.kind == STORAGE:
            val = self.omega0 * (1.0 - np.tanh(self.r * t))
        elif self.kind == RETRIEVAL:
            val = self.omega0 * np.tanh(self.r * t)
        else:
            val = np.full_like(t, self.level)
        return float(val) if val.ndim == 0 else val

    def derivative(self, t):
        """Analytic d Omega_C/dt; same domain rules as amplitude."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0):
            raise ValueError("pulse derivative is only defined for t >= 0")
        if self.kind == STORAGE:
            val = -self.omega0 * self.r / np.cosh(self.r * t) ** 2
        elif self.kind == RETRIEVAL:
            val = self.omega0 * self.r / np.cosh(self.r * t) ** 2
        else:
            val = np.zeros_like(t)
        return float(val) if val.ndim == 0 else val

    @property
    def saturation_time(self) -> float:
        """Time after which the pulse is flat to ~4e-7*omega0."""
        return 8.0 / self.r


def pulse_amplitude(pulse: ControlPulse, t):
    return pulse.amplitude(t)


def pulse_derivative(pulse: ControlPulse, t):
    return pulse.derivative(t)


def mixing_angles(params: SystemParams, omega_c: float) -> tuple[float, float]:
    """Mixing angles (theta, psi) at control amplitude omega_c.

    theta = atan2(g_n, omega_c) in (0, pi/2], exactly pi/2 at omega_c = 0.
    psi parameterizes the bright-excited sector, in (0, pi); pi/2 on optical
    resonance.  The branch is fixed so the eigenvector list below
    diagonalizes the Hamiltonian for every detuning.
    """
    if omega_c < 0.0:
        raise ValueError("omega_c must be non-negative")
    theta = math.atan2(params.g_n, omega_c)
    omega_eff = math.hypot(params.g_n, omega_c)
    psi = math.atan2(omega_eff, -0.5 * params.delta)
    return theta, psi


def hamiltonian_matrix(params: SystemParams, omega_c: float) -> np.ndarray:
    """Rotating-frame Hamiltonian in the (a, b, c) basis.

    Rows: (0, g_n, -Omega_C), (g_n, Delta_S, 0), (-Omega_C*, 0, Delta_C),
    with the complex control Omega_C = omega_c * exp(i phi).  Hermitian for
    real omega_c.  Detunings need not be equal here.
    """
    oc = omega_c * np.exp(1j * params.phi)
    g = params.g_n
    return np.array(
        [
            [0.0, g, -oc],
            [g, params.delta_s, 0.0],
            [-np.conj(oc), 0.0, params.delta_c],
        ],
        dtype=complex,
    )


@dataclass(frozen=True)
class EigenFrame:
    """Instantaneous spectral data of H at one instant.

    ``lambdas`` holds (lambda_1, lambda_2, lambda_3) ordered (dark, +, -);
    ``vectors`` has the orthonormal eigenvectors as columns, u_k =
    vectors[:, k].  The dark state u_1 has exactly zero weight on the
    excited bare level.
    """

    t: float
    theta: float
    psi: float
    lambdas: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        self.lambdas.setflags(write=False)
        self.vectors.setflags(write=False)

    @property
    def dark_vector(self) -> np.ndarray:
        return self.vectors[:, 0]


def eigenframe(params: SystemParams, omega_c: float, t: float = 0.0) -> EigenFrame:
    """Analytic eigenvalues/eigenvectors of H at two-photon resonance.

    lambda_1 = Delta, lambda_{2,3} = Delta/2 +/- Omega_R with
    Omega_R = sqrt(Delta^2 + 4*Omega_eff^2)/2 and
    Omega_eff = sqrt(g_n^2 + omega_c^2).  No general eigensolver involved.
    """
    delta = params.delta
    theta, psi = mixing_angles(params, omega_c)
    omega_eff_sq = params.g_n**2 + omega_c**2
    omega_r = 0.5 * math.sqrt(delta**2 + 4.0 * omega_eff_sq)
    lambdas = np.array([delta, 0.5 * delta + omega_r, 0.5 * delta - omega_r])

    if omega_c == 0.0:
        ct, st = 0.0, 1.0  # theta = pi/2 exactly; keep the dark state at |c>
    else:
        ct, st = math.cos(theta), math.sin(theta)
    ch, sh = math.cos(0.5 * psi), math.sin(0.5 * psi)
    eip = np.exp(1j * params.phi)
    u1 = np.array([0.0, ct * eip, st], dtype=complex)
    u2 = np.array([ch, sh * st, -sh * ct * np.conj(eip)], dtype=complex)
    u3 = np.array([-sh, ch * st, -ch * ct * np.conj(eip)], dtype=complex)
    return EigenFrame(
        t=t, theta=theta, psi=psi, lambdas=lambdas,
        vectors=np.column_stack([u1, u2, u3]),
    )


def angle_rates(params: SystemParams, omega_c: float, domega: float) -> tuple[float, float]:
    """Exact analytic (theta_dot, psi_dot) given omega_c and its time derivative.

    theta_dot = -g_n/(g_n^2 + omega_c^2) * dOmega_C/dt; psi_dot vanishes
    identically on optical resonance.
    """
    g = params.g_n
    denom = g * g + omega_c * omega_c
    theta_dot = -g * domega / denom
    delta = params.delta
    if delta == 0.0:
        psi_dot = 0.0
    else:
        omega_eff = math.sqrt(denom)
        psi_dot = -2.0 * delta * omega_c * domega / (omega_eff * (delta * delta + 4.0 * denom))
    return theta_dot, psi_dot


def nonadiabatic_couplings(
    frame: EigenFrame, theta_dot: float, psi_dot: float, phi: float = 0.0
) -> np.ndarray:
    """Coupling table K[m, k] = <u_m | d/dt u_k> for the frame's instant.

    Nonzero entries: K[0,1] = theta_dot*sin(psi/2)*e^{-i phi},
    K[0,2] = theta_dot*cos(psi/2)*e^{-i phi}, K[1,2] = -psi_dot/2.  The table
    is anti-Hermitian with zero diagonal (all gauge phases vanish).
    """
    sh, ch = math.sin(0.5 * frame.psi), math.cos(0.5 * frame.psi)
    emip = np.exp(-1j * phi)
    k12 = theta_dot * sh * emip
    k13 = theta_dot * ch * emip
    k23 = complex(-0.5 * psi_dot)
    return np.array(
        [
            [0.0, k12, k13],
            [-np.conj(k12), 0.0, k23],
            [-np.conj(k13), -np.conj(k23), 0.0],
        ],
        dtype=complex,
    )


@dataclass(frozen=True)
class StateVector:
    """Three complex amplitudes tagged with their basis.

    In the ``bare`` basis amps = (a, b, c) rotating-frame components; in the
    ``eigen`` basis amps are the slowly varying coefficients (V_k or W_k) and
    ``phases`` carries the accumulated dynamical phases X_k(t) = int lambda_k.
    """

    basis: str
    amps: np.ndarray
    phases: np.ndarray | None = None

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (3,):
            raise ValueError("state needs exactly three amplitudes")
        object.__setattr__(self, "amps", amps)
        if self.phases is not None:
            phases = np.asarray(self.phases, dtype=float)
            if phases.shape != (3,):
                raise ValueError("need exactly three accumulated phases")
            object.__setattr__(self, "phases", phases)
        if self.basis not in (BARE, EIGEN):
            raise ValueError(f"unknown basis {self.basis!r}")

    @classmethod
    def bare(cls, amps) -> "StateVector":
        return cls(BARE, np.asarray(amps, dtype=complex))

    @classmethod
    def eigen(cls, amps, phases=(0.0, 0.0, 0.0)) -> "StateVector":
        return cls(EIGEN, np.asarray(amps, dtype=complex), np.asarray(phases, dtype=float))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def dark_state(params: SystemParams, omega_c: float) -> StateVector:
    """Bare-basis dark state at the given control amplitude."""
    return StateVector.bare(eigenframe(params, omega_c).dark_vector)


def eigen_to_bare(frame: EigenFrame, state: StateVector) -> StateVector:
    """Reconstruct bare amplitudes from eigenbasis coefficients.

    bare = sum_k amps_k * exp(-i X_k) * u_k(t); unitary, so the norm is
    preserved exactly.
    """
    if state.basis != EIGEN:
        raise ValueError("eigen_to_bare expects an eigen-basis state")
    if state.phases is None:
        raise ValueError("eigen-basis state must carry accumulated phases")
    bare = frame.vectors @ (state.amps * np.exp(-1j * state.phases))
    return StateVector.bare(bare)


def bare_to_eigen(frame: EigenFrame, state: StateVector, phases) -> StateVector:
    """Project a bare state onto the instantaneous eigenvectors.

    amps_k = <u_k | state> * exp(+i X_k); inverse of eigen_to_bare.
    """
    if state.basis != BARE:
        raise ValueError("bare_to_eigen expects a bare-basis state")
    phases = np.asarray(phases, dtype=float)
    amps = (frame.vectors.conj().T @ state.amps) * np.exp(1j * phases)
    return StateVector(EIGEN, amps, phases)
