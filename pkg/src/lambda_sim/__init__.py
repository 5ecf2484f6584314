"""Exact storage/retrieval dynamics of a Lambda atom in a driven cavity."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    ControlPulse,
    EigenFrame,
    StateVector,
    SystemParams,
    angle_rates,
    bare_to_eigen,
    dark_state,
    eigen_to_bare,
    eigenframe,
    hamiltonian_matrix,
    mixing_angles,
    nonadiabatic_couplings,
    pulse_amplitude,
    pulse_derivative,
)
from .propagator import (  # noqa: F401
    IntegrationError,
    SolverOptions,
    TrajectoryRecord,
    evolve_bare,
    evolve_eigenbasis,
    propagate_between,
)
from .dissipative import (  # noqa: F401
    DissipativeState,
    eigen_coefficients,
    evolve_dissipative,
    poisson_weight,
    quadrature_oracle,
)
from .diagnostics import (  # noqa: F401
    OregVectors,
    ReadoutResult,
    berry_retrieval_fidelity,
    fidelity,
    oreg_d1,
    oreg_vectors,
    populations,
    steady_state_readout,
)
from .densitymatrix import (  # noqa: F401
    DensityTrajectory,
    DiscrepancyReport,
    JumpRecord,
    MonteCarloResult,
    evolve_master,
    model_discrepancy,
    monte_carlo_ensemble,
    preset_discrepancy_reports,
    sample_jumps,
    trace_distance,
)
from .harness import RunSpec, SweepSpec, execute_run  # noqa: F401
