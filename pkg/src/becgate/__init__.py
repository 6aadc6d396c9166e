"""Geometric-phase entangling gate for two collective spins in a driven cavity.

Simulation library covering the spin-sector displacement trajectories, the
entangling phase (quadrature, Taylor coefficients and closed forms), the
two-stage composition cancelling the squeezing terms, the remnant-offset
decoherence model with logarithmic negativity, and experimental rate bounds.
"""

from .errors import (
    BecGateError,
    JacobiConvergenceError,
    NumericalCheckError,
    PhaseCancellationError,
    ValidationError,
)
from .feasibility import (
    CavityParams,
    FeasibilityReport,
    effective_decoherence,
    feasibility_report,
    max_photon_number,
    min_detuning,
)
from .model import (
    ProtocolParams,
    SpinSector,
    SpinState,
    all_sectors,
    coherent_spin_state,
    sector_frequency,
    sector_frequency_index,
    spin_levels,
)
from .phase import (
    PhaseCoefficients,
    PhaseTable,
    design_drive,
    geometric_phase_quadrature,
    phase_coefficients_closed,
    phase_coefficients_numeric,
    stage1_phase_table,
    stage2_phase_table,
    total_phase_table,
)
from .state import (
    EntanglementReport,
    JointDensityMatrix,
    RemnantModel,
    apply_phase_gate,
    coherent_overlap,
    exact_oracle_evolve,
    log_negativity,
    partial_transpose,
    pure_state_negativity_oracle,
    reduced_density,
)
from .trajectory import (
    DrivePulse,
    Trajectory,
    closure_residual,
    integrate_trajectory,
    rotating_frame_convert,
    trajectory_to_csv,
)

__version__ = "0.1.0"
