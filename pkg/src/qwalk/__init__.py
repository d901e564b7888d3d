"""Discrete-time coined quantum walks on a line with tunable dephasing and absorbers."""

from .analysis import (
    EscapeEstimate,
    FitResult,
    SpreadStats,
    binomial_reference,
    escape_probability,
    fit_decoherence,
    l1_distance,
    spread_stats,
    spreading_exponent,
)
from .apparatus import (
    CalibrationModel,
    element_count,
    misalignment_to_visibility,
    q_from_visibility,
    survival_probability,
    visibility_from_q,
)
from .lattice import (
    AbsorptionRecord,
    CoinOperator,
    CoinState,
    DensityState,
    Distribution,
    PureState,
    Step,
    StepSchedule,
    WalkRecord,
    WindowOverflowError,
    apply_absorber,
    coin_state,
    dephase,
    evolve,
    hadamard_coin,
    position_distribution,
    shift_apply,
    step_density,
    step_pure,
    uniform_schedule,
    waveplate_unitary,
)
from .trajectories import TrajectoryEnsemble, sample_trajectories

__version__ = "0.1.0"
