"""Non-smooth mechanics toolkit: prox-based Moreau time-stepping for rigid
multibody systems with set-valued friction/contact laws, two reference
models (frictional oscillator, frictional Furuta pendulum) and impulse-based
stabilizing controllers."""

from .errors import (
    EstimatorError,
    NumericalError,
    ParameterError,
    ProxstepError,
    ScenarioError,
    SetValuedCaseError,
    SingularConfigurationError,
)
from .sets import (
    FULL_LINE,
    NONNEG_HALF_LINE,
    Branch,
    ConvexSet,
    ProxResidual,
    SetKind,
    coulomb_sliding_force,
    disc,
    prox,
    prox_residual,
)
from .stepper import (
    ImpulseSolveReport,
    MechanicalModel,
    Mode,
    State,
    StepperConfig,
    Trajectory,
    apply_velocity_jump,
    integrate,
    midpoint_config,
    solve_impulses,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "ConvexSet",
    "EstimatorError",
    "FULL_LINE",
    "ImpulseSolveReport",
    "MechanicalModel",
    "Mode",
    "NONNEG_HALF_LINE",
    "NumericalError",
    "ParameterError",
    "ProxResidual",
    "ProxstepError",
    "ScenarioError",
    "SetKind",
    "SetValuedCaseError",
    "SingularConfigurationError",
    "State",
    "StepperConfig",
    "Trajectory",
    "apply_velocity_jump",
    "coulomb_sliding_force",
    "disc",
    "integrate",
    "midpoint_config",
    "prox",
    "prox_residual",
    "solve_impulses",
    "step",
]
