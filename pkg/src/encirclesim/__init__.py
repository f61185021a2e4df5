"""Two-agent encirclement of a non-cooperative, impulsively escaping target.

Range-only recursive least-squares target localization, an anti-synchronization
circling controller, a deterministic discrete-time closed loop, and the
analysis machinery (convergence gates, excitation bounds, recursion checks)
to validate runs against the underlying theory.
"""

from .scenario import (
    ControllerParams,
    EstimatorParams,
    ScenarioConfig,
    ScenarioError,
    TargetMotionParams,
    load_scenario,
    reference_scenario,
    save_scenario,
)
from .simulate import SimEngine, SimulationResult, StepRecord, run_scenario

__all__ = [
    "ControllerParams",
    "EstimatorParams",
    "ScenarioConfig",
    "ScenarioError",
    "SimEngine",
    "SimulationResult",
    "StepRecord",
    "TargetMotionParams",
    "load_scenario",
    "reference_scenario",
    "run_scenario",
    "save_scenario",
]

__version__ = "0.1.0"
