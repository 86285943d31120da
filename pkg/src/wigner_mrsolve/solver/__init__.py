"""Time integration, stationary states and coefficient compression for the reduced system."""

from .integrate import (
    BoundaryWarning, CompressionResult, EvolutionSchedule, StabilityEstimate, StabilityWarning,
    Trajectory, build_operator, evolve, stability_estimate, step_rk4, threshold_compress,
)
from .steady import SteadyStateResult, folded_order, steady_state

__all__ = [
    "BoundaryWarning", "CompressionResult", "EvolutionSchedule", "StabilityEstimate",
    "StabilityWarning", "SteadyStateResult", "Trajectory", "build_operator", "evolve",
    "folded_order", "stability_estimate", "steady_state", "step_rk4", "threshold_compress",
]
