"""Probabilistic supports, covering ellipsoids, the invariant-ellipsoid SDP and reach sets."""
from .ellipsoid import Ellipsoid, MveeResult, cover_support, mvee
from .reachset import (
    ReachSweep,
    clamp_to,
    draw_from_support,
    lyapunov_level,
    monte_carlo_reach,
    project_state,
    reach_ellipsoid,
    sweep_a,
    unclamped_reach,
)
from .sdp import SdpSolution, input_weight, lmi_matrix, solve_cell, solve_p2
from .support import (
    SupportRegion,
    lower_bound_L,
    markov_mass_bound,
    support_mass_bound,
    support_membership,
)

__all__ = [
    "Ellipsoid", "MveeResult", "cover_support", "mvee", "ReachSweep", "clamp_to", "draw_from_support",
    "lyapunov_level", "monte_carlo_reach", "project_state", "reach_ellipsoid", "sweep_a", "unclamped_reach",
    "SdpSolution", "input_weight", "lmi_matrix", "solve_cell", "solve_p2", "SupportRegion", "lower_bound_L",
    "markov_mass_bound", "support_mass_bound", "support_membership",
]
