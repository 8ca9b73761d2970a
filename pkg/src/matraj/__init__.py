"""Collision-free trajectory planning for movable antennas."""
from .assign import Assignment, bottleneck_assignment, brute_force_assignment, distance_matrix, matching_exists
from .core import FeasibilityReport, Region, Scenario, Trajectory, validate_scenario
from .line import check_inter_ma_distance, lower_bound_delay, straight_line_trajectory
from .sca import ScaConfig, Solution, rma_solve, sca_refine, slm_solve, two_stage_solve

__all__ = [
    "Assignment", "bottleneck_assignment", "brute_force_assignment", "distance_matrix", "matching_exists",
    "FeasibilityReport", "Region", "Scenario", "Trajectory", "validate_scenario",
    "check_inter_ma_distance", "lower_bound_delay", "straight_line_trajectory",
    "ScaConfig", "Solution", "rma_solve", "sca_refine", "slm_solve", "two_stage_solve",
]
