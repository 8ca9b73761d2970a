from .feasibility import Frame, LinearCuts
from .minorant import AffineMinorant, linearize_distance_sq
from .solver import (
    ConstraintAuditError,
    IterationRecord,
    ScaConfig,
    Solution,
    SubproblemInfeasible,
    SubproblemResult,
    build_cuts,
    lower_bound_solution,
    rma_solve,
    sca_refine,
    slm_solve,
    solve_subproblem,
    subproblem_feasible,
    two_stage_solve,
)
