"""Approval envy for indivisible goods: levels, exact solvers, MIP export and
house allocation."""
from .core import Allocation, CapacityError, Instance, normalize
from .dynamics import ef_from_two_app_ef, find_weakly_improving_swap
from .envy import AllocationLevel, allocation_level, approval_count, weighted_envy_graph
from .hap import solve_hap
from .mip import build_model, check_assignment, export_lp
from .solver import BudgetExceeded, SolveResult, exists_k_app_ef, solve_min_k

__all__ = [
    "Allocation", "AllocationLevel", "BudgetExceeded", "CapacityError", "Instance", "SolveResult",
    "allocation_level", "approval_count", "build_model", "check_assignment", "ef_from_two_app_ef",
    "exists_k_app_ef", "export_lp", "find_weakly_improving_swap", "normalize", "solve_hap",
    "solve_min_k", "weighted_envy_graph",
]
