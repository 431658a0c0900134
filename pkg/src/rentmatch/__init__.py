"""Online bipartite matching with reusable offline resources.

A primal-dual outer algorithm proposes one or two offline neighbors per
arrival; an online correlated rounding (OCR) selector picks one of them.
"""

from .accounting import Ledger, Params, accounting_update, best_query
from .factorlp import analytic_params, check_grid, constraint_residuals, solve_factor_lp
from .instance import (Instance, InstanceError, gen_integrality_gap, gen_random, gen_upper_triangular,
                       load_instance, single_edge)
from .ocr import SelectorState, TagKind, apply_availability, ocr_step, run_selector
from .offline import exact_opt, lp_upper_bound, solve_lp
from .outer import (dual_feasibility_audit, matched_count_samples, plan_queries, run_greedy,
                    run_primal_dual)
from .verify import check_ocr_guarantee, check_reversal, enumerate_exact_dmu, estimate_dmu

__all__ = [
    "Instance", "InstanceError", "Ledger", "Params", "SelectorState", "TagKind",
    "accounting_update", "analytic_params", "apply_availability", "best_query", "check_grid",
    "check_ocr_guarantee", "check_reversal", "constraint_residuals", "dual_feasibility_audit",
    "enumerate_exact_dmu", "estimate_dmu", "exact_opt", "gen_integrality_gap", "gen_random",
    "gen_upper_triangular", "load_instance", "lp_upper_bound", "matched_count_samples", "ocr_step",
    "plan_queries", "run_greedy", "run_primal_dual", "run_selector", "single_edge", "solve_factor_lp",
    "solve_lp",
]
