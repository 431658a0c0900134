"""Primal-dual outer algorithm, the greedy baseline, and the dual audit.

Each arriving online vertex proposes the query (one or two neighbors) that
maximizes its online dual increment, books the guaranteed match mass in the
ledger, asks the selector for one vertex, and matches it if it is free.  The
queries and the ledger are functions of (instance, params) only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import simulate
from .accounting import Ledger, Params, accounting_update, best_query
from .instance import Instance
from .ocr import SelectorState, apply_availability, ocr_step, uniform_step

EXACT_THRESHOLD = 10_000  # d * |U| at or below this runs the ledger in exact rationals


@dataclass
class Plan:
    queries: list[Optional[tuple[int, ...]]]
    ledger: Ledger
    params: Params


@dataclass
class RunResult:
    matched_count: int
    primal: object
    dual: object
    query_trace: list[Optional[tuple[int, ...]]]
    audit: float
    seed: object
    matched: list[bool]
    selected: list[Optional[int]]
    ledger: Ledger


def resolve_params(params: Params, inst: Instance, exact: Optional[bool] = None) -> Params:
    if exact is None:
        exact = inst.duration * inst.num_online <= EXACT_THRESHOLD
    return params.as_fraction() if exact else params.as_float()


def plan_queries(inst: Instance, params: Params, exact: Optional[bool] = None,
                 shortcut_degree: int = 64) -> Plan:
    params = resolve_params(params, inst, exact)
    ledger = Ledger(inst.num_offline, inst.duration, exact=params.exact)
    queries: list[Optional[tuple[int, ...]]] = []
    for j, nb in enumerate(inst.arrivals):
        if not nb:
            queries.append(None)
            continue
        q, _ = best_query(ledger, j, nb, params, shortcut_degree=shortcut_degree)
        accounting_update(ledger, j, q, params)
        queries.append(q)
    return Plan(queries, ledger, params)


def edge_residuals(ledger: Ledger, inst: Instance, Gamma) -> dict[tuple[int, int], object]:
    """beta_j + sum of alpha_{i,t} over t in [j-d+1, j], minus Gamma, for every edge."""
    d = inst.duration
    zero = ledger.zero
    out = {}
    for i, j in inst.edges:
        lhs = ledger.beta.get(j, zero)
        for t in range(max(j - d + 1, 0), j + 1):
            lhs += ledger.alpha.get((i, t), zero)
        out[(i, j)] = lhs - Gamma
    return out


def dual_feasibility_audit(ledger: Ledger, inst: Instance, Gamma) -> float:
    """Minimum edge residual; >= 0 means approximate dual feasibility holds (inf if no edges)."""
    res = edge_residuals(ledger, inst, Gamma)
    return min(res.values()) if res else math.inf


def run_primal_dual(inst: Instance, params: Params, selector: str = "ocr", seed=None,
                    exact: Optional[bool] = None) -> RunResult:
    plan = plan_queries(inst, params, exact)
    rng = np.random.default_rng(seed)
    state = SelectorState(inst.duration, rng)
    selected: list[Optional[int]] = []
    for j, q in enumerate(plan.queries):
        if q is None:
            selected.append(None)
        elif selector == "ocr":
            selected.append(ocr_step(state, j, q))
        elif selector == "uniform":
            selected.append(uniform_step(rng, q))
        else:
            raise ValueError(f"unknown selector {selector!r}")
    matched, _ = apply_availability(selected, inst.duration)
    ledger = plan.ledger
    return RunResult(
        matched_count=sum(matched),
        primal=ledger.primal(),
        dual=ledger.dual(),
        query_trace=plan.queries,
        audit=dual_feasibility_audit(ledger, inst, plan.params.Gamma),
        seed=seed,
        matched=matched,
        selected=selected,
        ledger=ledger,
    )


def _matched_totals(matched: np.ndarray) -> np.ndarray:
    return matched.sum(axis=(1, 2))


def matched_count_samples(inst: Instance, plan_or_params, selector: str, trials: int, seed: int,
                          jobs: Optional[int] = None) -> np.ndarray:
    """Matched count of ``trials`` independent selector runs over one fixed plan."""
    plan = plan_or_params if isinstance(plan_or_params, Plan) else plan_queries(inst, plan_or_params)
    chunks = simulate.map_chunks(plan.queries, inst.duration, selector, trials, seed, _matched_totals,
                                 num_offline=inst.num_offline, jobs=jobs)
    return np.concatenate(list(chunks))


def run_greedy(inst: Instance, tie_rule: str = "lowest-index", seed=None) -> int:
    rng = np.random.default_rng(seed) if tie_rule == "seeded-random" else None
    if tie_rule not in ("lowest-index", "seeded-random"):
        raise ValueError(f"unknown tie rule {tie_rule!r}")
    d = inst.duration
    last = [-d] * inst.num_offline
    count = 0
    for j, nb in enumerate(inst.arrivals):
        free = [i for i in nb if j - last[i] >= d]
        if not free:
            continue
        i = free[0] if rng is None else free[int(rng.integers(len(free)))]
        last[i] = j
        count += 1
    return count


def greedy_outcomes(inst: Instance) -> set[int]:
    """Matching sizes reachable by greedy under every possible tie-breaking sequence."""
    d = inst.duration
    results: set[int] = set()

    def go(j, last, count):
        if j == inst.num_online:
            results.add(count)
            return
        free = [i for i in inst.arrivals[j] if j - last[i] >= d]
        if not free:
            go(j + 1, last, count)
            return
        for i in free:
            nxt = list(last)
            nxt[i] = j
            go(j + 1, tuple(nxt), count + 1)

    go(0, tuple([-d] * inst.num_offline), 0)
    return results
