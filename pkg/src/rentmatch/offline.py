"""Offline baselines: the integral optimum and the LP relaxation bound.

``solve_lp`` is a small dense primal simplex for ``max c.x  s.t.  A x <= b,
x >= 0``.  It keeps the condensed (dictionary) tableau, one row per
constraint and one column per nonbasic variable, so problems with many
constraints and few variables (the factor-revealing LP has tens of thousands
of rows and three columns) stay cheap.  Bland's rule guarantees termination;
a phase-1 auxiliary variable handles negative right-hand sides.  With
``exact=True`` all arithmetic is done in :class:`fractions.Fraction`.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .instance import Instance

FLOAT_TOL = 1e-11


class LpError(RuntimeError):
    pass


class StateSpaceTooLarge(RuntimeError):
    """exact_opt refused: use the LP bound only."""


@dataclass
class LpProblem:
    c: Sequence
    A: Sequence[Sequence]
    b: Sequence

    def __post_init__(self):
        m, n = len(self.A), len(self.c)
        if isinstance(self.A, np.ndarray):
            ok = self.A.ndim == 2 and self.A.shape[1] == n or m == 0
        else:
            ok = all(len(row) == n for row in self.A)
        if len(self.b) != m or not ok:
            raise ValueError(f"inconsistent LP dimensions: c has {n}, A has {m} rows, b has {len(self.b)}")
        if not np.all(np.isfinite(np.asarray(self.b, dtype=float))):
            raise ValueError("right-hand sides must be finite")


@dataclass
class LpSolution:
    status: str  # optimal | unbounded | infeasible | iteration_limit
    value: Optional[object]
    x: Optional[np.ndarray]
    y: Optional[np.ndarray]
    iterations: int

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """Dictionary x_B = rhs - T x_N; objective row stores -c_N and z0."""

    def __init__(self, T, basic, nonbasic, tol):
        self.T, self.basic, self.nonbasic, self.tol = T, basic, nonbasic, tol

    def pivot(self, r, s):
        T = self.T
        piv = T[r, s]
        row = T[r] / piv
        row[s] = 1 / piv
        col = T[:, s].copy()
        col[r] = 0
        T -= np.outer(col, row)
        T[:, s] = -col / piv
        T[r] = row
        T[r, s] = 1 / piv
        self.basic[r], self.nonbasic[s] = self.nonbasic[s], self.basic[r]

    def entering(self):
        obj = self.T[-1, :-1]
        cand = np.flatnonzero((obj < -self.tol).astype(bool))
        if cand.size == 0:
            return None
        return int(min(cand, key=lambda k: self.nonbasic[k]))

    def leaving(self, s):
        colv = self.T[:-1, s]
        rows = np.flatnonzero((colv > self.tol).astype(bool))
        if rows.size == 0:
            return None
        ratios = self.T[rows, -1] / colv[rows]
        best = min(ratios)
        tied = rows[(ratios <= best + self.tol).astype(bool)]
        return int(min(tied, key=lambda i: self.basic[i]))

    def run(self, max_iter):
        it = 0
        while True:
            s = self.entering()
            if s is None:
                return "optimal", it
            if it >= max_iter:
                return "iteration_limit", it
            r = self.leaving(s)
            if r is None:
                return "unbounded", it
            self.pivot(r, s)
            it += 1


def solve_lp(problem: LpProblem, exact: bool = False, max_iter: int = 100_000) -> LpSolution:
    dtype = object if exact else float
    if exact:
        c = np.array([Fraction(v) for v in problem.c], dtype=object)
        A = np.array([[Fraction(v) for v in row] for row in problem.A], dtype=object)
        b = np.array([Fraction(v) for v in problem.b], dtype=object)
    else:
        c = np.asarray(problem.c, dtype=float)
        A = np.asarray(problem.A, dtype=float)
        b = np.asarray(problem.b, dtype=float)
    A = A.reshape(len(b), len(c))
    m, n = A.shape
    tol = 0 if exact else FLOAT_TOL
    zero = Fraction(0) if exact else 0.0

    iters = 0
    need_phase1 = m > 0 and min(b) < -tol
    aux = n + m
    ncols = n + 1 if need_phase1 else n
    T = np.empty((m + 1, ncols + 1), dtype=dtype)
    T[:m, :n] = A
    T[:m, -1] = b
    T[m, :] = zero
    nonbasic = list(range(n))
    if need_phase1:
        T[:m, n] = -1
        T[m, n] = 1  # maximize -x0
        nonbasic.append(aux)
    tab = _Tableau(T, list(range(n, n + m)), nonbasic, tol)

    if need_phase1:
        tab.pivot(int(np.argmin(b)), n)
        status, it = tab.run(max_iter)
        iters += it
        if status == "iteration_limit":
            return LpSolution(status, None, None, None, iters)
        if tab.T[m, -1] < (0 if exact else -1e-9):
            return LpSolution("infeasible", None, None, None, iters)
        if aux in tab.basic:
            r = tab.basic.index(aux)
            nz = [k for k in range(ncols) if tab.T[r, k] != 0 and tab.nonbasic[k] != aux]
            if nz:
                tab.pivot(r, nz[0])
            # else: the row is all-zero, aux stays basic at 0 and is harmless
        k_aux = tab.nonbasic.index(aux) if aux in tab.nonbasic else None
        if k_aux is not None:
            tab.T = np.delete(tab.T, k_aux, axis=1)
            del tab.nonbasic[k_aux]
        # rebuild the true objective row in terms of the current nonbasics
        obj = np.empty(tab.T.shape[1], dtype=dtype)
        obj[:] = zero
        for k, lab in enumerate(tab.nonbasic):
            if lab < n:
                obj[k] -= c[lab]
        for i, lab in enumerate(tab.basic):
            if lab < n:
                obj[:-1] += c[lab] * tab.T[i, :-1]
                obj[-1] += c[lab] * tab.T[i, -1]
        tab.T[m] = obj
    else:
        tab.T[m, :n] = -c

    status, it = tab.run(max_iter)
    iters += it
    if status == "unbounded":
        return LpSolution(status, None, None, None, iters)
    x = np.array([zero] * n, dtype=dtype)
    y = np.array([zero] * m, dtype=dtype)
    for i, lab in enumerate(tab.basic):
        if lab < n:
            x[lab] = tab.T[i, -1]
    for k, lab in enumerate(tab.nonbasic):
        if n <= lab < n + m:
            y[lab - n] = tab.T[m, k]
    return LpSolution(status, tab.T[m, -1], x, y, iters)


def matching_lp(inst: Instance) -> tuple[LpProblem, list[tuple[int, int]]]:
    """The relaxation: one variable per edge, one row per online vertex, one per (offline, window start)."""
    edges = inst.edges
    col = {e: k for k, e in enumerate(edges)}
    n_on, d = inst.num_online, inst.duration
    rows, rhs = [], []
    for j in range(n_on):
        row = [0] * len(edges)
        for i in inst.arrivals[j]:
            row[col[(i, j)]] = 1
        rows.append(row)
        rhs.append(1)
    for i in range(inst.num_offline):
        for t in range(n_on):
            row = [0] * len(edges)
            for j in range(t, min(t + d, n_on)):
                if (i, j) in col:
                    row[col[(i, j)]] = 1
            rows.append(row)
            rhs.append(1)
    return LpProblem([1] * len(edges), rows, rhs), edges


@dataclass
class LpBound:
    value: object
    solution: LpSolution
    edges: list[tuple[int, int]]
    flag: Optional[str] = None  # set when the bound is not certified optimal


def lp_upper_bound(inst: Instance, exact: bool = False, max_iter: int = 100_000) -> LpBound:
    if inst.num_edges == 0:
        zero = Fraction(0) if exact else 0.0
        return LpBound(zero, LpSolution("optimal", zero, np.array([]), np.array([]), 0), [])
    prob, edges = matching_lp(inst)
    sol = solve_lp(prob, exact=exact, max_iter=max_iter)
    if sol.status == "iteration_limit":
        # the current vertex is feasible but not certified; report with a flag
        return LpBound(sol.value, sol, edges, flag="iteration_limit")
    if not sol.ok:
        raise LpError(f"matching LP reported {sol.status}")
    return LpBound(sol.value, sol, edges)


def exact_opt(inst: Instance, state_limit: int = 10**7) -> int:
    """Maximum integral matching size under the d-window constraint (memoized DFS)."""
    d, n_off, arrivals = inst.duration, inst.num_offline, inst.arrivals
    space = d ** n_off * max(1, inst.num_online)
    if space > state_limit:
        raise StateSpaceTooLarge(f"state space {d}^{n_off}*{inst.num_online} = {space} exceeds {state_limit}")
    weights = [d ** i for i in range(n_off)]

    def step(key: int, matched: Optional[int], rounds: int = 1) -> int:
        # advance: busy timers drop by `rounds`; a fresh match starts at d-1
        out = 0
        for i in range(n_off):
            busy = (key // weights[i]) % d
            nxt = d - 1 if i == matched else max(busy - rounds, 0)
            out += nxt * weights[i]
        return out

    @lru_cache(maxsize=None)
    def best(j: int, key: int) -> int:
        idle = 0
        while j + idle < len(arrivals) and not arrivals[j + idle]:
            idle += 1
        if idle:
            key, j = step(key, None, idle), j + idle
        if j == len(arrivals):
            return 0
        val = best(j + 1, step(key, None))
        for i in arrivals[j]:
            if (key // weights[i]) % d == 0:
                val = max(val, 1 + best(j + 1, step(key, i)))
        return val

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 4 * len(arrivals) + 100))
    try:
        return best(0, 0)
    finally:
        sys.setrecursionlimit(old)
