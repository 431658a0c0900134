"""Factor-revealing LP over the (p, r) plane.

Every constraint family is affine in the unknowns (Gamma, beta1, beta2) once
a point (p, r) with 0 <= r <= p <= 1 is fixed, with u = p - r and
phi = min(1 - p, (1 - r)/2).  Each family is encoded as coefficients
``(const, cGamma, cbeta1, cbeta2)`` so that

    residual = const + cGamma*Gamma + cbeta1*beta1 + cbeta2*beta2 >= 0.

The universal quantifier over (p, r) is replaced by a grid; results are then
re-checked on a grid ten times finer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from .accounting import Params, phi
from .offline import LpProblem, solve_lp

FAMILIES = ("random_in_query", "deterministic_in_query", "fresh_outside", "recent_outside", "superiority")


class ConstraintPoint(NamedTuple):
    p: object
    r: object

    @property
    def u(self):
        return self.p - self.r

    @property
    def phi(self):
        return phi(self.p, self.r)


def _coefficients(p, r, gamma):
    """Per-family (const, cGamma, cbeta1, cbeta2); works elementwise on arrays."""
    u = p - r
    ph = np.minimum(1 - p, (1 - r) / 2) if isinstance(p, np.ndarray) else min(1 - p, (1 - r) / 2)
    one = p * 0 + 1
    zero = p * 0
    return {
        # randomized round containing i
        "random_in_query": (1 - p / 2, -one, -ph, ph + 3 * p / 2 - 1),
        # deterministic round containing i
        "deterministic_in_query": (one, -one, -(ph + r / 2), ph + r / 2 - 1),
        # randomized round without i, i fresh: beta1 >= Gamma
        "fresh_outside": (zero, -one, one, zero),
        # randomized round without i, i proposed within the last d-1 rounds
        "recent_outside": (1 - p, -one, r - ph, (1 + 2 * gamma) * u + p + ph - 1),
        # 2 * randomized dbeta >= deterministic dbeta
        "superiority": (zero, zero, r / 2, (1 + 2 * gamma) * u - p + r / 2),
    }


def constraint_residuals(Gamma, beta1, beta2, gamma, point: ConstraintPoint) -> dict[str, object]:
    p, r = point
    if not 0 <= r <= p <= 1:
        raise ValueError(f"need 0 <= r <= p <= 1, got p={p}, r={r}")
    return {name: c0 + cg * Gamma + c1 * beta1 + c2 * beta2
            for name, (c0, cg, c1, c2) in _coefficients(p, r, gamma).items()}


def analytic_params(gamma) -> Params:
    """Gamma = beta1 = (3 + 4 gamma)/(6 + 6 gamma), beta2 = 1/(2 + 2 gamma)."""
    if not 0 <= gamma <= 1:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    if isinstance(gamma, int):
        gamma = Fraction(gamma)
    beta1 = (3 + 4 * gamma) / (6 + 6 * gamma)
    beta2 = 1 / (2 + 2 * gamma)
    return Params(gamma=gamma, beta1=beta1, beta2=beta2, Gamma=beta1)


def _axis(step: float, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    lo, hi = max(lo, 0.0), min(hi, 1.0)
    n = int(round((hi - lo) / step))
    vals = lo + step * np.arange(n + 1)
    vals = vals[vals <= hi + 1e-12]
    return np.unique(np.clip(np.append(vals, hi), 0.0, 1.0))


def grid_points(step: float) -> tuple[np.ndarray, np.ndarray]:
    """All grid points (p, r) of the unit square with r <= p."""
    ax = _axis(step)
    P, R = np.meshgrid(ax, ax, indexing="ij")
    keep = R <= P + 1e-12
    return P[keep], np.minimum(R[keep], P[keep])


def residual_arrays(params: Params, p: np.ndarray, r: np.ndarray) -> dict[str, np.ndarray]:
    G, b1, b2, g = (float(x) for x in (params.Gamma, params.beta1, params.beta2, params.gamma))
    return {name: c0 + cg * G + c1 * b1 + c2 * b2
            for name, (c0, cg, c1, c2) in _coefficients(p, r, g).items()}


@dataclass
class FamilyMin:
    value: float
    p: float
    r: float


@dataclass
class GridCheck:
    step: float
    minima: dict[str, FamilyMin]
    tight_counts: dict[str, int] = field(default_factory=dict)
    tight_examples: dict[str, list[tuple[float, float]]] = field(default_factory=dict)
    num_points: int = 0

    @property
    def min_residual(self) -> float:
        return min(m.value for m in self.minima.values())

    def tight_families(self) -> list[str]:
        return [name for name in FAMILIES if self.tight_counts.get(name)]

    def feasible(self, tol: float = 1e-9) -> bool:
        return self.min_residual >= -tol


def check_grid(params: Params, step: float, tight_tol: float = 1e-9, slab: int = 64,
               max_examples: int = 8) -> GridCheck:
    """Minimum residual of every family over the grid, evaluated a slab of p-values at a time."""
    ax = _axis(step)
    minima: dict[str, FamilyMin] = {}
    counts = {name: 0 for name in FAMILIES}
    examples: dict[str, list] = {name: [] for name in FAMILIES}
    total = 0
    for start in range(0, len(ax), slab):
        P, R = np.meshgrid(ax[start:start + slab], ax, indexing="ij")
        keep = R <= P + 1e-12
        p, r = P[keep], np.minimum(R[keep], P[keep])
        total += p.size
        for name, vals in residual_arrays(params, p, r).items():
            vals = np.broadcast_to(vals, p.shape)
            k = int(np.argmin(vals))
            if name not in minima or vals[k] < minima[name].value:
                minima[name] = FamilyMin(float(vals[k]), float(p[k]), float(r[k]))
            hits = np.flatnonzero(vals <= tight_tol)
            counts[name] += hits.size
            room = max_examples - len(examples[name])
            examples[name] += [(float(p[i]), float(r[i])) for i in hits[:room]]
    return GridCheck(step, minima, counts, examples, total)


def check_refined(params: Params, step: float, tight_tol: float = 1e-9) -> GridCheck:
    """Re-check on a grid ten times finer than ``step`` (covers every neighborhood of the coarse grid)."""
    return check_grid(params, step / 10, tight_tol)


@dataclass
class FactorLpSolution:
    Gamma: float
    beta1: float
    beta2: float
    gamma: float
    step: float
    status: str
    iterations: int
    grid: GridCheck
    refined: GridCheck
    tight: list[str]

    def params(self) -> Params:
        return Params(gamma=self.gamma, beta1=self.beta1, beta2=self.beta2, Gamma=self.Gamma)


def factor_lp_problem(gamma, step: float) -> LpProblem:
    """max Gamma over x = (Gamma, beta1, beta2) >= 0 with every family >= 0 on the grid and beta2 <= beta1."""
    p, r = grid_points(step)
    coefs = _coefficients(p, r, float(gamma))
    rows, rhs = [], []
    for name, (c0, cg, c1, c2) in coefs.items():
        if name == "fresh_outside":
            rows.append([1.0, -1.0, 0.0])  # point-independent: emitted once
            rhs.append(0.0)
            continue
        # const + cg G + c1 b1 + c2 b2 >= 0   <=>   -cg G - c1 b1 - c2 b2 <= const
        block = -np.column_stack([np.broadcast_to(cg, p.shape), np.broadcast_to(c1, p.shape),
                                  np.broadcast_to(c2, p.shape)])
        rows.append(block)
        rhs.append(np.broadcast_to(c0, p.shape))
    rows.append([0.0, -1.0, 1.0])  # beta2 <= beta1
    rhs.append(0.0)
    A = np.vstack([np.atleast_2d(np.asarray(x, dtype=float)) for x in rows])
    b = np.concatenate([np.atleast_1d(np.asarray(x, dtype=float)) for x in rhs])
    return LpProblem([1.0, 0.0, 0.0], A, b)


def solve_factor_lp(gamma, grid_step: float = 0.005) -> FactorLpSolution:
    if not 0 < grid_step <= 0.1:
        raise ValueError(f"grid_step must lie in (0, 0.1], got {grid_step}")
    prob = factor_lp_problem(gamma, grid_step)
    sol = solve_lp(prob)
    if not sol.ok:
        raise RuntimeError(f"factor LP: simplex reported {sol.status}")
    G, b1, b2 = (float(v) for v in sol.x)
    params = Params(gamma=float(gamma), beta1=b1, beta2=max(0.0, min(b2, b1)), Gamma=max(G, 1e-300))
    grid = check_grid(params, grid_step)
    refined = check_refined(params, grid_step)
    tight = grid.tight_families()
    return FactorLpSolution(G, b1, b2, float(gamma), grid_step, sol.status, sol.iterations, grid, refined, tight)
