"""Ground truth for the selector layer.

``enumerate_exact_dmu`` pushes an exact probability distribution over
selector states (live tags plus last match round per vertex) through the
trace, branching on every coin a round actually consumes.  Identical states
are merged, so the cost is governed by the number of distinct states rather
than the number of coin paths.  ``estimate_dmu`` is the Monte Carlo route via
:mod:`rentmatch.simulate`; its cell means are kept as exact ratios
``count / trials`` so guarantee checks carry no rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Optional, Sequence

import numpy as np

from . import simulate
from .ocr import TagKind, make_query

_HALF, _QUARTER, _EIGHTH = Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)
_FREE = None


class CoinSpaceExceeded(ValueError):
    pass


def _normalize_queries(queries) -> list[Optional[tuple[int, ...]]]:
    return [None if q is None else make_query(q) for q in queries]


def _universe(queries, num_offline: Optional[int]) -> int:
    top = 1 + max((v for q in queries if q for v in q), default=-1)
    return top if num_offline is None else max(num_offline, top)


@dataclass
class DmuTable:
    """Per-(round, vertex) match probabilities; ``se`` is None for exact tables."""

    queries: list[Optional[tuple[int, ...]]]
    d: int
    mean: list[list[object]]  # [round][vertex]
    se: Optional[list[list[float]]] = None
    trials: Optional[int] = None

    @property
    def exact(self) -> bool:
        return self.se is None

    @property
    def num_offline(self) -> int:
        return len(self.mean[0]) if self.mean else 0

    def dmu(self, vertex: int, round_: int):
        return self.mean[round_][vertex]

    def totals(self) -> list[object]:
        return [sum((row[v] for row in self.mean), Fraction(0)) for v in range(self.num_offline)]


DmuEstimate = DmuTable


def _ocr_branches(q, state, j, d, selector):
    """(probability, chosen leg, new kind for leg 0, new kind for leg 1) for one pair round."""
    if selector == "uniform":
        return [(_HALF, 0, 0, 0), (_HALF, 1, 0, 0)]
    out = []
    for ell in (0, 1):
        for m in (0, 1):
            kind = TagKind.SELECTED if m == ell else TagKind.NOT_SELECTED
            k0, k1 = (int(kind), 0) if m == 0 else (0, int(kind))
            out.append((_EIGHTH, ell, k0, k1))
    for m in (0, 1):
        kind, expiry, _ = state[q[m]]
        seen = kind if expiry >= j else 0
        if seen == TagKind.SELECTED:
            out.append((_QUARTER, 1 - m, 0, 0))
        elif seen == TagKind.NOT_SELECTED:
            out.append((_QUARTER, m, 0, 0))
        else:
            out += [(_EIGHTH, 0, 0, 0), (_EIGHTH, 1, 0, 0)]
    return out


def enumerate_exact_dmu(queries: Sequence, d: int, selector: str = "ocr", num_offline: Optional[int] = None,
                        max_randomized: int = 12) -> DmuTable:
    qs = _normalize_queries(queries)
    n_rand = sum(1 for q in qs if q is not None and len(q) == 2)
    if n_rand > max_randomized:
        raise CoinSpaceExceeded(f"{n_rand} randomized rounds exceed the enumeration limit {max_randomized}")
    n = _universe(qs, num_offline)
    mean = [[Fraction(0)] * n for _ in qs]
    blank = tuple((0, -1, _FREE) for _ in range(n))
    dist: dict[tuple, Fraction] = {blank: Fraction(1)}

    def free(st, v, j):
        last = st[v][2]
        return last is _FREE or j - last >= d

    for j, q in enumerate(qs):
        if q is None:
            continue
        nxt: dict[tuple, Fraction] = {}
        for st, pr in dist.items():
            if len(q) == 1:
                branches = [(Fraction(1), 0, 0, None)]
            else:
                branches = _ocr_branches(q, st, j, d, selector)
            for bp, ell, k0, k1 in branches:
                w = pr * bp
                v = q[ell]
                hit = free(st, v, j)
                if hit:
                    mean[j][v] += w
                cells = list(st)
                for leg, kind in ((0, k0), (1, k1)):
                    if leg < len(q):
                        u = q[leg]
                        tag = (kind, j + d - 1) if kind else (0, -1)
                        cells[u] = (tag[0], tag[1], cells[u][2])
                if hit:
                    cells[v] = (cells[v][0], cells[v][1], j)
                # merge: forget tags that can no longer be read and matches that no longer block
                key = tuple(
                    (k if e > j else 0, e if e > j else -1, last if last is not _FREE and last > j - d else _FREE)
                    for k, e, last in cells
                )
                nxt[key] = nxt.get(key, Fraction(0)) + w
        dist = nxt
    return DmuTable(qs, d, mean)


def _cell_sums(matched: np.ndarray) -> np.ndarray:
    return matched.sum(axis=0, dtype=np.int64)


def estimate_dmu(queries: Sequence, d: int, trials: int, seed: int = 0, selector: str = "ocr",
                 num_offline: Optional[int] = None, jobs: Optional[int] = None) -> DmuTable:
    qs = _normalize_queries(queries)
    n = _universe(qs, num_offline)
    counts = np.zeros((len(qs), 2), dtype=np.int64)
    if qs:
        for part in simulate.map_chunks(qs, d, selector, trials, seed, _cell_sums, num_offline=n, jobs=jobs):
            counts += part
    mean = [[Fraction(0)] * n for _ in qs]
    se = [[0.0] * n for _ in qs]
    for j, q in enumerate(qs):
        if q is None:
            continue
        for leg, v in enumerate(q):
            m = Fraction(int(counts[j, leg]), trials)
            mean[j][v] = m
            se[j][v] = math.sqrt(float(m) * (1 - float(m)) / trials)
    return DmuTable(qs, d, mean, se, trials)


@dataclass
class CellCheck:
    vertex: int
    round: int
    case: str  # absent | deterministic | fresh | correlated
    dmu: object
    bound: object
    se: float
    ok: bool

    @property
    def z(self) -> float:
        gap = float(self.dmu) - float(self.bound)
        if self.se == 0:
            return math.inf if gap >= 0 else -math.inf
        return gap / self.se


SCHEMA_NOTES = (
    "Singleton rounds use the bound dmu >= p even when the vertex was proposed within the "
    "last d-1 rounds; that bound dominates p/2 + gamma*u."
)


@dataclass
class GuaranteeReport:
    gamma: object
    z: float
    cells: list[CellCheck]
    notes: str = SCHEMA_NOTES

    @property
    def failures(self) -> list[CellCheck]:
        return [c for c in self.cells if not c.ok]

    @property
    def passed(self) -> bool:
        return not self.failures

    def min_z(self) -> float:
        zs = [c.z for c in self.cells if c.case != "absent"]
        return min(zs) if zs else math.inf


def _window_mass(table: DmuTable, v: int, j: int):
    return sum((table.mean[t][v] for t in range(max(0, j - table.d + 1), j)), Fraction(0))


def check_ocr_guarantee(table: DmuTable, gamma, z: float = 3.0, d: Optional[int] = None) -> GuaranteeReport:
    if d is not None and d != table.d:
        table = DmuTable(table.queries, d, table.mean, table.se, table.trials)
    d = table.d
    cells = []
    prev: dict[int, int] = {}
    for j, q in enumerate(table.queries):
        for v in range(table.num_offline):
            dmu = table.mean[j][v]
            se = 0.0 if table.se is None else table.se[j][v]
            if q is None or v not in q:
                case, bound = "absent", Fraction(0)
            else:
                p = 1 - _window_mass(table, v, j)
                jp = prev.get(v)
                if len(q) == 1:
                    case, bound = "deterministic", p
                elif jp is None or jp <= j - d:
                    case, bound = "fresh", p / 2
                else:
                    p_prev = 1 - _window_mass(table, v, jp)
                    case, bound = "correlated", p / 2 + gamma * (p_prev - table.mean[jp][v])
            ok = dmu >= bound if table.exact else float(dmu) >= float(bound) - z * se
            cells.append(CellCheck(v, j, case, dmu, bound, se, bool(ok)))
        if q is not None:
            for v in q:
                prev[v] = j
    return GuaranteeReport(gamma, z, cells)


def window_mass_ok(table: DmuTable) -> bool:
    """Match events of one vertex within any d consecutive rounds are exclusive, so mass <= 1."""
    for v in range(table.num_offline):
        for j in range(len(table.queries)):
            if _window_mass(table, v, j) + table.mean[j][v] > 1:
                return False
    return True


def _count_moments(matched: np.ndarray, queries, num_offline: int) -> np.ndarray:
    c = simulate.vertex_counts(matched, queries, num_offline)
    return np.stack([c.sum(axis=0), (c * c).sum(axis=0)])


@dataclass
class VertexReversal:
    vertex: int
    forward: object
    backward: object
    se: float
    ok: bool

    @property
    def diff(self):
        return self.forward - self.backward


@dataclass
class ReversalReport:
    mode: str
    vertices: list[VertexReversal] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.ok for v in self.vertices)


def _mc_totals(qs, d, trials, seed, selector, n, jobs):
    mom = np.zeros((2, n), dtype=np.int64)
    reducer = partial(_count_moments, queries=qs, num_offline=n)
    for part in simulate.map_chunks(qs, d, selector, trials, seed, reducer, num_offline=n, jobs=jobs):
        mom += part
    mean = mom[0] / trials
    var = np.maximum(mom[1] / trials - mean ** 2, 0.0) * trials / max(trials - 1, 1)
    return mean, var


def check_reversal(queries: Sequence, d: int, mode: str = "exact", trials: int = 10**6, seed: int = 0,
                   z: float = 3.0, selector: str = "ocr", num_offline: Optional[int] = None,
                   jobs: Optional[int] = None) -> ReversalReport:
    qs = _normalize_queries(queries)
    n = _universe(qs, num_offline)
    report = ReversalReport(mode)
    if mode == "exact":
        fwd = enumerate_exact_dmu(qs, d, selector, n).totals()
        bwd = enumerate_exact_dmu(qs[::-1], d, selector, n).totals()
        for v in range(n):
            report.vertices.append(VertexReversal(v, fwd[v], bwd[v], 0.0, fwd[v] == bwd[v]))
        return report
    if mode not in ("mc", "monte-carlo"):
        raise ValueError(f"unknown mode {mode!r}")
    fm, fv = _mc_totals(qs, d, trials, [seed, 0], selector, n, jobs)
    bm, bv = _mc_totals(qs[::-1], d, trials, [seed, 1], selector, n, jobs)
    for v in range(n):
        se = math.sqrt((fv[v] + bv[v]) / trials)
        diff = fm[v] - bm[v]
        ok = abs(diff) <= z * se if se > 0 else diff == 0
        report.vertices.append(VertexReversal(v, float(fm[v]), float(bm[v]), se, bool(ok)))
    return report
