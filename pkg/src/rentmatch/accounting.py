"""Deterministic probability ledger behind the primal-dual outer algorithm.

For every proposed (vertex, round) the ledger records

* ``p``   probability the vertex is available, 1 minus the match mass of the
  previous d-1 rounds;
* ``u``   mass that was available at the previous proposal but not taken;
* ``r``   mass released since then, ``r = p - u``;
* ``dmu`` match-probability increment, booked at the selector's guaranteed
  lower bound (``p`` for singletons, ``p/2`` for a fresh pair leg,
  ``p/2 + gamma*u`` otherwise);
* ``dbeta``/``dalpha`` the split of ``dmu`` into online and offline duals.

Because ``dmu`` is the guarantee rather than an observed frequency, the ledger
never depends on selector coins.  Arithmetic follows the number types of the
parameters: pass :class:`fractions.Fraction` params for exact bookkeeping.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

Number = Union[Fraction, float]

FLOAT_TOL = 1e-9


@dataclass(frozen=True)
class Params:
    gamma: Number
    beta1: Number
    beta2: Number
    Gamma: Number

    def __post_init__(self):
        if not 0 <= self.gamma <= 1:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not self.beta1 >= self.beta2 >= 0:
            raise ValueError(f"need beta1 >= beta2 >= 0, got {self.beta1}, {self.beta2}")
        if not 0 < self.Gamma <= 1:
            raise ValueError(f"Gamma must lie in (0, 1], got {self.Gamma}")

    @property
    def exact(self) -> bool:
        return all(isinstance(x, (Fraction, int)) for x in (self.gamma, self.beta1, self.beta2, self.Gamma))

    def as_fraction(self) -> "Params":
        return Params(*(Fraction(x) for x in (self.gamma, self.beta1, self.beta2, self.Gamma)))

    def as_float(self) -> "Params":
        return Params(*(float(x) for x in (self.gamma, self.beta1, self.beta2, self.Gamma)))


@dataclass(frozen=True)
class LedgerRow:
    vertex: int
    round: int
    p: Number
    r: Number
    u: Number
    dmu: Number
    dbeta: Number
    dalpha: Number
    kind: str  # "deterministic" | "randomized" | "fresh"


@dataclass(frozen=True)
class Candidate:
    """Hypothetical increments for proposing ``vertex`` at a round."""

    vertex: int
    p: Number
    r: Number
    u: Number
    fresh: bool
    dmu_det: Number
    dmu_rand: Number
    dbeta_det: Number
    dbeta_rand: Number


@dataclass
class Ledger:
    num_offline: int
    duration: int
    exact: bool = True
    rows: list[LedgerRow] = field(default_factory=list)
    by_vertex: dict[int, list[LedgerRow]] = field(default_factory=dict)
    beta: dict[int, Number] = field(default_factory=dict)
    alpha: dict[tuple[int, int], Number] = field(default_factory=dict)

    @property
    def zero(self) -> Number:
        return Fraction(0) if self.exact else 0.0

    @property
    def one(self) -> Number:
        return Fraction(1) if self.exact else 1.0

    def prev(self, vertex: int, round_: int) -> Optional[LedgerRow]:
        """Latest row of ``vertex`` strictly before ``round_`` (None stands for -inf)."""
        for row in reversed(self.by_vertex.get(vertex, ())):
            if row.round < round_:
                return row
        return None

    def primal(self) -> Number:
        return sum((row.dmu for row in self.rows), self.zero)

    def dual(self) -> Number:
        return sum(self.alpha.values(), self.zero) + sum(self.beta.values(), self.zero)

    def to_dict(self) -> dict:
        """Dump with 1-based rounds and vertices; exact values as "a/b" strings."""
        def enc(x):
            return str(x) if isinstance(x, Fraction) else float(x)
        return {
            "duration": self.duration,
            "num_offline": self.num_offline,
            "exact": self.exact,
            "rows": [
                {"vertex": r.vertex + 1, "round": r.round + 1, "kind": r.kind,
                 **{k: enc(getattr(r, k)) for k in ("p", "r", "u", "dmu", "dalpha", "dbeta")}}
                for r in self.rows
            ],
            "beta": {str(j + 1): enc(v) for j, v in sorted(self.beta.items())},
            "primal": enc(self.primal()),
            "dual": enc(self.dual()),
        }


def availability(ledger: Ledger, vertex: int, round_: int, d: Optional[int] = None) -> Number:
    d = ledger.duration if d is None else d
    mass = ledger.zero
    for row in reversed(ledger.by_vertex.get(vertex, ())):
        if row.round >= round_:
            continue
        if row.round <= round_ - d:
            break
        mass += row.dmu
    return ledger.one - mass


def phi(p: Number, r: Number) -> Number:
    if not 0 <= r <= p <= 1:
        raise ValueError(f"phi needs 0 <= r <= p <= 1, got p={p}, r={r}")
    return min(1 - p, (1 - r) / 2)


def _released_mass(ledger: Ledger, vertex: int, prev_round: int, round_: int, d: int) -> Number:
    # match mass in [prev-d+1, round-d]: what has left the window since prev
    lo, hi = prev_round - d + 1, round_ - d
    return sum((row.dmu for row in ledger.by_vertex.get(vertex, ()) if lo <= row.round <= hi), ledger.zero)


def candidate(ledger: Ledger, vertex: int, round_: int, params: Params, d: Optional[int] = None) -> Candidate:
    d = ledger.duration if d is None else d
    if not 0 <= vertex < ledger.num_offline:
        raise IndexError(f"offline vertex {vertex} out of range [0, {ledger.num_offline})")
    p = availability(ledger, vertex, round_, d)
    prev = ledger.prev(vertex, round_)
    fresh = prev is None or prev.round <= round_ - d
    if fresh:
        r, u = p, ledger.zero
        dmu_rand = p / 2
    else:
        u = prev.p - prev.dmu
        r = p - u
        if __debug__:
            released = _released_mass(ledger, vertex, prev.round, round_, d)
            assert (r == released) if ledger.exact else abs(r - released) <= FLOAT_TOL, "r identity broken"
        dmu_rand = p / 2 + params.gamma * u
    half_r = r / 2
    return Candidate(
        vertex, p, r, u, fresh,
        dmu_det=p, dmu_rand=dmu_rand,
        dbeta_det=params.beta1 * half_r + params.beta2 * (p - half_r),
        dbeta_rand=params.beta1 * half_r + params.beta2 * (dmu_rand - half_r),
    )


def accounting_update(ledger: Ledger, round_: int, query: Sequence[int], params: Params,
                      d: Optional[int] = None) -> list[LedgerRow]:
    d = ledger.duration if d is None else d
    cands = [candidate(ledger, i, round_, params, d) for i in query]
    deterministic = len(cands) == 1
    rows = []
    for c in cands:
        if deterministic:
            dmu, dbeta, kind = c.dmu_det, c.dbeta_det, "deterministic"
        else:
            dmu, dbeta, kind = c.dmu_rand, c.dbeta_rand, "fresh" if c.fresh else "randomized"
        half_r = c.r / 2
        dalpha = (1 - params.beta1) * half_r + (1 - params.beta2) * (dmu - half_r)
        rows.append(LedgerRow(c.vertex, round_, c.p, c.r, c.u, dmu, dbeta, dalpha, kind))
    for row in rows:
        ledger.rows.append(row)
        ledger.by_vertex.setdefault(row.vertex, []).append(row)
        ledger.alpha[(row.vertex, round_)] = row.dalpha
    ledger.beta[round_] = sum((row.dbeta for row in rows), ledger.zero)
    return rows


def score_candidates(ledger: Ledger, round_: int, neighbors, params: Params,
                     d: Optional[int] = None) -> list[tuple[tuple[int, ...], Number]]:
    """Every singleton (deterministic score) and unordered pair (sum of randomized scores)."""
    info = {i: candidate(ledger, i, round_, params, d) for i in sorted(neighbors)}
    out = [((i,), c.dbeta_det) for i, c in info.items()]
    out += [((a, b), info[a].dbeta_rand + info[b].dbeta_rand)
            for a, b in itertools.combinations(info, 2)]
    return out


def _better(score, key, best_score, best_key, tol) -> bool:
    if score > best_score + tol:
        return True
    if score < best_score - tol:
        return False
    return key < best_key


def _tie_key(q: tuple[int, ...]):
    # pairs before singletons at equal score, then lexicographic
    return (-len(q), q)


def best_query(ledger: Ledger, round_: int, neighbors, params: Params, d: Optional[int] = None,
               shortcut_degree: int = 64) -> tuple[tuple[int, ...], Number]:
    """argmax of the online dual increment over queries of size <= 2 from ``neighbors``.

    Above ``shortcut_degree`` neighbors, the best pair is taken as the top two
    vertices by randomized score (pair scores are additive).
    """
    nb = sorted(neighbors)
    if not nb:
        raise ValueError("best_query needs a non-empty neighbor set")
    tol = 0 if ledger.exact else FLOAT_TOL
    if len(nb) <= shortcut_degree:
        scored = score_candidates(ledger, round_, nb, params, d)
    else:
        info = [candidate(ledger, i, round_, params, d) for i in nb]
        scored = [((c.vertex,), c.dbeta_det) for c in info]
        if len(info) > 1:
            top = sorted(info, key=lambda c: (-c.dbeta_rand, c.vertex))[:2]
            a, b = sorted(c.vertex for c in top)
            scored.append(((a, b), top[0].dbeta_rand + top[1].dbeta_rand))
    best_q, best_s = scored[0]
    for q, s in scored[1:]:
        if _better(s, _tie_key(q), best_s, _tie_key(best_q), tol):
            best_q, best_s = q, s
    return best_q, best_s
