"""Independent reference implementations used only by the tests.

The selector oracle walks every 3-bit coin word per randomized round
(role, c1, c2), reading coins in the documented order and ignoring the
unused ones, so each complete word has weight 8**-R.  Tags are stored as
explicit per-round maps tau[i][t] rather than (kind, expiry) pairs.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

UN, SEL, NSEL = "un", "sel", "nsel"


def brute_force_dmu(queries, d):
    """dmu[j][i] for every round and vertex, legs numbered 1 and 2."""
    verts = sorted({v for q in queries if q for v in q})
    n = max(verts) + 1 if verts else 0
    rand_rounds = [j for j, q in enumerate(queries) if q and len(q) == 2]
    out = [[Fraction(0)] * n for _ in queries]
    weight = Fraction(1, 8 ** len(rand_rounds))
    for words in itertools.product(range(8), repeat=len(rand_rounds)):
        coins = dict(zip(rand_rounds, words))
        tau = {i: {} for i in range(n)}
        busy_until = {i: -1 for i in range(n)}
        for j, q in enumerate(queries):
            if not q:
                continue
            if len(q) == 1:
                chosen = q[0]
                for t in range(j + 1, j + d):
                    tau[chosen][t] = UN
            else:
                w = coins[j]
                role, c1, c2 = w & 1, (w >> 1) & 1, (w >> 2) & 1
                legs = {1: q[0], 2: q[1]}
                if role == 1:  # sender: l then m
                    l, m = c1 + 1, c2 + 1
                    for t in range(j + 1, j + d):
                        tau[legs[3 - m]][t] = UN
                        tau[legs[m]][t] = SEL if m == l else NSEL
                else:  # receiver: m then (maybe) l
                    m = c1 + 1
                    seen = tau[legs[m]].get(j, UN)
                    if seen == SEL:
                        l = 3 - m
                    elif seen == NSEL:
                        l = m
                    else:
                        l = c2 + 1
                    for t in range(j + 1, j + d):
                        tau[legs[1]][t] = UN
                        tau[legs[2]][t] = UN
                chosen = legs[l]
            if busy_until[chosen] < j:
                out[j][chosen] += weight
                busy_until[chosen] = j + d - 1
    return out


def brute_force_opt(num_offline, d, arrivals):
    """Try every assignment of each arrival to a neighbor or nothing."""
    best = 0
    for choice in itertools.product(*[[None, *nb] for nb in arrivals]):
        last = {}
        ok = True
        for j, i in enumerate(choice):
            if i is None:
                continue
            if i in last and j - last[i] < d:
                ok = False
                break
            last[i] = j
        if ok:
            best = max(best, sum(c is not None for c in choice))
    return best
