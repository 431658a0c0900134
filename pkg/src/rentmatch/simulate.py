"""Vectorized selector simulation over many independent trials.

The query trace is fixed across trials (the outer algorithm never looks at
selector coins), so every round touches the same one or two columns of the
per-trial state arrays.  Each randomized round draws three coins per trial in
one call; they play the roles (role, l, m) for senders and (role, m, l) for
receivers.  This is distributionally identical to the lazy scalar selector in
:mod:`rentmatch.ocr` but does not reproduce its bit stream.

Seeding: trials are split into fixed-size chunks; chunk ``c`` of master seed
``s`` uses ``np.random.SeedSequence([s, c])``.  Results therefore do not depend
on how chunks are distributed over worker processes.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

CHUNK_SIZE = 1 << 16
_NEVER = -(1 << 40)

_SEL, _NSEL = 1, 2


def _entropy(seed) -> list[int]:
    return [int(x) for x in seed] if isinstance(seed, (list, tuple)) else [int(seed)]


def chunk_rng(seed, chunk: int) -> np.random.Generator:
    """``seed`` is an int or a sequence of ints (for derived sub-streams)."""
    return np.random.default_rng(np.random.SeedSequence([*_entropy(seed), int(chunk)]))


def trial_rng(seed, trial: int) -> np.random.Generator:
    """Per-trial stream for scalar (one trial at a time) runs."""
    return np.random.default_rng(np.random.SeedSequence([*_entropy(seed), int(trial), 0x5CA1A5]))


def simulate_chunk(queries: Sequence[Optional[tuple]], d: int, selector: str, trials: int,
                   rng: np.random.Generator, num_offline: Optional[int] = None) -> np.ndarray:
    """Return a bool array ``matched[trial, round, leg]`` (leg 1 unused for singletons)."""
    if selector not in ("ocr", "uniform"):
        raise ValueError(f"unknown selector {selector!r}")
    if num_offline is None:
        num_offline = 1 + max((v for q in queries if q for v in q), default=-1)
    n_rounds = len(queries)
    matched = np.zeros((trials, n_rounds, 2), dtype=bool)
    last = np.full((trials, num_offline), _NEVER, dtype=np.int64)
    kind = np.zeros((trials, num_offline), dtype=np.int8)
    expiry = np.full(num_offline, -1, dtype=np.int64)  # writes are trial-independent
    for j, q in enumerate(queries):
        if q is None:
            continue
        if len(q) == 1:
            a = q[0]
            free = j - last[:, a] >= d
            matched[:, j, 0] = free
            last[free, a] = j
            kind[:, a] = 0
            expiry[a] = j + d - 1
            continue
        a, b = q
        bits = rng.integers(0, 8, size=trials, dtype=np.int8)
        c1 = (bits >> 1) & 1
        if selector == "uniform":
            ell = c1
        else:
            sender = (bits & 1).astype(bool)
            c2 = (bits >> 2) & 1
            live_a = kind[:, a] if expiry[a] >= j else np.zeros(trials, np.int8)
            live_b = kind[:, b] if expiry[b] >= j else np.zeros(trials, np.int8)
            # receiver: m = c1, read leg m, l from the tag or from c2
            seen = np.where(c1 == 0, live_a, live_b)
            ell_recv = np.where(seen == _SEL, 1 - c1, np.where(seen == _NSEL, c1, c2))
            ell = np.where(sender, c1, ell_recv)
            # sender: l = c1, m = c2
            tag_val = np.where(c1 == c2, _SEL, _NSEL).astype(np.int8)
            kind[:, a] = np.where(sender & (c2 == 0), tag_val, 0)
            kind[:, b] = np.where(sender & (c2 == 1), tag_val, 0)
            expiry[a] = expiry[b] = j + d - 1
        pick_a = ell == 0
        hit_a = pick_a & (j - last[:, a] >= d)
        hit_b = ~pick_a & (j - last[:, b] >= d)
        matched[:, j, 0] = hit_a
        matched[:, j, 1] = hit_b
        last[hit_a, a] = j
        last[hit_b, b] = j
    return matched


def _chunk_sizes(trials: int, chunk_size: int) -> list[int]:
    full, rest = divmod(trials, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def _run_one(args):
    queries, d, selector, n, seed, c, num_offline, reducer = args
    return reducer(simulate_chunk(queries, d, selector, n, chunk_rng(seed, c), num_offline))


def default_jobs() -> int:
    return max(1, int(os.environ.get("RENTMATCH_JOBS", "1")))


def map_chunks(queries, d: int, selector: str, trials: int, seed: int,
               reducer: Callable[[np.ndarray], object], *, num_offline=None,
               chunk_size: int = CHUNK_SIZE, jobs: Optional[int] = None) -> Iterator:
    """Yield ``reducer(matched)`` for each chunk, in chunk order.

    ``reducer`` must be picklable (a module-level function or partial) when
    ``jobs > 1``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    queries = [None if q is None else tuple(q) for q in queries]
    tasks = [(queries, d, selector, n, seed, c, num_offline, reducer)
             for c, n in enumerate(_chunk_sizes(trials, chunk_size))]
    jobs = default_jobs() if jobs is None else jobs
    if jobs <= 1 or len(tasks) == 1:
        for t in tasks:
            yield _run_one(t)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            yield from pool.map(_run_one, tasks)


def vertex_counts(matched: np.ndarray, queries, num_offline: int) -> np.ndarray:
    """Per-trial match count of every offline vertex, shape (trials, num_offline)."""
    out = np.zeros((matched.shape[0], num_offline), dtype=np.int64)
    for j, q in enumerate(queries):
        if q is None:
            continue
        for leg, v in enumerate(q):
            out[:, v] += matched[:, j, leg]
    return out
