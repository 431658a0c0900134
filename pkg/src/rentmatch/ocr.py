"""Inner selection layer: the 1/32-OCR state machine and the uniform baseline.

The outer algorithm proposes a query of one or two offline vertices per round;
the selector returns one of them.  Randomized (two-vertex) rounds are either
*senders*, which leave a Selected/NotSelected tag on one leg readable for the
next d-1 rounds, or *receivers*, which read the tag of one leg to
anti-correlate with the earlier decision.

Coin order per randomized round (frozen so seeded traces are reproducible):
role coin (1 = sender); sender: l then m; receiver: m then, only when the
tag read is Unknown, l.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Optional, Sequence

import numpy as np


class TagKind(IntEnum):
    UNKNOWN = 0
    SELECTED = 1
    NOT_SELECTED = 2


@dataclass(frozen=True)
class Tag:
    kind: TagKind
    expiry: int  # last round (inclusive) at which the tag is readable

    def read(self, round_: int) -> TagKind:
        return self.kind if round_ <= self.expiry else TagKind.UNKNOWN


UNKNOWN_TAG = Tag(TagKind.UNKNOWN, -1)


class QueryError(ValueError):
    pass


def make_query(vertices) -> tuple[int, ...]:
    """Normalize a query to a tuple of 1 or 2 distinct non-negative ints, kept in given order."""
    q = tuple(int(v) for v in vertices)
    if len(q) not in (1, 2):
        raise QueryError(f"query must hold 1 or 2 vertices, got {list(q)}")
    if len(q) == 2 and q[0] == q[1]:
        raise QueryError(f"query vertices must be distinct, got {list(q)}")
    if any(v < 0 for v in q):
        raise QueryError(f"negative vertex index in {list(q)}")
    return q


@dataclass
class SelectorState:
    duration: int
    rng: np.random.Generator
    tags: dict[int, Tag] = field(default_factory=dict)
    last_round: int = -1

    @classmethod
    def fresh(cls, duration: int, seed=None) -> "SelectorState":
        if duration < 1:
            raise ValueError(f"duration must be >= 1, got {duration}")
        return cls(duration, np.random.default_rng(seed))

    def tag(self, vertex: int, round_: int) -> TagKind:
        return self.tags.get(vertex, UNKNOWN_TAG).read(round_)

    def _coin(self) -> int:
        return int(self.rng.integers(2))

    def _advance(self, round_: int) -> None:
        if round_ <= self.last_round:
            raise ValueError(f"round {round_} is not after previous round {self.last_round}")
        self.last_round = round_


@dataclass(frozen=True)
class StepInfo:
    """Instrumentation for one randomized round."""

    role: str  # "sender" | "receiver"
    m_vertex: int  # leg tagged (sender) or read (receiver)


def ocr_step(state: SelectorState, round_: int, query) -> int:
    return ocr_step_info(state, round_, query)[0]


def ocr_step_info(state: SelectorState, round_: int, query) -> tuple[int, Optional[StepInfo]]:
    q = make_query(query)
    state._advance(round_)
    expiry = round_ + state.duration - 1
    if len(q) == 1:
        state.tags[q[0]] = Tag(TagKind.UNKNOWN, expiry)
        return q[0], None
    sender = state._coin() == 1
    if sender:
        ell = state._coin()
        m = state._coin()
        state.tags[q[1 - m]] = Tag(TagKind.UNKNOWN, expiry)
        kind = TagKind.SELECTED if m == ell else TagKind.NOT_SELECTED
        state.tags[q[m]] = Tag(kind, expiry)
        return q[ell], StepInfo("sender", q[m])
    m = state._coin()
    seen = state.tag(q[m], round_)
    if seen is TagKind.SELECTED:
        ell = 1 - m
    elif seen is TagKind.NOT_SELECTED:
        ell = m
    else:
        ell = state._coin()
    state.tags[q[0]] = Tag(TagKind.UNKNOWN, expiry)
    state.tags[q[1]] = Tag(TagKind.UNKNOWN, expiry)
    return q[ell], StepInfo("receiver", q[m])


def uniform_step(rng: np.random.Generator, query) -> int:
    q = make_query(query)
    if len(q) == 1:
        return q[0]
    return q[int(rng.integers(2))]


@dataclass
class SelectionTrace:
    queries: list[Optional[tuple[int, ...]]]
    selected: list[Optional[int]]
    info: list[Optional[StepInfo]]

    def __len__(self):
        return len(self.queries)


def run_selector(queries: Sequence, d: int, selector: str = "ocr", seed=None) -> SelectionTrace:
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    qs = [None if q is None else make_query(q) for q in queries]
    state = SelectorState.fresh(d, seed)
    selected, info = [], []
    for j, q in enumerate(qs):
        if q is None:
            selected.append(None)
            info.append(None)
        elif selector == "ocr":
            s, inf = ocr_step_info(state, j, q)
            selected.append(s)
            info.append(inf)
        elif selector == "uniform":
            selected.append(uniform_step(state.rng, q))
            info.append(None)
        else:
            raise ValueError(f"unknown selector {selector!r}")
    return SelectionTrace(qs, selected, info)


def apply_availability(selected: Sequence[Optional[int]], d: int) -> tuple[list[bool], dict[int, int]]:
    """Match each selection iff its vertex was not matched in the previous d-1 rounds.

    Accepts a :class:`SelectionTrace` or a plain list of selections (None for idle rounds).
    """
    if isinstance(selected, SelectionTrace):
        selected = selected.selected
    last: dict[int, int] = {}
    flags, counts = [], {}
    for j, i in enumerate(selected):
        ok = i is not None and (i not in last or j - last[i] >= d)
        flags.append(ok)
        if ok:
            last[i] = j
            counts[i] = counts.get(i, 0) + 1
    return flags, counts


def parse_trace(doc) -> tuple[list[Optional[tuple[int, ...]]], Optional[int]]:
    """Accept a bare array of rounds, or ``{"queries": [...], "d": n}``."""
    d = None
    if isinstance(doc, dict):
        d = doc.get("d")
        doc = doc.get("queries")
    if not isinstance(doc, list):
        raise QueryError("trace: expected an array of rounds")
    out = []
    for j, q in enumerate(doc):
        if q is None:
            out.append(None)
            continue
        try:
            out.append(make_query(q))
        except (QueryError, TypeError, ValueError) as exc:
            raise QueryError(f"round {j + 1}: {exc}") from None
    return out, d


def load_trace(path) -> tuple[list[Optional[tuple[int, ...]]], Optional[int]]:
    text = sys.stdin.read() if str(path) == "-" else Path(path).read_text()
    return parse_trace(json.loads(text))


def dumps_trace(queries, d: Optional[int] = None) -> str:
    rounds = [None if q is None else list(q) for q in queries]
    if d is None:
        return json.dumps(rounds)
    return json.dumps({"d": d, "queries": rounds})


def trace_vertices(queries) -> list[int]:
    return sorted({v for q in queries if q is not None for v in q})
