"""Bipartite instances with reusable offline vertices.

An :class:`Instance` has ``num_offline`` offline vertices (resources), a global
rental ``duration`` d, and one neighbor set per arriving online vertex.  A
resource matched at round j is busy for rounds j+1 .. j+d-1 and free again at
round j+d.

Indices are 0-based everywhere in the library.  Human-facing reports (CLI
tables, ledger dumps) add 1 to rounds and offline vertices.

File format (JSON)::

    {"num_offline": 3, "duration": 3, "arrivals": [[0, 2], [0, 1], [2], [1, 2]]}
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class InstanceError(ValueError):
    """Raised for malformed or invalid instance documents."""


@dataclass(frozen=True)
class Instance:
    num_offline: int
    duration: int
    arrivals: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        validate(self.num_offline, self.duration, self.arrivals)

    @classmethod
    def build(cls, num_offline: int, duration: int, arrivals: Iterable[Iterable[int]]) -> "Instance":
        arr = [list(nb) for nb in arrivals]
        validate(num_offline, duration, arr)
        return cls(num_offline, duration, tuple(tuple(sorted(nb)) for nb in arr))

    @property
    def num_online(self) -> int:
        return len(self.arrivals)

    @property
    def edges(self) -> list[tuple[int, int]]:
        """All (offline, online) pairs, ordered by online round."""
        return [(i, j) for j, nb in enumerate(self.arrivals) for i in nb]

    @property
    def num_edges(self) -> int:
        return sum(len(nb) for nb in self.arrivals)

    def reversed(self) -> "Instance":
        return Instance(self.num_offline, self.duration, self.arrivals[::-1])

    def to_dict(self) -> dict:
        return {
            "num_offline": self.num_offline,
            "duration": self.duration,
            "arrivals": [list(nb) for nb in self.arrivals],
        }


def validate(num_offline, duration, arrivals: Sequence[Sequence[int]]) -> None:
    if not isinstance(num_offline, int) or isinstance(num_offline, bool) or num_offline < 0:
        raise InstanceError(f"num_offline: expected a non-negative integer, got {num_offline!r}")
    if not isinstance(duration, int) or isinstance(duration, bool) or duration < 1:
        raise InstanceError(f"duration: expected an integer >= 1, got {duration!r}")
    for j, nb in enumerate(arrivals):
        seen = set()
        for k, i in enumerate(nb):
            where = f"arrivals[{j}][{k}]"
            if not isinstance(i, (int, np.integer)) or isinstance(i, bool):
                raise InstanceError(f"{where}: expected an integer, got {i!r}")
            if not 0 <= i < num_offline:
                raise InstanceError(f"{where}: offline index {i} out of range [0, {num_offline})")
            if i in seen:
                raise InstanceError(f"{where}: duplicate neighbor {i}")
            seen.add(i)


def loads_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise InstanceError("top level: expected an object")
    for key in ("num_offline", "duration", "arrivals"):
        if key not in doc:
            raise InstanceError(f"top level: missing field {key!r}")
    arrivals = doc["arrivals"]
    if not isinstance(arrivals, list) or not all(isinstance(nb, list) for nb in arrivals):
        raise InstanceError("arrivals: expected an array of arrays of integers")
    return Instance.build(doc["num_offline"], doc["duration"], arrivals)


def load_instance(source) -> Instance:
    """Load from a path, ``"-"`` (stdin), or a JSON document string."""
    if source == "-":
        return loads_instance(sys.stdin.read())
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        return loads_instance(Path(source).read_text())
    return loads_instance(source)


def dumps_instance(inst: Instance) -> str:
    return json.dumps(inst.to_dict())


def gen_integrality_gap() -> Instance:
    """The 3x4 example with d=3 whose LP value exceeds the integral optimum."""
    # v1,v2,v3 -> 0,1,2 ; u1..u4 -> rounds 0..3
    edges = [(0, 0), (0, 1), (1, 1), (1, 3), (2, 0), (2, 2), (2, 3)]
    arrivals = [[i for i, j in edges if j == t] for t in range(4)]
    return Instance.build(3, 3, arrivals)


def gen_random(num_offline: int, num_online: int, edge_prob: float, duration: int, seed=None) -> Instance:
    if not 0.0 <= edge_prob <= 1.0:
        raise InstanceError(f"edge_prob must lie in [0, 1], got {edge_prob}")
    if num_offline < 0 or num_online < 0:
        raise InstanceError("counts must be non-negative")
    if duration < 1:
        raise InstanceError(f"duration must be >= 1, got {duration}")
    rng = np.random.default_rng(seed)
    mask = rng.random((num_online, num_offline)) < edge_prob
    arrivals = [np.flatnonzero(row).tolist() for row in mask]
    return Instance.build(num_offline, duration, arrivals)


def gen_upper_triangular(n: int, duration: int) -> Instance:
    """Online vertex j sees offline vertices j..n-1."""
    if n < 1:
        raise InstanceError(f"n must be >= 1, got {n}")
    return Instance.build(n, duration, [range(j, n) for j in range(n)])


def single_edge() -> Instance:
    return Instance.build(1, 1, [[0]])
