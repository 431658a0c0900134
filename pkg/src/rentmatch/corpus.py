"""The shipped test corpus: short traces, long traces, and small instances.

Everything is produced by :func:`build_corpus` from fixed seeds, and
``python -m rentmatch.corpus [DIR]`` rewrites the JSON files.  A test checks
the shipped files against a fresh build.

Layout (one JSON document per case)::

    traces/        short traces, at most 10 randomized rounds, d in {1,2,3,5}
    long_traces/   traces of 16..30 rounds, d in {2,3,5}
    instances/     bipartite instances (50 random ones plus a few named ones)
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .instance import Instance, gen_integrality_gap, gen_random, gen_upper_triangular, loads_instance, single_edge
from .ocr import parse_trace

DEFAULT_CORPUS = Path(__file__).parent / "data" / "corpus"
SHORT_DS = (1, 2, 3, 5)
LONG_DS = (2, 3, 5)


@dataclass
class TraceCase:
    name: str
    queries: list[Optional[tuple[int, ...]]]
    d: int

    @property
    def randomized_rounds(self) -> int:
        return sum(1 for q in self.queries if q is not None and len(q) == 2)

    def to_dict(self) -> dict:
        return {"name": self.name, "d": self.d, "queries": [None if q is None else list(q) for q in self.queries]}


@dataclass
class InstanceCase:
    name: str
    instance: Instance

    def to_dict(self) -> dict:
        return {"name": self.name, **self.instance.to_dict()}


def _random_trace(rng: np.random.Generator, num_vertices: int, length: int,
                  max_randomized: Optional[int]) -> list[Optional[tuple[int, ...]]]:
    out: list[Optional[tuple[int, ...]]] = []
    pairs = 0
    for _ in range(length):
        x = rng.random()
        if x < 0.1:
            out.append(None)
        elif x < 0.35 or (max_randomized is not None and pairs >= max_randomized):
            out.append((int(rng.integers(num_vertices)),))
        else:
            a, b = sorted(int(v) for v in rng.choice(num_vertices, size=2, replace=False))
            out.append((a, b))
            pairs += 1
    return out


def short_traces() -> list[TraceCase]:
    cases = [
        TraceCase("two-pairs", [(0, 1), (0, 1)], 2),
        TraceCase("single", [(0,)], 1),
        TraceCase("chain", [(0, 1), (1, 2), (2, 3), (0, 3), (0, 1)], 3),
        TraceCase("repeat-pair", [(0, 1)] * 6, 5),
        TraceCase("mixed", [(0, 1), (0,), (0, 1), None, (1,), (0, 1)], 2),
    ]
    rng = np.random.default_rng(20240601)
    k = 0
    while len(cases) < 24:
        d = SHORT_DS[k % len(SHORT_DS)]
        qs = _random_trace(rng, int(rng.integers(2, 5)), int(rng.integers(3, 13)), max_randomized=10)
        k += 1
        if any(q is not None and len(q) == 2 for q in qs):
            cases.append(TraceCase(f"short-{k:02d}", qs, d))
    return cases


def long_traces() -> list[TraceCase]:
    rng = np.random.default_rng(20240602)
    cases = []
    for k in range(20):
        d = LONG_DS[k % len(LONG_DS)]
        qs = _random_trace(rng, int(rng.integers(3, 7)), int(rng.integers(16, 31)), max_randomized=None)
        cases.append(TraceCase(f"long-{k:02d}", qs, d))
    return cases


def random_instances() -> list[InstanceCase]:
    rng = np.random.default_rng(20240603)
    cases = []
    for k in range(50):
        inst = gen_random(int(rng.integers(2, 7)), int(rng.integers(4, 21)), float(rng.uniform(0.2, 0.7)),
                          int(rng.integers(1, 5)), seed=int(rng.integers(2**31)))
        cases.append(InstanceCase(f"random-{k:02d}", inst))
    return cases


def named_instances() -> list[InstanceCase]:
    return [
        InstanceCase("gap", gen_integrality_gap()),
        InstanceCase("single-edge", single_edge()),
        InstanceCase("upper-triangular-3", gen_upper_triangular(3, 3)),
        InstanceCase("upper-triangular-5", gen_upper_triangular(5, 2)),
    ]


def build_corpus() -> dict[str, list]:
    return {
        "traces": short_traces(),
        "long_traces": long_traces(),
        "instances": random_instances() + named_instances(),
    }


def _encode(case) -> str:
    return json.dumps(case.to_dict()) + "\n"


def write_corpus(root: Path = DEFAULT_CORPUS) -> None:
    root = Path(root)
    for kind, cases in build_corpus().items():
        folder = root / kind
        folder.mkdir(parents=True, exist_ok=True)
        for old in folder.glob("*.json"):
            old.unlink()
        for case in cases:
            (folder / f"{case.name}.json").write_text(_encode(case))


def _files(root: Path, kind: str) -> list[Path]:
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {root}")
    return sorted((root / kind).glob("*.json"))


def load_traces(root=DEFAULT_CORPUS, kind: str = "traces") -> list[TraceCase]:
    out = []
    for path in _files(root, kind):
        doc = json.loads(path.read_text())
        queries, d = parse_trace(doc)
        if d is None:
            raise ValueError(f"{path}: trace needs a duration field 'd'")
        out.append(TraceCase(doc.get("name", path.stem), queries, d))
    return out


def load_instances(root=DEFAULT_CORPUS) -> list[InstanceCase]:
    out = []
    for path in _files(root, "instances"):
        text = path.read_text()
        out.append(InstanceCase(json.loads(text).get("name", path.stem), loads_instance(text)))
    return out


if __name__ == "__main__":
    write_corpus(Path(sys.argv[1]) if len(sys.argv) > 1 else DEFAULT_CORPUS)
