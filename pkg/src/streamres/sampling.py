"""Uniform and weighted sampling, one-shot and streaming.

Weighted sampling without replacement uses exponential keys: each item draws
``u ~ U(0, 1]`` and gets key ``u ** (1 / w)``; the k largest keys form the
sample. Keys are kept in log form, ``ln(u) / w``, which orders identically
and does not underflow for small weights.

Every stochastic function takes an explicit ``random.Random``.
"""
from __future__ import annotations

import heapq
import itertools
import json
import math
import random
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

from .errors import EmptyPopulation, KExceedsPopulation, NonPositiveWeight, UOutOfRange
from .ingest import Record, record_from_json, record_to_json

__all__ = [
    "KeyedEntry",
    "Reservoir",
    "derive_rng",
    "draw_u",
    "log_key",
    "weighted_without_replacement",
    "weighted_with_replacement",
    "uniform_with_replacement",
    "uniform_reservoir_insert",
    "weighted_reservoir_insert",
    "reservoir_contents",
    "dump_reservoir",
    "load_reservoir",
]

_TINY = 5e-324


def derive_rng(seed: int, purpose: str) -> random.Random:
    """Independent, reproducible random source for one pipeline stage."""
    return random.Random(f"{int(seed)}:{purpose}")


def draw_u(rng: random.Random) -> float:
    """Uniform draw on (0, 1]."""
    return (1.0 - rng.random()) or _TINY


def log_key(weight: float, u: float) -> float:
    """Return ``ln(u) / weight``, the log of the key ``u ** (1 / weight)``."""
    if not (weight > 0) or math.isinf(weight):
        raise NonPositiveWeight(f"weight must be positive and finite, got {weight!r}")
    if not (0.0 < u <= 1.0):
        raise UOutOfRange(f"u must lie in (0, 1], got {u!r}")
    return math.log(u) / weight


@dataclass(frozen=True)
class KeyedEntry:
    record: Record
    log_key: float


class Reservoir:
    """Fixed-capacity sample with O(log k) access to its minimum key.

    Entries live in a min-heap of ``(log_key, -arrival, record)`` so that, on
    equal keys, the later arrival is the one evicted. A reservoir is either
    uniform (Algorithm R) or weighted (key-based); mixing the two insert
    functions on one reservoir raises ``ValueError``.
    """

    __slots__ = ("capacity", "seen", "replacements", "kind", "_heap")

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("reservoir capacity must be positive")
        self.capacity = int(capacity)
        self.seen = 0
        self.replacements = 0
        self.kind: Optional[str] = None
        self._heap: list = []

    def __len__(self):
        return len(self._heap)

    def __repr__(self):
        return f"Reservoir(capacity={self.capacity}, size={len(self._heap)}, seen={self.seen})"

    @property
    def entries(self) -> List[KeyedEntry]:
        return [KeyedEntry(rec, key) for key, _, rec in sorted(self._heap, key=lambda e: -e[1])]

    def min_key(self) -> Optional[float]:
        return self._heap[0][0] if self._heap else None

    def _claim(self, kind):
        if self.kind is None:
            self.kind = kind
        elif self.kind != kind:
            raise ValueError(f"reservoir is {self.kind}, cannot take a {kind} insert")

    def resize(self, capacity: int, rng: random.Random) -> None:
        """Change capacity; shrinking evicts incumbents uniformly at random."""
        if capacity < 1:
            raise ValueError("reservoir capacity must be positive")
        excess = len(self._heap) - capacity
        if excess > 0:
            drop = set(rng.sample(range(len(self._heap)), excess))
            self._heap = [e for i, e in enumerate(self._heap) if i not in drop]
            if self.kind == "weighted":
                heapq.heapify(self._heap)
        self.capacity = int(capacity)

    def clear(self) -> None:
        """Drop all entries; ``seen`` keeps counting."""
        self._heap = []


def weighted_reservoir_insert(reservoir: Reservoir, record: Record, rng: random.Random) -> Reservoir:
    """Offer ``record`` to a weighted reservoir.

    The record's key replaces the reservoir minimum when it is strictly
    larger; an under-full reservoir always admits.
    """
    w = record.weight
    if not w > 0:
        raise NonPositiveWeight(f"weight must be positive, got {w!r}")
    if reservoir.kind != "weighted":
        reservoir._claim("weighted")
    key = math.log((1.0 - rng.random()) or _TINY) / w
    reservoir.seen += 1
    heap = reservoir._heap
    if len(heap) < reservoir.capacity:
        heapq.heappush(heap, (key, -reservoir.seen, record))
    elif key > heap[0][0]:
        heapq.heapreplace(heap, (key, -reservoir.seen, record))
        reservoir.replacements += 1
    return reservoir


def uniform_reservoir_insert(reservoir: Reservoir, record: Record, rng: random.Random) -> Reservoir:
    """Algorithm R: the i-th record enters with probability k/i."""
    if reservoir.kind != "uniform":
        reservoir._claim("uniform")
    reservoir.seen += 1
    i = reservoir.seen
    heap = reservoir._heap
    if len(heap) < reservoir.capacity:
        heap.append((0.0, -i, record))
    else:
        j = rng.randrange(i)
        if j < reservoir.capacity:
            heap[j] = (0.0, -i, record)
            reservoir.replacements += 1
    return reservoir


def reservoir_contents(reservoir: Reservoir) -> List[Record]:
    """Current sample in arrival order."""
    return [rec for _, _, rec in sorted(reservoir._heap, key=lambda e: -e[1])]


def _check_weights(population):
    for rec in population:
        if not rec.weight > 0:
            raise NonPositiveWeight(f"weight must be positive, got {rec.weight!r}")


def weighted_without_replacement(population: Sequence[Record], k: int, rng: random.Random) -> List[Record]:
    """Draw ``k`` distinct records, each round picking with probability w / (remaining weight).

    Realised by one key per record; the result is ordered by decreasing key,
    which is the order sequential draws would produce.
    """
    n = len(population)
    if k < 0:
        raise ValueError("k must be non-negative")
    if k > n:
        raise KExceedsPopulation(f"k={k} exceeds population size {n}")
    _check_weights(population)
    rand = rng.random
    log = math.log
    # negated keys: popping the min yields the largest key; ties go to the earlier index
    heap = [(-log((1.0 - rand()) or _TINY) / rec.weight, i) for i, rec in enumerate(population)]
    heapq.heapify(heap)
    pop = heapq.heappop
    return [population[pop(heap)[1]] for _ in range(k)]


def weighted_with_replacement(population: Sequence[Record], k: int, rng: random.Random) -> List[Record]:
    """``k`` independent draws, each picking record j with probability w_j / sum(w)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return []
    if not population:
        raise EmptyPopulation("cannot draw from an empty population")
    _check_weights(population)
    cum = list(itertools.accumulate(rec.weight for rec in population))
    return rng.choices(population, cum_weights=cum, k=k)


def uniform_with_replacement(population: Sequence[Record], k: int, rng: random.Random) -> List[Record]:
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return []
    if not population:
        raise EmptyPopulation("cannot draw from an empty population")
    return rng.choices(population, k=k)


# -- snapshots -------------------------------------------------------------

def dump_reservoir(reservoir: Reservoir, path, seed: Optional[int] = None) -> None:
    """Write a JSONL snapshot: a header line, then one record per line."""
    with open(path, "w", encoding="utf-8") as fh:
        header = {"capacity": reservoir.capacity, "seen": reservoir.seen, "seed": seed,
                  "kind": reservoir.kind}
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for key, _, rec in sorted(reservoir._heap, key=lambda e: -e[1]):
            obj = json.loads(record_to_json(rec))
            obj["log_key"] = key
            fh.write(json.dumps(obj, separators=(",", ":")) + "\n")


def load_reservoir(path) -> Reservoir:
    """Rebuild a reservoir from :func:`dump_reservoir` output."""
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        rows = [json.loads(text) for text in fh if text.strip()]
    res = Reservoir(header["capacity"])
    res.kind = header.get("kind")
    res.seen = header["seen"]
    # arrival numbers are not stored; keep relative order just below `seen`
    first = res.seen - len(rows) + 1
    res._heap = [(row["log_key"], -(first + i), record_from_json(row)) for i, row in enumerate(rows)]
    if res.kind == "weighted":
        heapq.heapify(res._heap)
    return res
