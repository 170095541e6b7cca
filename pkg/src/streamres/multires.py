"""Per-stream reservoirs sharing a global entry budget.

Each sub-stream ``i`` that has delivered ``k_i`` records deserves a sample of
``r_i = k_i / (1 + k_i * e**2)`` entries. When the budget ``M`` cannot hold
them all, capacities are set proportionally: ``floor(M * r_i / sum(r))``.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, asdict
from typing import Dict, List, Mapping

from .errors import BudgetTooSmall, EOutOfRange, InvalidConfig, NoActiveStreams
from .ingest import Record, record_to_json
from .sampling import Reservoir, reservoir_contents, weighted_reservoir_insert

__all__ = [
    "AllocationPolicy",
    "ReservoirPool",
    "sample_size",
    "required_size",
    "allocate",
    "allocate_counts",
    "on_arrival",
]


def _check_e(e):
    if not (0.0 < e < 1.0):
        raise EOutOfRange(f"e must lie in (0, 1), got {e!r}")


def sample_size(N: int, e: float) -> float:
    """Sample size ``N / (1 + N e^2)`` for a population of ``N``."""
    _check_e(e)
    if N < 1:
        raise ValueError(f"population size must be >= 1, got {N!r}")
    return N / (1.0 + N * e * e)


def required_size(count: int, e: float) -> float:
    """Reservoir size a stream with ``count`` arrivals calls for."""
    _check_e(e)
    if count <= 0:
        return 0.0
    return count / (1.0 + count * e * e)


@dataclass(frozen=True)
class AllocationPolicy:
    e: float = 0.05
    M: int = 1000
    realloc_every: int = 1000

    def validate(self):
        _check_e(self.e)
        if not (isinstance(self.M, int) and self.M >= 1):
            raise InvalidConfig(f"policy.M must be a positive integer, got {self.M!r}")
        if not (isinstance(self.realloc_every, int) and self.realloc_every >= 1):
            raise InvalidConfig(f"policy.realloc_every must be a positive integer, got {self.realloc_every!r}")


def allocate_counts(counts: Mapping[str, int], policy: AllocationPolicy) -> Dict[str, int]:
    """Proportional capacities for the given arrival counts.

    Streams that floor to zero are raised to one entry, paid for out of the
    unallocated remainder first and then from the currently largest
    allocation, so every active stream keeps a sample.
    """
    active = sorted(s for s, c in counts.items() if c > 0)
    if not active:
        raise NoActiveStreams("no stream has any arrivals")
    M = policy.M
    if M < len(active):
        raise BudgetTooSmall(f"budget M={M} cannot give {len(active)} streams one entry each")
    r = {s: required_size(counts[s], policy.e) for s in active}
    total = sum(r.values())
    caps = {s: math.floor(M * (r[s] / total)) for s in active}
    # guard against float rounding pushing the floors past M
    while sum(caps.values()) > M:
        big = max(active, key=lambda s: (caps[s], s))
        caps[big] -= 1
    spare = M - sum(caps.values())
    for s in active:
        if caps[s] == 0:
            caps[s] = 1
            if spare > 0:
                spare -= 1
                continue
            # over budget: some cap is >= 2 because M >= len(active)
            donor = max(active, key=lambda t: (caps[t], -active.index(t)))
            caps[donor] -= 1
    return caps


class ReservoirPool:
    """One weighted reservoir per stream under a shared budget of ``policy.M`` entries."""

    def __init__(self, policy: AllocationPolicy = AllocationPolicy()):
        policy.validate()
        self.policy = policy
        self.reservoirs: Dict[str, Reservoir] = {}
        self.counts: Dict[str, int] = {}
        self.arrivals = 0

    def capacities(self) -> Dict[str, int]:
        return {s: res.capacity for s, res in self.reservoirs.items()}

    def size(self) -> int:
        return sum(len(res) for res in self.reservoirs.values())

    def drain(self) -> List[Record]:
        """Empty every reservoir and return the sample, ordered by (timestamp, stream)."""
        out = []
        for sid in sorted(self.reservoirs):
            out.extend(reservoir_contents(self.reservoirs[sid]))
            self.reservoirs[sid].clear()
        out.sort(key=lambda rec: (rec.timestamp, rec.stream_id))
        return out

    def reallocate(self, rng: random.Random) -> Dict[str, int]:
        caps = allocate(self)
        # shrink before growing so the budget holds throughout
        for sid in sorted(caps, key=lambda s: caps[s] >= self.reservoirs[s].capacity):
            self.reservoirs[sid].resize(caps[sid], rng)
        return caps

    def snapshot(self) -> dict:
        """JSON-ready view: per stream count, capacity, r_i and entries."""
        streams = {}
        for sid in sorted(self.reservoirs):
            res = self.reservoirs[sid]
            entries = []
            for entry in res.entries:
                obj = json.loads(record_to_json(entry.record))
                obj["log_key"] = entry.log_key
                entries.append(obj)
            streams[sid] = {
                "count": self.counts[sid],
                "capacity": res.capacity,
                "r_i": required_size(self.counts[sid], self.policy.e),
                "entries": entries,
            }
        return {"policy": asdict(self.policy), "arrivals": self.arrivals, "streams": streams}


def allocate(pool: ReservoirPool) -> Dict[str, int]:
    """Capacities the pool's current counts call for (does not apply them)."""
    return allocate_counts(pool.counts, pool.policy)


def on_arrival(pool: ReservoirPool, record: Record, rng: random.Random) -> ReservoirPool:
    """Route one record into its stream's reservoir.

    A previously unseen stream is registered and triggers an immediate
    re-allocation; otherwise capacities are recomputed every
    ``policy.realloc_every`` arrivals.
    """
    sid = record.stream_id
    res = pool.reservoirs.get(sid)
    if res is None and len(pool.reservoirs) >= pool.policy.M:
        raise BudgetTooSmall(f"budget M={pool.policy.M} cannot host another stream ({sid!r})")
    pool.counts[sid] = pool.counts.get(sid, 0) + 1
    pool.arrivals += 1
    if res is None:
        res = pool.reservoirs[sid] = Reservoir(1)
        res.kind = "weighted"
        pool.reallocate(rng)
    weighted_reservoir_insert(res, record, rng)
    if pool.arrivals % pool.policy.realloc_every == 0:
        pool.reallocate(rng)
    return pool
