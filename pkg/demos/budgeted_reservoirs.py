"""
Many streams, one memory budget
===============================

Each sub-stream gets its own reservoir. Capacities follow the streams'
required sample sizes and are rescaled so that together they fit in M
entries; a rare stream still keeps at least one slot.
"""
import random

from streamres.ingest import Record
from streamres.multires import AllocationPolicy, ReservoirPool, allocate_counts, on_arrival, required_size

policy = AllocationPolicy(e=0.05, M=100)

# the worked case: 10000 vs 100 arrivals
counts = {"busy": 10000, "quiet": 100}
for sid, n in counts.items():
    print(f"{sid:6s} arrivals={n:6d} required={required_size(n, policy.e):7.2f}")
print("capacities:", allocate_counts(counts, policy))

# a live pool over a skewed feed; capacities are revised every 1000 arrivals
rng = random.Random(0)
pool = ReservoirPool(AllocationPolicy(e=0.05, M=100, realloc_every=1000))
streams = ["a", "b", "c", "d"]
for t in range(50000):
    sid = rng.choices(streams, weights=[200, 20, 2, 1])[0]
    on_arrival(pool, Record(sid, t, (rng.gauss(0, 1),)), rng)
    if t + 1 in (1000, 10000, 50000):
        print(f"after {t + 1:5d}: counts={pool.counts} capacities={pool.capacities()} used={pool.size()}")
