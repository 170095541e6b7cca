"""
Weighted sampling without replacement
=====================================

One key per item, ``ln(u) / w``; the k largest keys are the sample. The
same keys drive both the one-shot sampler and the streaming reservoir, so
the two produce the same subset distribution.
"""
import random
from collections import Counter

from streamres.ingest import Record
from streamres.sampling import (
    Reservoir,
    reservoir_contents,
    weighted_reservoir_insert,
    weighted_without_replacement,
)

items = [Record("s", i, (float(i),), weight=w) for i, w in enumerate([1, 2, 3, 4, 5, 6])]
trials = 50000

# one-shot: the whole population is in memory
rng = random.Random(1)
oneshot = Counter(
    tuple(sorted(r.timestamp for r in weighted_without_replacement(items, 3, rng))) for _ in range(trials)
)

# streaming: items arrive one at a time into a reservoir of 3
rng = random.Random(2)
stream = Counter()
for _ in range(trials):
    res = Reservoir(3)
    for rec in items:
        weighted_reservoir_insert(res, rec, rng)
    stream[tuple(sorted(r.timestamp for r in reservoir_contents(res)))] += 1

print("subset      one-shot  stream")
for subset, _ in oneshot.most_common(6):
    print(f"{subset}  {oneshot[subset] / trials:8.4f}  {stream[subset] / trials:6.4f}")

tv = 0.5 * sum(abs(oneshot[s] - stream[s]) for s in set(oneshot) | set(stream)) / trials
print(f"total variation distance: {tv:.4f}")

# the heaviest item is the first pick with probability 6/21
first = Counter(weighted_without_replacement(items, 1, rng)[0].timestamp for _ in range(trials))
print(f"P(first pick = item 5): {first[5] / trials:.3f} (exact {6 / 21:.3f})")
