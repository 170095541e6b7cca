import math
import random
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from streamres.errors import EmptyPopulation, KExceedsPopulation, NonPositiveWeight, UOutOfRange
from streamres.ingest import Record
from streamres.sampling import (
    Reservoir,
    derive_rng,
    dump_reservoir,
    load_reservoir,
    log_key,
    reservoir_contents,
    uniform_reservoir_insert,
    uniform_with_replacement,
    weighted_reservoir_insert,
    weighted_with_replacement,
    weighted_without_replacement,
)

from conftest import make_records


class RecordingRng(random.Random):
    """Keeps every value handed out by random() so tests can rebuild keys."""

    def __init__(self, seed):
        super().__init__(seed)
        self.draws = []

    def random(self):
        x = super().random()
        self.draws.append(x)
        return x


def test_log_key_examples():
    assert log_key(1, 0.5) == pytest.approx(-0.693147, abs=1e-6)
    assert log_key(3.7, 1.0) == 0.0
    assert log_key(2, 0.25) == pytest.approx(log_key(1, 0.5), rel=1e-15)
    assert 0.25 ** 0.5 == 0.5 ** 1


@pytest.mark.parametrize("w,u,err", [(0, 0.5, NonPositiveWeight), (-1, 0.5, NonPositiveWeight),
                                     (1, 0.0, UOutOfRange), (1, 1.5, UOutOfRange)])
def test_log_key_errors(w, u, err):
    with pytest.raises(err):
        log_key(w, u)


def test_log_transform_preserves_order():
    g = np.random.default_rng(11)
    u = 1.0 - g.random(100_000)
    w = g.uniform(0.05, 20.0, 100_000)
    direct = u ** (1.0 / w)
    logs = np.log(u) / w
    # sorting by the log key must leave the direct keys sorted too
    order = np.argsort(logs, kind="stable")
    assert np.all(np.diff(direct[order]) >= 0)


def test_one_shot_trivial_cases(rng):
    pop = make_records([1, 2, 3, 4])
    assert weighted_without_replacement(pop, 0, rng) == []
    assert sorted(weighted_without_replacement(pop, 4, rng), key=lambda r: r.timestamp) == pop
    with pytest.raises(KExceedsPopulation):
        weighted_without_replacement(pop, 5, rng)
    bad = [Record("s", 0, (0.0,), 1.0), Record("s", 1, (0.0,), 1.0)]
    object.__setattr__(bad[1], "weight", 0.0)
    with pytest.raises(NonPositiveWeight):
        weighted_without_replacement(bad, 1, rng)


def test_one_shot_first_pick_frequency():
    pop = make_records([1, 1, 2])
    rng = random.Random(5)
    hits = sum(weighted_without_replacement(pop, 1, rng)[0] is pop[2] for _ in range(100_000))
    assert 0.49 <= hits / 100_000 <= 0.51


def test_one_shot_distinct_and_deterministic():
    pop = make_records([0.5 + i % 7 for i in range(50)])
    a = weighted_without_replacement(pop, 20, derive_rng(1, "x"))
    b = weighted_without_replacement(pop, 20, derive_rng(1, "x"))
    assert a == b and len({id(r) for r in a}) == 20


def test_with_replacement():
    pop = make_records([1, 3])
    rng = random.Random(8)
    draws = weighted_with_replacement(pop, 100_000, rng)
    assert 0.74 <= sum(r is pop[1] for r in draws) / 100_000 <= 0.76
    assert weighted_with_replacement(pop, 0, rng) == []
    one = make_records([2.0])
    assert weighted_with_replacement(one, 5, rng) == [one[0]] * 5
    with pytest.raises(EmptyPopulation):
        weighted_with_replacement([], 1, rng)
    with pytest.raises(EmptyPopulation):
        uniform_with_replacement([], 1, rng)


def test_uniform_reservoir_single_slot_uniform():
    pop = make_records([1] * 5)
    rng = random.Random(21)
    counts = Counter()
    for _ in range(100_000):
        res = Reservoir(1)
        for rec in pop:
            uniform_reservoir_insert(res, rec, rng)
        counts[reservoir_contents(res)[0].timestamp] += 1
    for i in range(5):
        assert abs(counts[i] / 100_000 - 0.2) <= 0.01


def test_uniform_reservoir_fill_phase(rng):
    res = Reservoir(5)
    pop = make_records([1, 1, 1])
    for rec in pop:
        uniform_reservoir_insert(res, rec, rng)
    assert reservoir_contents(res) == pop and res.seen == 3 and res.replacements == 0


def test_weighted_reservoir_fill_phase(rng):
    res = Reservoir(4)
    pop = make_records([0.1, 5, 1e-6, 2])
    for rec in pop:
        weighted_reservoir_insert(res, rec, rng)
    assert reservoir_contents(res) == pop
    assert reservoir_contents(Reservoir(3)) == []


def test_heavy_record_retained():
    rng = random.Random(3)
    kept = 0
    for _ in range(20_000):
        res = Reservoir(1)
        for rec in make_records([1, 1, 1, 1e9, 1, 1]):
            weighted_reservoir_insert(res, rec, rng)
        kept += reservoir_contents(res)[0].weight == 1e9
    assert kept / 20_000 >= 0.999


def test_uniform_subsets_from_weighted_reservoir():
    rng = random.Random(17)
    pop = make_records([1, 1, 1, 1])
    counts = Counter()
    trials = 60_000
    for _ in range(trials):
        res = Reservoir(2)
        for rec in pop:
            weighted_reservoir_insert(res, rec, rng)
        counts[frozenset(r.timestamp for r in reservoir_contents(res))] += 1
    assert len(counts) == 6
    for c in counts.values():
        assert abs(c / trials - 1 / 6) <= 0.01


@settings(max_examples=50, deadline=None)
@given(weights=st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=60),
       k=st.integers(1, 10), seed=st.integers(0, 2**32))
def test_contents_match_full_sort(weights, k, seed):
    rng = RecordingRng(seed)
    pop = make_records(weights)
    res = Reservoir(k)
    for rec in pop:
        weighted_reservoir_insert(res, rec, rng)
    keys = [math.log(1.0 - u) / w for u, w in zip(rng.draws, weights)]
    # stable sort on -key: earlier arrival wins ties
    want = sorted(range(len(pop)), key=lambda i: -keys[i])[:k]
    got = reservoir_contents(res)
    assert len(got) == min(k, len(pop))
    assert sorted(r.timestamp for r in got) == sorted(want)
    assert res.seen == len(pop)


def test_tie_keeps_earlier_arrival():
    class Const(random.Random):
        def random(self):
            return 0.5
    res = Reservoir(1)
    a, b = make_records([1, 1])
    weighted_reservoir_insert(res, a, Const())
    weighted_reservoir_insert(res, b, Const())
    assert reservoir_contents(res) == [a] and res.replacements == 0


def test_mixing_insert_kinds_rejected(rng):
    res = Reservoir(2)
    rec = make_records([1])[0]
    uniform_reservoir_insert(res, rec, rng)
    with pytest.raises(ValueError):
        weighted_reservoir_insert(res, rec, rng)


def test_identical_seeds_identical_reservoirs():
    pop = make_records([1 + (i * 37) % 11 for i in range(500)])
    out = []
    for _ in range(2):
        rng, res = derive_rng(9, "sample"), Reservoir(25)
        for rec in pop:
            weighted_reservoir_insert(res, rec, rng)
        out.append([(e.record, e.log_key) for e in res.entries])
    assert out[0] == out[1]


def test_replacement_count_small_case():
    # exact expectation sum_{i=k+1}^{n} k/i for k=3, n=50
    expected = sum(3 / i for i in range(4, 51))
    rng = random.Random(2)
    pop = make_records([1] * 50)
    total = 0
    for _ in range(4000):
        res = Reservoir(3)
        for rec in pop:
            uniform_reservoir_insert(res, rec, rng)
        total += res.replacements
    assert abs(total / 4000 - expected) / expected < 0.05


@pytest.mark.parametrize("kind", ["weighted", "uniform"])
def test_snapshot_roundtrip(tmp_path, kind):
    rng = random.Random(4)
    res = Reservoir(6)
    insert = weighted_reservoir_insert if kind == "weighted" else uniform_reservoir_insert
    for rec in make_records([1 + i % 4 for i in range(40)]):
        insert(res, rec, rng)
    path = tmp_path / "res.jsonl"
    dump_reservoir(res, path, seed=4)
    back = load_reservoir(path)
    assert (back.capacity, back.seen, back.kind) == (6, 40, kind)
    assert reservoir_contents(back) == reservoir_contents(res)
    assert [e.log_key for e in back.entries] == [e.log_key for e in res.entries]
    assert back.min_key() == res.min_key()
    # a restored reservoir keeps sampling
    insert(back, make_records([1e12])[0], rng)
    assert back.seen == 41


def test_resize_shrinks_randomly(rng):
    res = Reservoir(10)
    for rec in make_records([1] * 10):
        weighted_reservoir_insert(res, rec, rng)
    res.resize(4, rng)
    assert len(res) == 4 and res.capacity == 4
    assert res.min_key() == min(e.log_key for e in res.entries)
