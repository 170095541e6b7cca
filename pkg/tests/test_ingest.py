import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from streamres.errors import (
    InvalidSpec,
    MissingFile,
    NonFiniteFeature,
    NonPositiveWeight,
    SchemaMismatch,
)
from streamres.ingest import (
    Record,
    SyntheticSpec,
    WeightLaw,
    generate_synthetic,
    read_records,
    record_to_json,
    write_records,
)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_csv_default_weight_and_empty_label(tmp_path):
    p = write(tmp_path, "a.csv", "stream_id,timestamp,f1,f2,weight,label\ns1,5,1.0,2.0,,\n")
    (rec,) = list(read_records(p))
    assert rec == Record("s1", 5, (1.0, 2.0), 1.0, None)
    assert rec.weight == 1.0


def test_csv_zero_weight_is_an_error_with_line(tmp_path):
    p = write(tmp_path, "a.csv", "stream_id,timestamp,f1,weight\ns1,1,1.0,2\ns1,2,1.0,0\n")
    with pytest.raises(NonPositiveWeight) as exc:
        list(read_records(p))
    assert exc.value.line == 3


@pytest.mark.parametrize("row,err", [
    ("s1,1,1.0", SchemaMismatch),          # wrong arity
    ("s1,1,1.0,nan", NonFiniteFeature),
    ("s1,1,1.0,inf", NonFiniteFeature),
    ("s1,1,1.0,abc", SchemaMismatch),
    ("s1,-1,1.0,2.0", SchemaMismatch),
    ("s1,1.5,1.0,2.0", SchemaMismatch),
])
def test_csv_row_errors(tmp_path, row, err):
    p = write(tmp_path, "a.csv", f"stream_id,timestamp,f1,f2\ns0,0,0,0\n{row}\n")
    with pytest.raises(err) as exc:
        list(read_records(p))
    assert exc.value.line == 3


def test_csv_decreasing_timestamp_within_stream(tmp_path):
    p = write(tmp_path, "a.csv", "stream_id,timestamp,f1\na,5,0\nb,1,0\na,4,0\n")
    with pytest.raises(SchemaMismatch) as exc:
        list(read_records(p))
    assert exc.value.line == 4


def test_missing_file(tmp_path):
    with pytest.raises(MissingFile):
        read_records(tmp_path / "nope.csv")


def test_jsonl_count_and_order(tmp_path):
    lines = [json.dumps({"stream_id": f"s{i % 3}", "ts": i, "features": [i, -i], "label": str(i)})
             for i in range(1000)]
    p = write(tmp_path, "a.jsonl", "\n".join(lines) + "\n")
    # independent line count
    with open(p) as fh:
        expected = sum(1 for line in fh if line.strip())
    recs = list(read_records(p))
    assert len(recs) == expected == 1000
    assert [r.label for r in recs] == [str(i) for i in range(1000)]


def test_jsonl_errors_carry_line(tmp_path):
    p = write(tmp_path, "a.jsonl", '{"stream_id":"a","ts":0,"features":[1]}\n{"stream_id":"a","ts":1}\n')
    with pytest.raises(SchemaMismatch) as exc:
        list(read_records(p))
    assert exc.value.line == 2


def test_roundtrip_jsonl_and_csv_bit_exact(tmp_path):
    spec = SyntheticSpec(2, ((0, 0), (3, 3)), 0.7, 0.1, 8.0, "pareto(1.5)", seed=3, stream_weights=(1, 2))
    recs = generate_synthetic(spec, 200)
    for fmt in ("jsonl", "csv"):
        p = tmp_path / f"r.{fmt}"
        write_records(recs, p, fmt)
        assert list(read_records(p)) == recs


def test_record_invariants():
    with pytest.raises(NonPositiveWeight):
        Record("a", 0, (1.0,), 0.0)
    with pytest.raises(NonPositiveWeight):
        Record("a", 0, (1.0,), math.inf)
    with pytest.raises(NonFiniteFeature):
        Record("a", 0, (math.nan,))
    with pytest.raises(SchemaMismatch):
        Record("a", 0, ())


def test_weight_law_parse():
    assert WeightLaw.parse("constant") == WeightLaw("constant", 1.0)
    assert WeightLaw.parse("exponential(2)") == WeightLaw("exponential", 2.0)
    assert str(WeightLaw.parse("pareto(1.5)")) == "pareto(1.5)"
    for bad in ("pareto", "gamma(1)", "pareto(-1)"):
        with pytest.raises(InvalidSpec):
            WeightLaw.parse(bad)


def test_degenerate_generator():
    spec = SyntheticSpec(1, ((1.0, 2.0),), stddev=1e-300)
    recs = generate_synthetic(spec, 50)
    assert all(r.features == (1.0, 2.0) and r.label == "cluster-0" for r in recs)


def test_generator_deterministic():
    spec = SyntheticSpec(3, ((0, 0), (5, 0), (0, 5)), 1.0, 0.1, 6.0, "exponential(1.0)", seed=99)
    a = [record_to_json(r) for r in generate_synthetic(spec, 500)]
    b = [record_to_json(r) for r in generate_synthetic(spec, 500)]
    assert a == b


def test_anomaly_count_binomial_interval():
    # Binomial(10000, 0.05): sd = sqrt(10000*.05*.95) = 21.79; 99.99% two-sided z = 3.89
    lo, hi = 500 - 3.89 * 21.79, 500 + 3.89 * 21.79
    assert 400 <= lo and hi <= 600
    spec = SyntheticSpec(3, ((0, 0), (10, 0), (0, 10)), 1.0, 0.05, 10.0, seed=2024)
    n = sum(r.label == "anomaly" for r in generate_synthetic(spec, 10000))
    assert lo <= n <= hi


@pytest.mark.parametrize("kw", [
    dict(means=((0, 0), (0, 0))),
    dict(anomaly_rate=0.5),
    dict(stddev=0.0),
    dict(means=((0, 0),)),
])
def test_invalid_spec(kw):
    base = dict(n_clusters=2, means=((0, 0), (1, 1)))
    base.update(kw)
    with pytest.raises(InvalidSpec):
        generate_synthetic(SyntheticSpec(**base), 10)


means_st = st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=1, max_size=4, unique=True)


@settings(max_examples=40, deadline=None)
@given(means=means_st, stddev=st.floats(0.01, 3), rate=st.floats(0, 0.45),
       offset=st.floats(1, 12), law=st.sampled_from(["constant", "exponential(0.5)", "pareto(1.2)"]),
       seed=st.integers(0, 2**63 - 1))
def test_generated_records_satisfy_invariants(means, stddev, rate, offset, law, seed):
    spec = SyntheticSpec(len(means), tuple(means), stddev, rate, offset, law, seed)
    try:
        recs = generate_synthetic(spec, 60)
    except InvalidSpec:
        return  # means too dense to place anomalies
    radius = offset * stddev
    last = {}
    for r in recs:
        assert r.dim == 2
        assert r.weight > 0 and math.isfinite(r.weight)
        assert all(math.isfinite(v) for v in r.features)
        assert r.timestamp >= last.get(r.stream_id, 0)
        last[r.stream_id] = r.timestamp
        if r.label == "anomaly":
            d = min(math.dist(r.features, m) for m in spec.means)
            assert d >= radius * (1 - 1e-9)
        else:
            assert r.label.startswith("cluster-")
