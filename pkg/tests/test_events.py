import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from streamres.errors import DegenerateCluster, MismatchedWindow, NoLabels
from streamres.events import (
    Event,
    OutlierRule,
    detect_outliers,
    evaluate,
    event_report,
    event_score,
    f_measure,
    is_positive,
    metrics_from_counts,
)
from streamres.ingest import Record, SyntheticSpec, generate_synthetic
from streamres.resmeans import ClusterConfig, Window, WindowClustering, cluster_window


def line_clustering(xs, labels=None):
    """One 1-d cluster centred at 0 holding points ``xs``."""
    recs = [Record("s", i, (float(x),), label=None if labels is None else labels[i]) for i, x in enumerate(xs)]
    n = len(xs)
    d = np.abs(np.asarray(xs, dtype=float))
    c = WindowClustering(
        centroids=np.zeros((1, 1)),
        assignment=np.zeros(n, dtype=np.intp),
        sse_per_cluster=np.array([float((d ** 2).sum())]),
        sse_per_dimension=np.array([[float((d ** 2).sum())]]),
        sse_total=float((d ** 2).sum()),
        iterations=1,
        mean_distance=np.array([d.mean() if n else 0.0]),
    )
    return c, Window(recs, 0)


def test_zero_spread_flags_nothing():
    c, w = line_clustering([0.0] * 6)
    assert detect_outliers(c, w) == []


def test_single_extreme_point_plain_vs_robust():
    d = np.array([1, 1, 1, 1, 100.0])
    # plain rule: mean 20.8, population sd 39.6, threshold 139.6 masks the outlier
    assert d.mean() == pytest.approx(20.8)
    assert d.std() == pytest.approx(39.6)
    assert OutlierRule(3.0, robust=False).threshold(d) == pytest.approx(139.6)
    c, w = line_clustering(d)
    assert detect_outliers(c, w, OutlierRule(3.0, robust=False)) == []
    flagged = detect_outliers(c, w, OutlierRule(3.0))
    assert [e.index for e in flagged] == [4] and flagged[0].distance == 100


def test_singleton_cluster_flags_nothing():
    c, w = line_clustering([42.0])
    assert detect_outliers(c, w) == []


def test_mismatched_window():
    c, _ = line_clustering([1.0, 2.0])
    with pytest.raises(MismatchedWindow):
        detect_outliers(c, Window([Record("s", 0, (1.0,))], 0))


def test_event_score_examples():
    c, _ = line_clustering([1.0, 1.0])  # mean distance 1
    assert event_score(0, [], c) == 0
    two = [Event(0, 0, 0, 2.0, 2.0)]
    assert event_score(0, two, c) == 2
    three = [Event(0, i, 0, d, d) for i, d in enumerate((4.0, 5.0, 6.0))]
    assert event_score(0, three, c) == 15


def test_event_score_degenerate():
    c, _ = line_clustering([0.0, 0.0])
    with pytest.raises(DegenerateCluster):
        event_score(0, [Event(0, 0, 0, 1.0, 1.0)], c)


@settings(max_examples=100, deadline=None)
@given(a=st.lists(st.floats(0, 1e3), max_size=10), b=st.lists(st.floats(0, 1e3), max_size=10),
       mu=st.floats(0.1, 100))
def test_event_score_additive(a, b, mu):
    c, _ = line_clustering([mu, mu])
    ea = [Event(0, i, 0, d, d / mu) for i, d in enumerate(a)]
    eb = [Event(0, 100 + i, 0, d, d / mu) for i, d in enumerate(b)]
    assert event_score(0, ea + eb, c) == pytest.approx(event_score(0, ea, c) + event_score(0, eb, c), rel=1e-12, abs=1e-12)


def test_metrics_examples():
    m = metrics_from_counts(1, 0, 0)
    assert (m.precision, m.recall, m.f_measure) == (1, 1, 1)
    assert f_measure(51.2, 44.8) == pytest.approx(47.787, abs=1e-3)
    z = metrics_from_counts(0, 0, 0)
    assert (z.precision, z.recall, z.f_measure) == (0, 0, 0)


@settings(max_examples=200)
@given(tp=st.integers(0, 1000), fp=st.integers(0, 1000), fn=st.integers(0, 1000))
def test_metric_bounds(tp, fp, fn):
    m = metrics_from_counts(tp, fp, fn)
    for v in (m.precision, m.recall, m.f_measure):
        assert 0 <= v <= 1
    p, r = m.precision, m.recall
    want = 2 * p * r / (p + r) if p + r else 0.0
    assert abs(m.f_measure - want) <= 1e-9


def test_is_positive():
    assert is_positive("anomaly") and is_positive("Sensor not working")
    assert not is_positive("cluster-3") and not is_positive(None)


def test_evaluate_requires_labels():
    c, w = line_clustering([1.0, 2.0])
    with pytest.raises(NoLabels):
        evaluate([], w)


def _labelled_window(seed, n=200, rate=0.1, offset=10.0):
    spec = SyntheticSpec(2, ((0, 0), (20, 0)), 1.0, rate, offset, seed=seed)
    recs = generate_synthetic(spec, n)
    return Window(recs, 0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), l1=st.floats(0.1, 6), l2=st.floats(0.1, 6), robust=st.booleans())
def test_flag_set_shrinks_as_lambda_grows(seed, l1, l2, robust):
    lo, hi = sorted((l1, l2))
    w = _labelled_window(seed, n=80)
    c = cluster_window(w, ClusterConfig(k=2, window_size=80, n_init=2), rng=random.Random(seed))
    small = {e.index for e in detect_outliers(c, w, OutlierRule(hi, robust))}
    large = {e.index for e in detect_outliers(c, w, OutlierRule(lo, robust))}
    assert small <= large


def test_shuffle_invariance():
    w = _labelled_window(4)
    c = cluster_window(w, ClusterConfig(k=2, window_size=200), rng=random.Random(0))
    m1 = evaluate(detect_outliers(c, w), w)
    perm = list(range(len(w.records)))
    random.Random(1).shuffle(perm)
    w2 = Window([w.records[i] for i in perm], 0)
    c2 = cluster_window(w2, ClusterConfig(k=2, window_size=200), warm_start=c.centroids)
    m2 = evaluate(detect_outliers(c2, w2), w2)
    assert m1 == m2


@pytest.mark.parametrize("lam", [1.0, 3.0, 5.0])
def test_injected_anomalies_all_flagged(lam):
    # k = 2 clusters at distance 40; anomalies at 10 sigma from every mean
    spec = SyntheticSpec(2, ((0, 0), (40, 0)), 1.0, 0.04, 10.0, seed=31)
    w = Window(generate_synthetic(spec, 500), 0)
    c = cluster_window(w, ClusterConfig(k=2, window_size=500), rng=random.Random(3))
    m = evaluate(detect_outliers(c, w, OutlierRule(lam)), w)
    assert m.tp > 0 and m.fn == 0


def test_event_report_shape():
    w = _labelled_window(8)
    c = cluster_window(w, ClusterConfig(k=2, window_size=200), rng=random.Random(0))
    c.window_seq = 7
    rep = event_report(c, w)
    assert set(rep) == {"window_seq", "events", "scores", "metrics"}
    assert rep["window_seq"] == 7 and set(rep["scores"]) == {"0", "1"}
    assert set(rep["metrics"]) == {"tp", "fp", "fn", "precision", "recall", "f"}
    for ev in rep["events"]:
        assert set(ev) == {"cluster_id", "index", "distance"}
