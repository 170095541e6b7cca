"""Outlier events from window clusterings, their scores, and P/R/F evaluation."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .errors import DegenerateCluster, InvalidConfig, MismatchedWindow, NoLabels
from .resmeans import Window, WindowClustering, as_matrix

__all__ = [
    "OutlierRule",
    "Event",
    "MetricsReport",
    "MAD_SCALE",
    "is_positive",
    "member_distances",
    "detect_outliers",
    "event_score",
    "f_measure",
    "metrics_from_counts",
    "evaluate",
    "event_report",
]

# MAD -> standard deviation under normality
MAD_SCALE = 1.4826

_CLUSTER_LABEL = re.compile(r"cluster-\d+$")


@dataclass(frozen=True)
class OutlierRule:
    """Flag ``d > center + lam * spread`` within each cluster.

    ``robust=True`` uses median and ``MAD_SCALE * MAD``; ``False`` uses the
    mean and (population) standard deviation.
    """

    lam: float = 3.0
    robust: bool = True

    def validate(self):
        if not self.lam > 0:
            raise InvalidConfig(f"rule.lam must be positive, got {self.lam!r}")

    def threshold(self, distances) -> float:
        d = np.asarray(distances, dtype=float)
        if self.robust:
            center = float(np.median(d))
            spread = MAD_SCALE * float(np.median(np.abs(d - center)))
        else:
            center = float(d.mean())
            spread = float(d.std())
        return center + self.lam * spread


@dataclass(frozen=True)
class Event:
    window_seq: int
    index: int
    cluster_id: int
    distance: float
    score_contribution: float


@dataclass(frozen=True)
class MetricsReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f_measure: float

    def to_json(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "precision": self.precision,
                "recall": self.recall, "f": self.f_measure}

    def percent(self) -> str:
        return (f"P={100 * self.precision:.1f} R={100 * self.recall:.1f} "
                f"F={100 * self.f_measure:.1f}")


def is_positive(label: Optional[str]) -> bool:
    """Ground-truth positive: labelled, and not a ``cluster-<i>`` label."""
    return label is not None and not _CLUSTER_LABEL.match(label)


def member_distances(clustering: WindowClustering, window) -> np.ndarray:
    """Euclidean distance of every window record to its assigned centroid."""
    records = window.records if isinstance(window, Window) else window
    X = as_matrix(records)
    if len(X) != clustering.n_records:
        raise MismatchedWindow(f"window has {len(X)} records, clustering {clustering.n_records}")
    if len(X) == 0:
        return np.zeros(0)
    if X.shape[1] != clustering.centroids.shape[1]:
        raise MismatchedWindow("window and clustering dimensionality differ")
    return np.sqrt(((X - clustering.centroids[clustering.assignment]) ** 2).sum(axis=1))


def detect_outliers(clustering: WindowClustering, window, rule: OutlierRule = OutlierRule()) -> List[Event]:
    """Records lying beyond their cluster's distance threshold, in record order.

    Clusters with fewer than two members flag nothing.
    """
    rule.validate()
    dist = member_distances(clustering, window)
    labels = clustering.assignment
    flagged = np.zeros(len(dist), dtype=bool)
    mean_d = np.zeros(clustering.k)
    for c in range(clustering.k):
        members = labels == c
        if not members.any():
            continue
        mean_d[c] = dist[members].mean()
        if members.sum() < 2:
            continue
        flagged |= members & (dist > rule.threshold(dist[members]))
    events = []
    for i in np.flatnonzero(flagged):
        c = int(labels[i])
        events.append(Event(clustering.window_seq, int(i), c, float(dist[i]), float(dist[i] / mean_d[c])))
    return events


def event_score(cluster_id: int, events: Iterable[Event], clustering: WindowClustering) -> float:
    """Sum of the cluster's outlier distances divided by its mean member distance."""
    events = [e for e in events if e.cluster_id == cluster_id]
    if not events:
        return 0.0
    if clustering.mean_distance is None:
        raise ValueError("clustering lacks mean member distances; rebuild it with records")
    mu = float(clustering.mean_distance[cluster_id])
    if mu <= 0:
        raise DegenerateCluster(f"cluster {cluster_id} has zero mean distance but {len(events)} outliers")
    return sum(e.distance for e in events) / mu


def f_measure(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def metrics_from_counts(tp: int, fp: int, fn: int) -> MetricsReport:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    return MetricsReport(tp, fp, fn, p, r, f_measure(p, r))


def evaluate(events: Iterable[Event], window) -> MetricsReport:
    """Confusion counts of the flagged set against ground-truth labels."""
    records = window.records if isinstance(window, Window) else window
    labels = [r.label for r in records]
    if all(lbl is None for lbl in labels):
        raise NoLabels("window records carry no labels")
    flagged = {e.index for e in events}
    tp = fp = fn = 0
    for i, lbl in enumerate(labels):
        pos = is_positive(lbl)
        if i in flagged:
            if pos:
                tp += 1
            else:
                fp += 1
        elif pos:
            fn += 1
    return metrics_from_counts(tp, fp, fn)


def event_report(clustering: WindowClustering, window, rule: OutlierRule = OutlierRule()) -> dict:
    """Everything detected in one window, as the events-file JSON object.

    ``metrics`` is ``None`` when the window is unlabelled.
    """
    events = detect_outliers(clustering, window, rule)
    scores = {str(c): event_score(c, events, clustering) for c in range(clustering.k)}
    try:
        metrics = evaluate(events, window).to_json()
    except NoLabels:
        metrics = None
    return {
        "window_seq": clustering.window_seq,
        "events": [{"cluster_id": e.cluster_id, "index": e.index, "distance": e.distance} for e in events],
        "scores": scores,
        "metrics": metrics,
    }
