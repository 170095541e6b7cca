"""Windowed k-means over a record stream with SSE diagnostics.

The stream is cut into windows (by size, or by a timestamp timeout). The
first window is clustered from random medoids; every later window starts
from the previous window's final centroids, so cluster ``c`` keeps its
identity across windows. Each result carries the SSE per cluster, per
cluster and dimension, and in total.
"""
from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionOutOfRange,
    InvalidConfig,
    NonFiniteFeature,
    QOutOfRange,
    WindowTooSmall,
)
from .ingest import Record

log = logging.getLogger(__name__)

__all__ = [
    "ClusterConfig",
    "Window",
    "Centroid",
    "WindowClustering",
    "as_matrix",
    "minkowski",
    "assign",
    "update_centroids",
    "sse_cluster",
    "sse_dimension",
    "sse_total",
    "cluster_window",
    "run_stream",
]


@dataclass(frozen=True)
class ClusterConfig:
    """Clustering parameters.

    ``window_timeout`` is in timestamp units (``None`` disables it).
    ``n_init`` medoid restarts are tried on a cold start and the lowest-SSE
    run is kept; warm-started windows run once.
    """

    k: int = 3
    q: float = 2.0
    window_size: int = 500
    window_timeout: Optional[int] = None
    max_iterations: int = 100
    epsilon: float = 1e-6
    seed: int = 0
    n_init: int = 10

    def validate(self):
        if not (isinstance(self.k, int) and self.k >= 1):
            raise InvalidConfig(f"cluster.k must be a positive integer, got {self.k!r}")
        if not (isinstance(self.window_size, int) and self.window_size >= 1):
            raise InvalidConfig(f"cluster.window_size must be a positive integer, got {self.window_size!r}")
        if self.k > self.window_size:
            raise InvalidConfig(f"cluster.k ({self.k}) must be <= cluster.window_size ({self.window_size})")
        if not self.q >= 1:
            raise InvalidConfig(f"cluster.q must be >= 1, got {self.q!r}")
        if self.window_timeout is not None and not self.window_timeout > 0:
            raise InvalidConfig("cluster.window_timeout must be positive")
        if not (isinstance(self.max_iterations, int) and self.max_iterations >= 1):
            raise InvalidConfig("cluster.max_iterations must be a positive integer")
        if not self.epsilon > 0:
            raise InvalidConfig("cluster.epsilon must be positive")
        if not (isinstance(self.n_init, int) and self.n_init >= 1):
            raise InvalidConfig("cluster.n_init must be a positive integer")


@dataclass
class Window:
    records: List[Record]
    opened_at: int
    closed_by: str = "full"


@dataclass(frozen=True)
class Centroid:
    position: tuple
    cluster_id: int


@dataclass
class WindowClustering:
    centroids: np.ndarray            # (k, d)
    assignment: np.ndarray           # (n,)
    sse_per_cluster: np.ndarray      # (k,)
    sse_per_dimension: np.ndarray    # (k, d)
    sse_total: float
    iterations: int
    window_seq: int = 0
    closed_by: str = "full"
    mean_distance: Optional[np.ndarray] = None   # (k,) mean member distance
    sse_trace: List[float] = field(default_factory=list)
    initial_centroids: Optional[np.ndarray] = None

    @property
    def k(self) -> int:
        return len(self.centroids)

    @property
    def n_records(self) -> int:
        return len(self.assignment)

    def centroid_list(self) -> List[Centroid]:
        return [Centroid(tuple(p), c) for c, p in enumerate(self.centroids.tolist())]

    def to_json(self) -> dict:
        return {
            "window_seq": self.window_seq,
            "closed_by": self.closed_by,
            "n_records": self.n_records,
            "iterations": self.iterations,
            "centroids": self.centroids.tolist(),
            "sse_per_cluster": self.sse_per_cluster.tolist(),
            "sse_per_dimension": self.sse_per_dimension.tolist(),
            "sse_total": float(self.sse_total),
        }

    @classmethod
    def from_json(cls, obj: dict, records=None, q: float = 2.0) -> "WindowClustering":
        """Rebuild from a results line; ``records`` restores the assignment."""
        C = np.asarray(obj["centroids"], dtype=float)
        if records is not None:
            X = as_matrix(records)
            labels = assign(X, C, q)
            mean_d = _mean_distances(X, labels, C)
        else:
            labels = np.zeros(obj["n_records"], dtype=np.intp)
            mean_d = None
        return cls(
            centroids=C,
            assignment=labels,
            sse_per_cluster=np.asarray(obj["sse_per_cluster"], dtype=float),
            sse_per_dimension=np.asarray(obj["sse_per_dimension"], dtype=float),
            sse_total=float(obj["sse_total"]),
            iterations=int(obj["iterations"]),
            window_seq=int(obj["window_seq"]),
            closed_by=obj.get("closed_by", "full"),
            mean_distance=mean_d,
        )


def as_matrix(records) -> np.ndarray:
    """Stack records (or an array) into an ``(n, d)`` float matrix."""
    if isinstance(records, np.ndarray):
        X = np.asarray(records, dtype=float)
    else:
        records = list(records)
        if not records:
            return np.empty((0, 0))
        rows = [r.features if isinstance(r, Record) else tuple(r) for r in records]
        if len({len(r) for r in rows}) != 1:
            raise DimensionMismatch("records in one window must share dimensionality")
        X = np.array(rows, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return X


def minkowski(a, b, q: float = 2.0) -> float:
    """Minkowski distance of order ``q``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape {a.shape} vs {b.shape}")
    if not q >= 1:
        raise QOutOfRange(f"q must be >= 1, got {q!r}")
    diff = np.abs(a - b)
    if q == 2:
        return float(np.sqrt((diff * diff).sum()))
    if q == 1:
        return float(diff.sum())
    return float((diff ** q).sum() ** (1.0 / q))


def _pairwise(X, C, q=2.0):
    # returns a distance proxy that is monotone in the q-Minkowski distance
    diff = X[:, None, :] - C[None, :, :]
    if q == 2:
        return (diff * diff).sum(axis=2)
    return (np.abs(diff) ** q).sum(axis=2)


def assign(records, centroids, q: float = 2.0) -> np.ndarray:
    """Index of the nearest centroid for every record; ties go to the lower id."""
    X = as_matrix(records)
    C = np.asarray(centroids, dtype=float)
    if len(X) == 0:
        return np.zeros(0, dtype=np.intp)
    if X.shape[1] != C.shape[1]:
        raise DimensionMismatch(f"records have {X.shape[1]} features, centroids {C.shape[1]}")
    return _pairwise(X, C, q).argmin(axis=1)


def update_centroids(records, assignment, k: int) -> np.ndarray:
    """Mean of each cluster's members.

    An empty cluster is re-seeded at the record lying farthest from its own
    (updated) centroid; several empty clusters take successive farthest
    records.
    """
    X = as_matrix(records)
    labels = np.asarray(assignment)
    n, d = X.shape
    counts = np.bincount(labels, minlength=k)
    sums = np.zeros((k, d))
    np.add.at(sums, labels, X)
    C = np.zeros((k, d))
    nonempty = counts > 0
    C[nonempty] = sums[nonempty] / counts[nonempty, None]
    empty = np.flatnonzero(~nonempty)
    if len(empty):
        dist = ((X - C[labels]) ** 2).sum(axis=1)
        # stable: among equal distances the lower index wins
        order = np.argsort(-dist, kind="stable")
        for c, i in zip(empty, order):
            C[c] = X[i]
    return C


def sse_cluster(members, centroid) -> float:
    """Sum of squared Euclidean distances from ``members`` to ``centroid``."""
    X = as_matrix(members)
    if len(X) == 0:
        return 0.0
    diff = X - np.asarray(centroid, dtype=float)
    return float((diff * diff).sum(axis=1).sum())


def sse_dimension(members, centroid, t: int) -> float:
    """Squared deviation from the centroid summed along dimension ``t`` only."""
    centroid = np.asarray(centroid, dtype=float)
    if not 0 <= t < len(centroid):
        raise DimensionOutOfRange(f"dimension {t} outside [0, {len(centroid)})")
    X = as_matrix(members)
    if len(X) == 0:
        return 0.0
    dev = X[:, t] - centroid[t]
    return float((dev * dev).sum())


def sse_total(clustering: WindowClustering) -> float:
    return float(np.sum(clustering.sse_per_cluster))


def _diagnostics(X, labels, C):
    k, d = C.shape
    sq = (X - C[labels]) ** 2
    per_dim = np.zeros((k, d))
    np.add.at(per_dim, labels, sq)
    per_cluster = np.bincount(labels, weights=sq.sum(axis=1), minlength=k)
    return per_cluster, per_dim


def _mean_distances(X, labels, C):
    k = len(C)
    dist = np.sqrt(((X - C[labels]) ** 2).sum(axis=1))
    counts = np.bincount(labels, minlength=k)
    sums = np.bincount(labels, weights=dist, minlength=k)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)


def _lloyd(X, C, cfg):
    k = len(C)
    trace = []
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        labels = assign(X, C, cfg.q)
        C_new = update_centroids(X, labels, k)
        sq = ((X - C_new[labels]) ** 2).sum(axis=1)
        trace.append(float(sq.sum()))
        shift = np.sqrt(((C_new - C) ** 2).sum(axis=1)).max()
        C = C_new
        if shift < cfg.epsilon:
            break
    return C, assign(X, C, cfg.q), trace, it


def cluster_window(window, config: ClusterConfig, warm_start=None, rng: Optional[random.Random] = None) -> WindowClustering:
    """Cluster one window.

    Without ``warm_start`` the initial centroids are ``k`` distinct records
    picked uniformly (``config.n_init`` tries, lowest SSE kept). With it,
    Lloyd iterations start from ``warm_start`` as given.
    """
    records = window.records if isinstance(window, Window) else window
    X = as_matrix(records)
    if X.size and not np.isfinite(X).all():
        raise NonFiniteFeature("window contains non-finite features")
    k = config.k
    n = len(X)
    if rng is None:
        rng = random.Random(config.seed)

    if warm_start is None:
        if n < k:
            raise WindowTooSmall(f"window has {n} records, need at least k={k}")
        best = None
        for _ in range(config.n_init):
            idx = rng.sample(range(n), k)
            C0 = X[idx].copy()
            run = _lloyd(X, C0, config)
            total = float(_diagnostics(X, run[1], run[0])[0].sum())
            if best is None or total < best[0]:
                best = (total, C0, run)
        _, init, (C, labels, trace, iters) = best
    else:
        init = warm_start
        C0 = np.array(warm_start, dtype=float)
        if C0.shape != (k, X.shape[1]):
            raise DimensionMismatch(f"warm start has shape {C0.shape}, expected {(k, X.shape[1])}")
        if n == 0:
            raise WindowTooSmall("cannot cluster an empty window")
        C, labels, trace, iters = _lloyd(X, C0, config)

    per_cluster, per_dim = _diagnostics(X, labels, C)
    return WindowClustering(
        centroids=C,
        assignment=labels,
        sse_per_cluster=per_cluster,
        sse_per_dimension=per_dim,
        sse_total=float(per_cluster.sum()),
        iterations=iters,
        closed_by=window.closed_by if isinstance(window, Window) else "full",
        mean_distance=_mean_distances(X, labels, C),
        sse_trace=trace,
        initial_centroids=init,
    )


Sink = Callable[[WindowClustering, Window], None]


def run_stream(source: Iterable[Record], config: ClusterConfig, sink: Optional[Sink] = None,
               results=None, rng: Optional[random.Random] = None) -> int:
    """Cut ``source`` into windows, cluster each, and hand the results on.

    A window closes when it holds ``window_size`` records, or when a record
    arrives ``window_timeout`` or more after the window opened. A window
    closed by timeout with fewer than ``k`` records is carried into the next
    one; a trailing window that small is dropped. Each result goes to
    ``sink(clustering, window)`` and, when ``results`` is a writable text
    file, as one JSON line. Returns the number of windows clustered.
    """
    config.validate()
    if rng is None:
        rng = random.Random(config.seed)
    pending: List[Record] = []
    opened_at = 0
    prev = None
    seq = 0

    def close(reason):
        nonlocal prev, seq, pending
        if len(pending) < config.k:
            return False
        window = Window(pending, opened_at, reason)
        clustering = cluster_window(window, config, None if prev is None else prev.centroids, rng)
        clustering.window_seq = seq
        if results is not None:
            results.write(json.dumps(clustering.to_json(), separators=(",", ":")) + "\n")
        if sink is not None:
            sink(clustering, window)
        prev = clustering
        seq += 1
        pending = []
        return True

    timeout = config.window_timeout
    for rec in source:
        if pending and timeout is not None and rec.timestamp - opened_at >= timeout:
            if not close("timeout"):
                # too small to cluster: carry the records into a window opening now
                opened_at = rec.timestamp
        if not pending:
            opened_at = rec.timestamp
        pending.append(rec)
        if len(pending) >= config.window_size:
            close("full")
    if pending and not close("end"):
        log.warning("dropping %d trailing records (fewer than k=%d)", len(pending), config.k)
    return seq
