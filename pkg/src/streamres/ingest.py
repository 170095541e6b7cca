"""Record sources: CSV/JSONL readers and a seeded synthetic generator.

Every downstream stage consumes :class:`Record`. An absent weight is
materialised as 1.0, so an unweighted stream is just a weighted stream
with unit weights.
"""
from __future__ import annotations

import csv
import json
import math
import os
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import (
    InvalidSpec,
    MissingFile,
    NonFiniteFeature,
    NonPositiveWeight,
    SchemaMismatch,
)

__all__ = [
    "Record",
    "WeightLaw",
    "SyntheticSpec",
    "read_records",
    "write_records",
    "record_to_json",
    "record_from_json",
    "generate_synthetic",
]


@dataclass(frozen=True, slots=True)
class Record:
    """One stream element."""

    stream_id: str
    timestamp: int
    features: tuple
    weight: float = 1.0
    label: Optional[str] = None

    def __post_init__(self):
        feats = tuple(float(v) for v in self.features)
        if not feats:
            raise SchemaMismatch("record needs at least one feature")
        if not all(math.isfinite(v) for v in feats):
            raise NonFiniteFeature(f"non-finite feature in {feats!r}")
        w = float(self.weight)
        if not (w > 0 and math.isfinite(w)):
            raise NonPositiveWeight(f"weight must be positive and finite, got {self.weight!r}")
        if int(self.timestamp) < 0:
            raise SchemaMismatch(f"negative timestamp {self.timestamp!r}")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "timestamp", int(self.timestamp))

    @property
    def dim(self) -> int:
        return len(self.features)


def record_to_json(rec: Record) -> str:
    """Serialise a record as one JSONL line (without the newline)."""
    obj = {"stream_id": rec.stream_id, "ts": rec.timestamp, "features": list(rec.features)}
    if rec.weight != 1.0:
        obj["weight"] = rec.weight
    if rec.label is not None:
        obj["label"] = rec.label
    return json.dumps(obj, separators=(",", ":"))


def write_records(records: Iterable[Record], path, format: str = "jsonl") -> int:
    """Write records to ``path``; returns the number written."""
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if format == "jsonl":
            for rec in records:
                fh.write(record_to_json(rec) + "\n")
                n += 1
        elif format == "csv":
            records = list(records)
            d = records[0].dim if records else 1
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["stream_id", "timestamp"] + [f"f{i + 1}" for i in range(d)] + ["weight", "label"])
            for rec in records:
                writer.writerow([rec.stream_id, rec.timestamp, *map(repr, rec.features),
                                 repr(rec.weight), rec.label or ""])
                n += 1
        else:
            raise ValueError(f"unknown format {format!r}")
    return n


# -- readers ---------------------------------------------------------------

_FEATURE_COL = re.compile(r"f(\d+)$")


def read_records(path, format: Optional[str] = None) -> Iterator[Record]:
    """Read records from a CSV or JSONL file, in file order.

    The file's existence is checked eagerly; row errors surface during
    iteration and carry the offending line number. ``format`` defaults to
    the file extension.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise MissingFile(f"no such file: {path}")
    if format is None:
        format = "csv" if path.endswith(".csv") else "jsonl"
    if format == "csv":
        return _read_csv(path)
    if format == "jsonl":
        return _read_jsonl(path)
    raise ValueError(f"unknown format {format!r}")


def _parse_float(text, line, what):
    try:
        v = float(text)
    except (TypeError, ValueError):
        raise SchemaMismatch(f"{what} is not a number: {text!r}", line) from None
    return v


def _build(stream_id, ts, feats, weight, label, line, arity, last_ts):
    if arity[0] is None:
        arity[0] = len(feats)
    elif len(feats) != arity[0]:
        raise SchemaMismatch(f"expected {arity[0]} features, got {len(feats)}", line)
    if not feats:
        raise SchemaMismatch("no feature columns", line)
    if not all(math.isfinite(v) for v in feats):
        raise NonFiniteFeature(f"non-finite feature {feats!r}", line)
    if weight is None:
        weight = 1.0
    if not (weight > 0 and math.isfinite(weight)):
        raise NonPositiveWeight(f"weight must be positive and finite, got {weight!r}", line)
    if isinstance(ts, bool) or not math.isfinite(ts) or ts != int(ts) or ts < 0:
        raise SchemaMismatch(f"timestamp must be a non-negative integer, got {ts!r}", line)
    ts = int(ts)
    prev = last_ts.get(stream_id)
    if prev is not None and ts < prev:
        raise SchemaMismatch(f"timestamp {ts} decreases within stream {stream_id!r}", line)
    last_ts[stream_id] = ts
    return Record(str(stream_id), ts, tuple(feats), weight, label)


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return
        header = [h.strip() for h in header]
        if header[:2] != ["stream_id", "timestamp"]:
            raise SchemaMismatch("header must start with stream_id,timestamp", 1)
        n_feat = 0
        for h in header[2:]:
            if _FEATURE_COL.match(h):
                n_feat += 1
            else:
                break
        rest = header[2 + n_feat:]
        if rest not in ([], ["weight"], ["label"], ["weight", "label"]):
            raise SchemaMismatch(f"unexpected trailing columns {rest!r}", 1)
        has_w = "weight" in rest
        has_l = "label" in rest
        width = len(header)
        arity = [n_feat]
        last_ts = {}
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != width:
                raise SchemaMismatch(f"expected {width} columns, got {len(row)}", line)
            ts = _parse_float(row[1], line, "timestamp")
            feats = [_parse_float(v, line, "feature") for v in row[2:2 + n_feat]]
            pos = 2 + n_feat
            weight = None
            if has_w:
                if row[pos].strip():
                    weight = _parse_float(row[pos], line, "weight")
                pos += 1
            label = None
            if has_l and row[pos].strip():
                label = row[pos]
            yield _build(row[0], ts, feats, weight, label, line, arity, last_ts)


def _parse_obj(obj, line, arity, last_ts):
    try:
        stream_id, ts, feats = obj["stream_id"], obj["ts"], obj["features"]
    except (KeyError, TypeError):
        raise SchemaMismatch("missing stream_id/ts/features", line) from None
    if not isinstance(feats, list):
        raise SchemaMismatch("features must be an array", line)
    feats = [_parse_float(v, line, "feature") for v in feats]
    ts = _parse_float(ts, line, "timestamp")
    weight = obj.get("weight")
    if weight is not None:
        weight = _parse_float(weight, line, "weight")
    return _build(stream_id, ts, feats, weight, obj.get("label"), line, arity, last_ts)


def record_from_json(obj: dict) -> Record:
    """Inverse of :func:`record_to_json` for an already-decoded object."""
    return _parse_obj(obj, None, [None], {})


def _read_jsonl(path):
    arity = [None]
    last_ts = {}
    with open(path, encoding="utf-8") as fh:
        for line, text in enumerate(fh, start=1):
            if not text.strip():
                continue
            try:
                obj = json.loads(text)
            except json.JSONDecodeError as exc:
                raise SchemaMismatch(f"invalid JSON: {exc.msg}", line) from None
            yield _parse_obj(obj, line, arity, last_ts)


# -- synthetic generator ---------------------------------------------------

_LAW = re.compile(r"^\s*(constant|exponential|pareto)\s*(?:\(\s*([^)]*)\s*\))?\s*$")


@dataclass(frozen=True)
class WeightLaw:
    kind: str = "constant"
    param: float = 1.0

    @classmethod
    def parse(cls, text) -> "WeightLaw":
        """Parse ``constant``, ``exponential(rate)`` or ``pareto(alpha)``."""
        if isinstance(text, WeightLaw):
            return text
        m = _LAW.match(str(text))
        if not m:
            raise InvalidSpec(f"unknown weight law {text!r}")
        kind, arg = m.group(1), m.group(2)
        if kind != "constant" and not arg:
            raise InvalidSpec(f"weight law {kind} needs a parameter")
        param = float(arg) if arg else 1.0
        if not (param > 0 and math.isfinite(param)):
            raise InvalidSpec(f"weight law parameter must be positive, got {param}")
        return cls(kind, param)

    def __str__(self):
        return "constant" if self.kind == "constant" else f"{self.kind}({self.param!r})"

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "constant":
            return np.ones(n)
        if self.kind == "exponential":
            w = rng.exponential(1.0 / self.param, n)
        else:
            w = 1.0 + rng.pareto(self.param, n)
        return np.maximum(w, np.finfo(float).tiny)


@dataclass(frozen=True)
class SyntheticSpec:
    """Gaussian mixture with anomalies injected on a shell around the means.

    ``stream_weights`` spreads records across streams ``s0, s1, ...`` with
    the given relative frequencies.
    """

    n_clusters: int
    means: tuple
    stddev: float = 1.0
    anomaly_rate: float = 0.0
    anomaly_offset: float = 10.0
    weight_law: WeightLaw = field(default_factory=WeightLaw)
    seed: int = 0
    stream_weights: tuple = (1.0,)

    def __post_init__(self):
        means = tuple(tuple(float(v) for v in m) for m in self.means)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "weight_law", WeightLaw.parse(self.weight_law))
        object.__setattr__(self, "stream_weights", tuple(float(w) for w in self.stream_weights))

    def validate(self):
        if self.n_clusters < 1:
            raise InvalidSpec("n_clusters must be positive")
        if len(self.means) != self.n_clusters:
            raise InvalidSpec(f"expected {self.n_clusters} means, got {len(self.means)}")
        dims = {len(m) for m in self.means}
        if len(dims) != 1 or 0 in dims:
            raise InvalidSpec("means must share a positive dimensionality")
        if len(set(self.means)) != len(self.means):
            raise InvalidSpec("means must be pairwise distinct")
        if not all(math.isfinite(v) for m in self.means for v in m):
            raise InvalidSpec("means must be finite")
        if not (self.stddev > 0 and math.isfinite(self.stddev)):
            raise InvalidSpec("stddev must be positive")
        if not (0 <= self.anomaly_rate < 0.5):
            raise InvalidSpec("anomaly_rate must lie in [0, 0.5)")
        if not (self.anomaly_offset > 0 and math.isfinite(self.anomaly_offset)):
            raise InvalidSpec("anomaly_offset must be positive")
        if not self.stream_weights or min(self.stream_weights) <= 0:
            raise InvalidSpec("stream_weights must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticSpec":
        d = dict(d)
        d.pop("count", None)
        if "means" in d:
            d["means"] = tuple(tuple(m) for m in d["means"])
        if "stream_weights" in d:
            d["stream_weights"] = tuple(d["stream_weights"])
        return cls(**d)


def _shell_point(rng, means, center, radius, max_tries=1000):
    d = means.shape[1]
    for _ in range(max_tries):
        v = rng.standard_normal(d)
        norm = np.linalg.norm(v)
        if norm == 0:
            continue
        p = center + radius * v / norm
        if np.sqrt(((means - p) ** 2).sum(axis=1)).min() >= radius * (1 - 1e-12):
            return p
    raise InvalidSpec("cannot place an anomaly at the requested offset from every mean")


def generate_synthetic(spec: SyntheticSpec, count: int) -> list:
    """Draw ``count`` records from the mixture described by ``spec``.

    Normal records are labelled ``cluster-<i>``; anomalies sit on a sphere of
    radius ``anomaly_offset * stddev`` around a random mean, at least that far
    from every mean, and are labelled ``anomaly``. Timestamps are the record
    index. The output depends only on ``spec`` and ``count``.
    """
    spec.validate()
    if count < 1:
        raise InvalidSpec("count must be positive")
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    means = np.asarray(spec.means, dtype=float)
    k, d = means.shape

    is_anom = rng.random(count) < spec.anomaly_rate
    cluster = rng.integers(0, k, count)
    noise = rng.standard_normal((count, d))
    weights = spec.weight_law.draw(rng, count)
    sw = np.asarray(spec.stream_weights)
    streams = rng.choice(len(sw), size=count, p=sw / sw.sum())

    points = means[cluster] + spec.stddev * noise
    radius = spec.anomaly_offset * spec.stddev
    for i in np.flatnonzero(is_anom):
        points[i] = _shell_point(rng, means, means[cluster[i]], radius)

    out = []
    for i in range(count):
        label = "anomaly" if is_anom[i] else f"cluster-{cluster[i]}"
        out.append(Record(f"s{streams[i]}", i, tuple(points[i].tolist()), float(weights[i]), label))
    return out
