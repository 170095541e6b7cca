"""End-to-end composition: ingest -> pooled sampling -> windowed k-means -> events -> graph.

Each stage reads and writes plain files so the stages can be run one at a
time (see :mod:`streamres.cli`) and still reproduce a full run byte for
byte.
"""
from __future__ import annotations

import copy
import dataclasses
import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Optional, Tuple

from .errors import InvalidConfig
from .events import OutlierRule, event_report, metrics_from_counts
from .ingest import Record, SyntheticSpec, generate_synthetic, read_records, record_to_json
from .kgexport import build_graph, serialize_dot, serialize_turtle
from .multires import AllocationPolicy, ReservoirPool, on_arrival
from .resmeans import ClusterConfig, Window, WindowClustering, run_stream
from .sampling import derive_rng

__all__ = [
    "PipelineConfig",
    "iter_source",
    "stage_sample",
    "stage_cluster",
    "stage_detect",
    "stage_export",
    "run_pipeline",
    "apply_overrides",
    "with_defaults",
    "FILES",
]

FILES = {
    "records": "records.jsonl",
    "samples": "samples.jsonl",
    "pool": "pool.json",
    "windows": "windows.jsonl",
    "events": "events.jsonl",
    "turtle": "graph.ttl",
    "dot": "graph.dot",
    "summary": "summary.json",
}

DEFAULT_SOURCE = {
    "synthetic": {
        "n_clusters": 3,
        "means": [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]],
        "stddev": 1.0,
        "anomaly_rate": 0.05,
        "anomaly_offset": 10.0,
        "weight_law": "constant",
        "stream_weights": [1.0],
    },
    "count": 20000,
}


@dataclass
class PipelineConfig:
    """Full run configuration.

    ``source`` is either ``{"path": ..., "format": "csv"|"jsonl"}`` or
    ``{"synthetic": {...SyntheticSpec fields...}, "count": n}``. The pool is
    drained into the clustering stage every ``drain_every`` arrivals.
    """

    source: dict = field(default_factory=lambda: copy.deepcopy(DEFAULT_SOURCE))
    policy: AllocationPolicy = field(default_factory=lambda: AllocationPolicy(M=500))
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    rule: OutlierRule = field(default_factory=OutlierRule)
    drain_every: int = 2000
    out: str = "out"
    seed: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidConfig(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        for name, sub in (("policy", AllocationPolicy), ("cluster", ClusterConfig), ("rule", OutlierRule)):
            if name in d:
                try:
                    kw[name] = sub(**d.pop(name))
                except TypeError as exc:
                    raise InvalidConfig(f"{name}: {exc}") from None
        kw.update(d)
        cfg = cls(**kw)
        return cfg

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def validate(self):
        self.policy.validate()
        self.cluster.validate()
        self.rule.validate()
        if not (isinstance(self.drain_every, int) and self.drain_every >= 1):
            raise InvalidConfig("drain_every must be a positive integer")
        src = self.source
        if "synthetic" in src and "path" in src:
            raise InvalidConfig("source takes either 'path' or 'synthetic', not both")
        if "synthetic" in src:
            self.synthetic_spec().validate()
            if not (isinstance(src.get("count"), int) and src["count"] >= 1):
                raise InvalidConfig("source.count must be a positive integer")
        elif "path" not in src:
            raise InvalidConfig("source needs either 'path' or 'synthetic'")

    def synthetic_spec(self) -> SyntheticSpec:
        spec = dict(self.source["synthetic"])
        spec.setdefault("seed", self.seed)
        try:
            return SyntheticSpec.from_dict(spec)
        except TypeError as exc:
            raise InvalidConfig(f"source.synthetic: {exc}") from None

    def seeded_cluster(self) -> ClusterConfig:
        return dataclasses.replace(self.cluster, seed=self.seed)


def _coerce(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def with_defaults(d: dict) -> dict:
    """Fill a partial config dict from the defaults.

    ``policy``, ``cluster`` and ``rule`` merge field by field; a given
    ``source`` replaces the default one as a whole.
    """
    base = PipelineConfig().to_dict()
    for key, value in d.items():
        if key in ("policy", "cluster", "rule") and isinstance(value, dict):
            base[key].update(value)
        else:
            base[key] = copy.deepcopy(value)
    return base


def apply_overrides(d: dict, overrides) -> dict:
    """Set dotted keys, e.g. ``[("cluster.k", "4")]``; values are parsed as JSON when possible.

    Overriding ``source.path`` on a synthetic source (or ``source.synthetic.*``
    on a file source) switches the source kind rather than mixing the two.
    """
    d = copy.deepcopy(d)
    for key, value in overrides:
        src = d.get("source")
        if isinstance(src, dict):
            if key == "source.path" and "synthetic" in src:
                d["source"] = {}
            elif key.startswith("source.synthetic") and "path" in src:
                d["source"] = copy.deepcopy(DEFAULT_SOURCE)
        node = d
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise InvalidConfig(f"cannot override {key!r}: {p!r} is not a section")
        node[parts[-1]] = _coerce(value) if isinstance(value, str) else value
    return d


# -- stages ----------------------------------------------------------------

def iter_source(cfg: PipelineConfig) -> Iterator[Record]:
    src = cfg.source
    if "synthetic" in src:
        return iter(generate_synthetic(cfg.synthetic_spec(), src["count"]))
    return read_records(src["path"], src.get("format"))


def _write_jsonl(path, lines: Iterable[str]):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_jsonl(path) -> List[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def stage_sample(cfg: PipelineConfig, out_dir: str, source: Optional[Iterable[Record]] = None) -> Tuple[List[Record], ReservoirPool]:
    """Feed the source through the reservoir pool, draining every ``drain_every`` arrivals.

    Writes ``samples.jsonl`` (the drained records, in order) and ``pool.json``
    (pool state before the final drain).
    """
    rng = derive_rng(cfg.seed, "sample")
    pool = ReservoirPool(cfg.policy)
    samples: List[Record] = []
    for rec in (iter_source(cfg) if source is None else source):
        on_arrival(pool, rec, rng)
        if pool.arrivals % cfg.drain_every == 0:
            samples.extend(pool.drain())
    snapshot = pool.snapshot()
    samples.extend(pool.drain())
    _write_jsonl(os.path.join(out_dir, FILES["samples"]), map(record_to_json, samples))
    _write_json(os.path.join(out_dir, FILES["pool"]), snapshot)
    return samples, pool


def stage_cluster(cfg: PipelineConfig, out_dir: str, samples: Iterable[Record]) -> List[Tuple[WindowClustering, Window]]:
    """Cluster the sample stream window by window; writes ``windows.jsonl``."""
    done = []
    with open(os.path.join(out_dir, FILES["windows"]), "w", encoding="utf-8", newline="\n") as fh:
        run_stream(samples, cfg.seeded_cluster(), sink=lambda c, w: done.append((c, w)),
                   results=fh, rng=derive_rng(cfg.seed, "cluster"))
    return done


def load_windows(windows_path, samples_path, q: float = 2.0) -> List[Tuple[WindowClustering, Window]]:
    """Re-pair stored window results with their records.

    Windows are contiguous runs of the sample stream, so record offsets
    follow from the ``n_records`` fields.
    """
    objs = _read_jsonl(windows_path)
    records = list(read_records(samples_path, "jsonl"))
    out = []
    pos = 0
    for obj in objs:
        n = obj["n_records"]
        chunk = records[pos:pos + n]
        if len(chunk) != n:
            raise InvalidConfig(f"{samples_path} is too short for {windows_path}")
        pos += n
        opened = chunk[0].timestamp if chunk else 0
        out.append((WindowClustering.from_json(obj, chunk, q=q), Window(chunk, opened, obj.get("closed_by", "full"))))
    return out


def stage_detect(cfg: PipelineConfig, out_dir: str, windows) -> List[dict]:
    """Outlier events and metrics per window; writes ``events.jsonl``."""
    reports = [event_report(c, w, cfg.rule) for c, w in windows]
    _write_jsonl(os.path.join(out_dir, FILES["events"]),
                 (json.dumps(r, separators=(",", ":")) for r in reports))
    return reports


def stage_export(out_dir: str, clusterings, reports) -> list:
    """Knowledge graph of the run; writes ``graph.ttl`` and ``graph.dot``."""
    triples = build_graph(clusterings, reports)
    with open(os.path.join(out_dir, FILES["turtle"]), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_turtle(triples))
    with open(os.path.join(out_dir, FILES["dot"]), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_dot(triples))
    return triples


def summarize(cfg: PipelineConfig, n_arrivals: int, samples, windows, reports, triples) -> dict:
    tp = fp = fn = 0
    labelled = False
    for r in reports:
        if r["metrics"] is not None:
            labelled = True
            tp += r["metrics"]["tp"]
            fp += r["metrics"]["fp"]
            fn += r["metrics"]["fn"]
    config = cfg.to_dict()
    config.pop("out")
    return {
        "config": config,
        "arrivals": n_arrivals,
        "sampled": len(samples),
        "windows": len(windows),
        "events": sum(len(r["events"]) for r in reports),
        "triples": len(triples),
        "metrics": metrics_from_counts(tp, fp, fn).to_json() if labelled else None,
    }


def run_pipeline(cfg: PipelineConfig, out_dir: Optional[str] = None) -> dict:
    """Run every stage and write all outputs; returns the summary."""
    cfg.validate()
    out_dir = out_dir or cfg.out
    os.makedirs(out_dir, exist_ok=True)
    samples, pool = stage_sample(cfg, out_dir)
    windows = stage_cluster(cfg, out_dir, samples)
    reports = stage_detect(cfg, out_dir, windows)
    triples = stage_export(out_dir, [c for c, _ in windows], reports)
    summary = summarize(cfg, pool.arrivals, samples, windows, reports, triples)
    _write_json(os.path.join(out_dir, FILES["summary"]), summary)
    return summary
