"""Knowledge-graph export of windows, clusters and events (Turtle and DOT).

Entity names are prefixed names with deterministic local parts:
``win:{seq}``, ``clu:{seq}:{cluster}``, ``evt:{seq}:{record index}``.
Predicates live in the ``sr:`` namespace.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable, List, Union

from .errors import AlignmentMismatch, InvalidIRI

__all__ = ["NAMESPACE", "PREFIXES", "Literal", "Triple", "build_graph", "serialize_turtle", "serialize_dot"]

NAMESPACE = "http://streamres.local/ns#"

PREFIXES = (
    ("sr", NAMESPACE),
    ("win", "http://streamres.local/win/"),
    ("clu", "http://streamres.local/clu/"),
    ("evt", "http://streamres.local/evt/"),
    ("xsd", "http://www.w3.org/2001/XMLSchema#"),
)

_NAME = re.compile(r"^[A-Za-z][A-Za-z0-9_-]*:[A-Za-z0-9_:-]+(?:\.[A-Za-z0-9_:-]+)*$")
_TYPES = ("string", "integer", "decimal")


@dataclass(frozen=True, order=True)
class Literal:
    lexical: str
    datatype: str = "string"

    def __post_init__(self):
        if self.datatype not in _TYPES:
            raise ValueError(f"literal type must be one of {_TYPES}, got {self.datatype!r}")

    @classmethod
    def decimal(cls, x: float) -> "Literal":
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"cannot write {x!r} as xsd:decimal")
        text = format(Decimal(repr(x)), "f")
        if "." not in text:
            text += ".0"
        return cls(text, "decimal")

    @classmethod
    def integer(cls, n: int) -> "Literal":
        return cls(str(int(n)), "integer")

    def turtle(self) -> str:
        text = (self.lexical.replace("\\", "\\\\").replace('"', '\\"')
                .replace("\n", "\\n").replace("\r", "\\r"))
        return f'"{text}"^^xsd:{self.datatype}'


Term = Union[str, Literal]


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    object: Term

    def validate(self):
        for name in (self.subject, self.predicate) + (() if isinstance(self.object, Literal) else (self.object,)):
            if not isinstance(name, str) or not _NAME.match(name):
                raise InvalidIRI(f"not a valid prefixed name: {name!r}")

    def sort_key(self):
        obj = self.object.turtle() if isinstance(self.object, Literal) else self.object
        return (self.subject, self.predicate, obj)


def _as_dict(c):
    return c.to_json() if hasattr(c, "to_json") else c


def build_graph(clusterings: Iterable, reports: Iterable = ()) -> List[Triple]:
    """Triples describing every window, its clusters and its events.

    ``clusterings`` are :class:`WindowClustering` objects or their results
    JSON; ``reports`` are event-report objects keyed by ``window_seq``. A
    window without a report has no events and zero scores.
    """
    windows = {}
    for c in clusterings:
        c = _as_dict(c)
        seq = int(c["window_seq"])
        if seq in windows:
            raise AlignmentMismatch(f"duplicate window_seq {seq}")
        windows[seq] = c
    by_seq = {}
    for rep in reports:
        seq = int(rep["window_seq"])
        if seq not in windows:
            raise AlignmentMismatch(f"event report for unknown window {seq}")
        if seq in by_seq:
            raise AlignmentMismatch(f"duplicate event report for window {seq}")
        by_seq[seq] = rep

    triples = []
    for seq, win in sorted(windows.items()):
        rep = by_seq.get(seq, {"events": [], "scores": {}})
        k = len(win["centroids"])
        w = f"win:{seq}"
        for cid, centroid in enumerate(win["centroids"]):
            clu = f"clu:{seq}:{cid}"
            triples.append(Triple(w, "sr:hasCluster", clu))
            triples.append(Triple(clu, "sr:hasCentroid", Literal(json.dumps(centroid, separators=(",", ":")))))
            triples.append(Triple(clu, "sr:hasSSE", Literal.decimal(win["sse_per_cluster"][cid])))
            triples.append(Triple(clu, "sr:hasScore", Literal.decimal(rep["scores"].get(str(cid), 0.0))))
        for ev in rep["events"]:
            cid = int(ev["cluster_id"])
            if not 0 <= cid < k:
                raise AlignmentMismatch(f"event in window {seq} names cluster {cid}, window has {k}")
            e = f"evt:{seq}:{int(ev['index'])}"
            triples.append(Triple(e, "sr:detectedIn", w))
            triples.append(Triple(e, "sr:belongsTo", f"clu:{seq}:{cid}"))
            triples.append(Triple(e, "sr:hasDistance", Literal.decimal(ev["distance"])))
    return triples


def _sorted(triples):
    triples = list(triples)
    for t in triples:
        t.validate()
    return sorted(triples, key=Triple.sort_key)


def serialize_turtle(triples: Iterable[Triple]) -> str:
    """Turtle text: prefix block, blank line, one sorted statement per line."""
    lines = [f"@prefix {p}: <{iri}> ." for p, iri in PREFIXES]
    body = []
    for t in _sorted(triples):
        obj = t.object.turtle() if isinstance(t.object, Literal) else t.object
        body.append(f"{t.subject} {t.predicate} {obj} .")
    if body:
        lines.append("")
        lines.extend(body)
    return "\n".join(lines) + "\n"


def _dot_id(text):
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize_dot(triples: Iterable[Triple]) -> str:
    """Graphviz digraph: entities as ellipses, literals as boxed leaves."""
    triples = _sorted(triples)
    header = ["digraph kg {", "  rankdir=LR;", '  node [shape=ellipse, fontname="Helvetica"];',
              '  edge [fontname="Helvetica", fontsize=10];']
    entities = sorted({t.subject for t in triples} |
                      {t.object for t in triples if not isinstance(t.object, Literal)})
    nodes = [f"  {_dot_id(e)};" for e in entities]
    edges = []
    n_lit = 0
    for t in triples:
        if isinstance(t.object, Literal):
            target = f"lit{n_lit}"
            n_lit += 1
            nodes.append(f"  {target} [shape=box, label={_dot_id(t.object.lexical)}];")
        else:
            target = _dot_id(t.object)
        edges.append(f"  {_dot_id(t.subject)} -> {target} [label={_dot_id(t.predicate)}];")
    return "\n".join(header + nodes + edges + ["}"]) + "\n"
