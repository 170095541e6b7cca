"""
Results as a knowledge graph
============================

Windows, clusters and events become entities linked by typed relations,
written as Turtle for triple stores and as DOT for drawing.
"""
import random

from streamres.events import event_report
from streamres.ingest import SyntheticSpec, generate_synthetic
from streamres.kgexport import build_graph, serialize_dot, serialize_turtle
from streamres.resmeans import ClusterConfig, Window, cluster_window

spec = SyntheticSpec(2, ((0.0, 0.0), (8.0, 8.0)), 1.0, anomaly_rate=0.02, anomaly_offset=10.0, seed=5)
window = Window(generate_synthetic(spec, 150), opened_at=0)
clustering = cluster_window(window, ClusterConfig(k=2, window_size=150), rng=random.Random(5))
report = event_report(clustering, window)

triples = build_graph([clustering], [report])
print(f"{len(triples)} triples, {len(report['events'])} events\n")
print(serialize_turtle(triples))
print(serialize_dot(triples)[:400], "...")
