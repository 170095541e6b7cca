"""
Outliers and event scores
=========================

Records far from their centroid, relative to the spread of their cluster,
are flagged. Each cluster's event score adds up its outlier distances in
units of the cluster's mean member distance.
"""
import random

import numpy as np

from streamres.events import OutlierRule, detect_outliers, evaluate, event_score
from streamres.ingest import SyntheticSpec, generate_synthetic
from streamres.resmeans import ClusterConfig, Window, cluster_window

spec = SyntheticSpec(3, ((0.0, 0.0), (10.0, 0.0), (0.0, 10.0)), 1.0, anomaly_rate=0.05,
                     anomaly_offset=10.0, seed=11)
window = Window(generate_synthetic(spec, 600), opened_at=0)
clustering = cluster_window(window, ClusterConfig(k=3, window_size=600), rng=random.Random(0))

# robust threshold (median + lam * scaled MAD) versus mean + lam * std
for rule in (OutlierRule(3.0), OutlierRule(3.0, robust=False)):
    events = detect_outliers(clustering, window, rule)
    m = evaluate(events, window)
    kind = "robust" if rule.robust else "plain "
    print(f"{kind} lam=3: {len(events):3d} flagged  {m.percent()}")

events = detect_outliers(clustering, window)
for c in range(3):
    print(f"cluster {c}: centroid={np.round(clustering.centroids[c], 2)} "
          f"score={event_score(c, events, clustering):.1f}")

# raising lam only ever removes flags
for lam in (1, 2, 3, 5, 8):
    print(f"lam={lam}: {len(detect_outliers(clustering, window, OutlierRule(lam)))} flagged")
