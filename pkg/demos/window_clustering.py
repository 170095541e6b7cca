"""
Windowed k-means over a stream
==============================

The stream is cut into windows of fixed size. The first window starts from
random records; every later window starts from the previous window's
centroids, so cluster ids stay attached to the same blob over time.
"""
import io
import json

import numpy as np

from streamres.ingest import SyntheticSpec, generate_synthetic
from streamres.resmeans import ClusterConfig, run_stream

spec = SyntheticSpec(3, ((0.0, 0.0), (10.0, 0.0), (0.0, 10.0)), stddev=1.0, seed=3)
stream = generate_synthetic(spec, 2000)

config = ClusterConfig(k=3, window_size=400, seed=3)
results = io.StringIO()
clusterings = []
n = run_stream(stream, config, sink=lambda c, w: clusterings.append(c), results=results)
print(f"{n} windows")

np.set_printoptions(precision=2, suppress=True)
for c in clusterings:
    print(f"window {c.window_seq}: iterations={c.iterations:2d} sse={c.sse_total:8.1f} "
          f"centroids={c.centroids.round(2).tolist()}")

# per-cluster and per-dimension error for the last window
last = clusterings[-1]
print("sse per cluster:  ", last.sse_per_cluster)
print("sse per dimension:\n", last.sse_per_dimension)

# one JSON line per window is what gets persisted
print(json.loads(results.getvalue().splitlines()[0]).keys())
