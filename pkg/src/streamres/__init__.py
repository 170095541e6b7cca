"""Weighted reservoir sampling, windowed k-means and outlier events for data streams."""

__version__ = "0.1.0"

from .errors import StreamResError
from .ingest import Record, SyntheticSpec, WeightLaw, generate_synthetic, read_records, write_records
from .sampling import (
    Reservoir,
    log_key,
    reservoir_contents,
    uniform_reservoir_insert,
    weighted_reservoir_insert,
    weighted_with_replacement,
    weighted_without_replacement,
)
from .multires import AllocationPolicy, ReservoirPool, allocate, on_arrival, required_size, sample_size
from .resmeans import ClusterConfig, Window, WindowClustering, cluster_window, run_stream
from .events import OutlierRule, detect_outliers, evaluate, event_score
from .kgexport import build_graph, serialize_dot, serialize_turtle
