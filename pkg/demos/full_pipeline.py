"""
End to end
==========

Sample a multi-stream feed under a budget, cluster the samples window by
window, flag events and export the graph. The same run is available from
the shell as ``streamres run --out DIR``.
"""
import json
import tempfile

from streamres.pipeline import PipelineConfig, apply_overrides, run_pipeline, with_defaults

# start from the defaults and change a few fields, as --key value flags would
cfg_dict = apply_overrides(with_defaults({}), [
    ("source.count", "10000"),
    ("source.synthetic.stream_weights", "[5, 1]"),
    ("cluster.window_size", "400"),
    ("rule.lam", "3.5"),
])
cfg = PipelineConfig.from_dict(cfg_dict)

out = tempfile.mkdtemp()
summary = run_pipeline(cfg, out)
print(json.dumps({k: v for k, v in summary.items() if k != "config"}, indent=2))
print("outputs in", out)
