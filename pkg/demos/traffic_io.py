"""Generate a trace, write it, read it back and export the resulting latencies."""
import tempfile
from pathlib import Path

from ranlat.core import tdd_config
from ranlat.profile import ProcessingProfile
from ranlat.stochastic import latency_distribution
from ranlat.traffic import TrafficSpec, export_results, generate_trace, load_trace, read_table, save_trace

out = Path(tempfile.mkdtemp())
trace = generate_trace(TrafficSpec.gaussian(105.0, 0.05, 64, count=1000, seed=7))
save_trace(trace, out / "trace.csv")
assert load_trace(out / "trace.csv") == trace
print("first arrivals", trace.arrivals[:3])

cfg = tdd_config(0.5, 5, 3, 1, 0, advance_slots=1)
d = latency_distribution(cfg, ProcessingProfile().replace(r1=0.45), trace, seed=0)
for fmt in ("summary", "cdf-table", "samples-table"):
    path = out / f"{fmt}.csv"
    export_results(d, None, path, fmt)
    print(f"{fmt:<14} {len(read_table(path))} rows -> {path}")
print(dict(read_table(out / "summary.csv")))
