"""Monte Carlo latency distribution of one configuration, and why it is multimodal."""
import numpy as np

from ranlat.core import tdd_config
from ranlat.profile import ProcessingProfile
from ranlat.stochastic import latency_distribution
from ranlat.traffic import TrafficSpec

cfg = tdd_config(0.5, 4, 3, 4, 3, advance_slots=1)
prof = ProcessingProfile()

for label, traffic in [("poisson 101 ms", TrafficSpec.poisson(101.0, 64)),
                       ("constant 101 ms", TrafficSpec.constant(101.0, 64))]:
    d = latency_distribution(cfg, prof, traffic, 10_000, seed=1)
    print(f"{label:<16} min {d.min:.3f}  mean {d.mean:.3f}  p99.99 {d.percentile(99.99):.3f}  max {d.max:.3f}")
    hist, edges = np.histogram(d.samples, bins=np.arange(4.0, 10.0, 0.25))
    for h, e in zip(hist, edges):
        if h:
            print(f"  {e:5.2f} {'#' * (60 * h // hist.max())}")

# packets close together share the UE buffer and can ride an earlier grant
burst = TrafficSpec.poisson(3.0, 300)
alone = latency_distribution(cfg, prof, burst, 5000, seed=2)
shared = latency_distribution(cfg, prof, burst, 5000, seed=2, train=True)
print(f"3 ms bursts: independent mean {alone.mean:.3f}, shared-buffer mean {shared.mean:.3f}")
