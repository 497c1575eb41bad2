"""Recover a hidden UE preparation-time distribution from end-to-end latencies."""
from ranlat.core import tdd_config
from ranlat.dists import DistSpec
from ranlat.profile import ProcessingProfile
from ranlat.stochastic import fit_learned_distribution, frange, latency_distribution
from ranlat.traffic import TrafficSpec, generate_trace

cfg = tdd_config(0.5, 5, 3, 1, 0, advance_slots=1)
prof = ProcessingProfile().replace(r1=0.45)
traffic = generate_trace(TrafficSpec.poisson(101.0, 64, count=5000, seed=1))

# stand-in for a testbed measurement
observed = latency_distribution(cfg, prof.replace(l1=DistSpec.gaussian(1.8, 0.25)), traffic, seed=42)

grid = [(m, s) for m in frange(1.0, 2.6, 0.1) for s in frange(0.05, 0.5, 0.05)]
res = fit_learned_distribution(cfg, observed, traffic, prof, "l1", "gaussian", grid, seed=3)
print(f"planted (1.8, 0.25), fitted {res.params}, wasserstein {res.distance:.4f}")
