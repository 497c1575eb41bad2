"""Best configuration per numerology, then every configuration meeting a target.

The full FR1 grant-based space has about 33 billion combinations; pruning
keeps 698,100, and each is scored on the same packets and delay draws.
"""
from ranlat.dists import DistSpec
from ranlat.search import ReliabilityTarget, SearchSpace, count_valid, find_all, optimize, sample_valid

space = SearchSpace.builtin().with_profile(r1=0.5, l1=DistSpec.gaussian(1.46, 0.175))
print(f"cartesian {space.cartesian_size:,}, valid {count_valid(space, fix_monotone=True):,}")

for S in (1.0, 0.5, 0.25):
    res = optimize(space.restrict(slot_duration=S), "mean")
    d = res.distribution
    p = res.point
    print(f"S={S:<5} T={p.dl_ul_tx_period:<3} d={p.nof_dl_slots:<3} SR {p.sr_period}/{p.sr_offset} "
          f"k2={p.k2} a1={p.in_advance_submission}  min {d.min:.3f} avg {d.mean:.3f} max {d.max:.3f}")

target = ReliabilityTarget.parse("6ms@99")
res = find_all(space, target, 2000, points=sample_valid(space, 5000, seed=0))
print(f"{target}: {len(res.matches)} of {res.evaluated} sampled configurations")
