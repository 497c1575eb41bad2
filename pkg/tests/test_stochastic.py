import time
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ranlat.core import tdd_config
from ranlat.dists import DistSpec, draw, draw_many, stream
from ranlat.duplex import packet_latency
from ranlat.errors import ConfigError
from ranlat.profile import ProcessingProfile, ProfileDraw
from ranlat.stochastic import (LatencyDistribution, fit_learned_distribution,
                               latency_distribution, wasserstein)
from ranlat.traffic import PacketTrace, TrafficSpec, generate_trace


def test_draw_examples():
    rng = stream(0, "l1")
    assert draw(DistSpec.constant(1.464), rng) == 1.464
    assert draw(DistSpec.gaussian(0, 0), rng) == 0.0
    assert draw(DistSpec.empirical([0.5, 0.5, 0.5]), rng) == 0.5


def test_negative_draws_clamped():
    x = draw_many(DistSpec.gaussian(0.0, 1.0), 3, "l1", 10_000)
    assert x.min() == 0.0
    assert 0.45 < (x == 0).mean() < 0.55


def test_draws_are_seeded():
    a = draw_many(DistSpec.gaussian(1.5, 0.2), 7, "l1", 100)
    b = draw_many(DistSpec.gaussian(1.5, 0.2), 7, "l1", 100)
    c = draw_many(DistSpec.gaussian(1.5, 0.2), 8, "l1", 100)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    # a longer run extends, never reshuffles, the shorter one
    assert np.array_equal(draw_many(DistSpec.gaussian(1.5, 0.2), 7, "l1", 300)[:100], a)


def test_lognormal_parameterization():
    spec = DistSpec.lognormal(0.40, 0.27, 0.13)
    x = draw_many(spec, 0, "p4", 200_000)
    assert x.min() > 0.27
    assert np.median(x) == pytest.approx(0.27 + 0.13, abs=2e-3)
    assert x.mean() == pytest.approx(spec.expected(), abs=2e-3)


def test_empirical_file(tmp_path):
    path = tmp_path / "l1.txt"
    path.write_text("# measured\n1.0\n2.0\n\n3.0\n")
    spec = DistSpec.from_file(path)
    assert spec.values == (1.0, 2.0, 3.0)
    assert set(draw_many(spec, 0, "l1", 500)) == {1.0, 2.0, 3.0}
    path.write_text("")
    with pytest.raises(ConfigError):
        DistSpec.from_file(path)


def test_spec_validation():
    with pytest.raises(ConfigError):
        DistSpec.gaussian(1.0, -0.1)
    with pytest.raises(ConfigError):
        DistSpec("uniform")


def test_nearest_rank_percentiles():
    d = LatencyDistribution([4.0, 1.0, 3.0, 2.0])
    assert d.percentile(0) == d.min == 1.0
    assert d.percentile(100) == d.max == 4.0
    assert d.percentile(25) == 1.0
    assert d.percentile(26) == 2.0
    assert d.percentile(75) == 3.0
    assert d.reliability(2.0) == 0.5
    assert d.cdf() == [(1.0, 0.25), (2.0, 0.5), (3.0, 0.75), (4.0, 1.0)]
    with pytest.raises(ValueError):
        LatencyDistribution([]).mean


@given(st.lists(st.floats(0, 100), min_size=1, max_size=200), st.floats(0, 100))
def test_percentile_is_a_sample_with_enough_mass(xs, q):
    d = LatencyDistribution(xs)
    v = d.percentile(q)
    assert v in xs
    assert d.reliability(v) >= q / 100 - 1e-12


def test_constant_profile_equals_pipeline(e1, draw):
    tr = generate_trace(TrafficSpec.poisson(7.0, 64, count=500, seed=2))
    dist = latency_distribution(e1, draw, tr)
    ref = [packet_latency(e1, draw, o1, 64).total for o1 in tr.arrivals]
    np.testing.assert_allclose(dist.samples, ref, atol=1e-9)


def test_seed_determinism(e1):
    spec = TrafficSpec.poisson(101.0, 64)
    prof = ProcessingProfile().replace(r1=0.45)
    a = latency_distribution(e1, prof, spec, 2000, seed=4)
    b = latency_distribution(e1, prof, spec, 2000, seed=4)
    c = latency_distribution(e1, prof, spec, 2000, seed=5)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def test_engines_agree(e1):
    tr = generate_trace(TrafficSpec.poisson(101.0, 300, count=400, seed=1))
    prof = ProcessingProfile().replace(r1=0.45)
    fast = latency_distribution(e1, prof, tr, seed=3)
    slow, parts = latency_distribution(e1, prof, tr, seed=3, return_breakdowns=True)
    train = latency_distribution(e1, prof, tr, seed=3, train=True)
    np.testing.assert_allclose(fast.samples, slow.samples, atol=1e-9)
    assert len(parts) == len(tr)
    # the buffer model differs only where packets overlap
    gaps = np.diff(np.r_[-1e9, tr.arrivals])
    alone = (gaps > 15) & (np.r_[gaps[1:], 1e9] > 15)
    assert alone.mean() > 0.6
    np.testing.assert_allclose(fast.samples[alone], train.samples[alone], atol=1e-9)


def test_infeasible_packets_are_counted(e1):
    prof = ProcessingProfile().replace(r1=DistSpec.gaussian(0.6, 0.2))
    with pytest.warns(UserWarning, match="infeasible"):
        dist = latency_distribution(e1, prof, TrafficSpec.poisson(50.0), 1000, seed=0)
    assert dist.errored > 0
    assert len(dist) + dist.errored == 1000


def test_constant_arrivals_are_multimodal():
    # 3 DL + 1 UL slot of 0.5 ms, SR every 2 ms, packets every 101 ms
    cfg = tdd_config(0.5, 4, 3, 4, 3, advance_slots=1)
    spec = TrafficSpec.constant(101.0, 64)
    fixed = latency_distribution(cfg, ProfileDraw(), spec, 2000)
    atoms = np.unique(np.round(fixed.samples, 9))
    assert len(atoms) == 2                      # 101 ms leaves two phases of the 2 ms cycle
    assert atoms[-1] - atoms[0] < 2.0
    noisy = latency_distribution(cfg, ProcessingProfile(), spec, 10_000, seed=1)
    hist, _ = np.histogram(noisy.samples, bins=np.arange(5.0, 9.0, 0.25))
    peaks = [i for i in range(1, len(hist) - 1) if hist[i] > 1000 and hist[i] >= hist[i - 1]
             and hist[i] >= hist[i + 1]]
    assert len(peaks) >= 2


def test_ten_thousand_packets_fast():
    cfg = tdd_config(0.5, 5, 3, 1, 0, advance_slots=1)
    prof = ProcessingProfile().replace(r1=0.45)
    tr = generate_trace(TrafficSpec.poisson(101.0, 64, count=10_000))
    latency_distribution(cfg, prof, tr, seed=0)
    best = min(_timed(lambda: latency_distribution(cfg, prof, tr, seed=0)) for _ in range(5))
    assert best < 0.020


def _timed(fn):
    t = time.perf_counter()
    fn()
    return time.perf_counter() - t


# ------------------------------------------------------------------ wasserstein

def test_wasserstein_fixtures():
    assert wasserstein([1, 2, 3], [1, 2, 3]) == 0.0
    assert wasserstein([0, 0, 0, 0], [1, 1, 1, 1]) == pytest.approx(1.0, abs=1e-6)
    assert wasserstein([0, 1], [0.5, 0.5]) == pytest.approx(0.5, abs=1e-6)


def test_wasserstein_accepts_distributions():
    a, b = LatencyDistribution([0.0, 1.0]), LatencyDistribution([0.5, 0.5])
    assert wasserstein(a, b) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        wasserstein([], [1.0])


samples = st.lists(st.floats(0, 50, allow_nan=False), min_size=1, max_size=60)


@settings(max_examples=200)
@given(samples, samples)
def test_wasserstein_properties(a, b):
    w = wasserstein(a, b)
    assert w == pytest.approx(wasserstein(b, a), abs=1e-12)
    assert -1e-12 <= w <= 1 + 1e-12
    if sorted(a) == sorted(b):
        assert w == 0.0


@given(samples, st.floats(0.1, 10), st.floats(0, 10))
def test_wasserstein_scale_invariant(a, k, c):
    b = [x + 1 for x in a]
    w = wasserstein(a, b)
    assert wasserstein([k * x + c for x in a], [k * x + c for x in b]) == pytest.approx(w, abs=1e-9)


# ------------------------------------------------------------------ fitting

@pytest.fixture(scope="module")
def fit_setup():
    cfg = tdd_config(0.5, 5, 3, 1, 0, advance_slots=1)
    prof = ProcessingProfile().replace(r1=0.45)
    traffic = generate_trace(TrafficSpec.poisson(101.0, 64, count=3000, seed=1))
    return cfg, prof, traffic


def test_fit_recovers_planted_gaussian(fit_setup):
    cfg, prof, traffic = fit_setup
    observed = latency_distribution(cfg, prof.replace(l1=DistSpec.gaussian(1.6, 0.2)), traffic, seed=11)
    grid = [(m, s) for m in (1.4, 1.5, 1.6, 1.7, 1.8) for s in (0.1, 0.2, 0.3)]
    res = fit_learned_distribution(cfg, observed, traffic, prof, "l1", "gaussian", grid, seed=3)
    assert abs(res.params[0] - 1.6) <= 0.1 + 1e-9 and abs(res.params[1] - 0.2) <= 0.1 + 1e-9
    assert res.distance < 0.01


def test_fit_recovers_planted_lognormal(fit_setup):
    cfg, prof, traffic = fit_setup
    observed = latency_distribution(cfg, prof.replace(p4=DistSpec.lognormal(0.3, 0.25, 0.13)),
                                    traffic, seed=11)
    grid = [(s, loc) for s in (0.2, 0.3, 0.4, 0.5) for loc in (0.15, 0.2, 0.25, 0.3, 0.35)]
    res = fit_learned_distribution(cfg, observed, traffic, prof, "p4", "lognormal", grid, seed=3)
    assert res.params == pytest.approx((0.3, 0.25), abs=0.1 + 1e-9)
    assert res.distance < 0.01
    assert res.spec(0.13).kind == "lognormal"


def test_fit_single_point_and_ties(fit_setup):
    cfg, prof, traffic = fit_setup
    short = traffic.head(200)
    observed = latency_distribution(cfg, prof, short, seed=1)
    assert fit_learned_distribution(cfg, observed, short, prof, grid=[(2.0, 0.3)]).params == (2.0, 0.3)
    # l3 only matters for downlink, so every uplink grid point ties
    res = fit_learned_distribution(cfg, observed, short, prof, "l3", "gaussian",
                                   [(0.9, 0.1), (0.4, 0.3), (0.4, 0.2)], seed=1)
    assert res.params == (0.4, 0.2)


def test_fit_errors(fit_setup):
    cfg, prof, traffic = fit_setup
    with pytest.raises(ConfigError):
        fit_learned_distribution(cfg, [1.0], traffic.head(10), prof, grid=[])
    with pytest.raises(ConfigError):
        fit_learned_distribution(cfg, [1.0], traffic.head(10), prof, variable="q9")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(ConfigError):
            fit_learned_distribution(cfg, [1.0], traffic.head(10), prof, kind="weibull", grid=[(1, 1)])


def test_fit_on_single_trace_packet(e1, draw):
    res = fit_learned_distribution(e1, [4.7], PacketTrace.single(0.2, 64),
                                   ProcessingProfile.constant(draw), "l1", "gaussian",
                                   [(0.2, 0.0), (1.0, 0.0)])
    assert res.params == (0.2, 0.0) and res.distance == 0.0
