"""Acceptance criteria.  Each test prints one PASS/FAIL line with the measured numbers."""
import time

import numpy as np
import pytest

from ranlat.core import TddPattern, ControlAndTiming, tdd_config
from ranlat.dists import DistSpec
from ranlat.profile import ProcessingProfile
from ranlat.search import (ReliabilityTarget, SearchSpace, builtin_mapping, count_valid,
                           expand_values, find_all, optimize, sample_valid)
from ranlat.sr import sr_slot_set
from ranlat.stochastic import fit_learned_distribution, frange, latency_distribution, wasserstein
from ranlat.timeline import differential_check
from ranlat.traffic import TrafficSpec, generate_trace

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        return ok
    return emit


def _grid(key):
    return expand_values(builtin_mapping()[key]["discrete_values"])


def _enumerated(T, d, P, O):
    """Multipliers k in 1..lcm whose SR slot lands in UL, folded onto 1..T."""
    k = np.arange(1, np.lcm(T, P) + 1)
    hit = (O + k * P) % T >= d
    return tuple(np.unique((k[hit] - 1) % T + 1).tolist())


def test_c1_sr_closed_form_vs_enumeration(report):
    t0 = time.perf_counter()
    n, bad = 0, []
    Ts, ds, Ps, Os = (_grid(k) for k in ("dl_ul_tx_period", "nof_dl_slots", "sr_period", "sr_offset"))
    for T in Ts:
        for d in ds:
            if d >= T:
                continue
            pattern = TddPattern(T, d)
            for P in Ps:
                for O in Os:
                    if O >= P:
                        continue
                    n += 1
                    if sr_slot_set(pattern, ControlAndTiming(P, O)).A != _enumerated(T, d, P, O):
                        bad.append((T, d, P, O))
    dt = time.perf_counter() - t0
    ok = n >= 100_000 and not bad and dt <= 60
    report(1, ok, f"{n} tuples, {len(bad)} mismatches, {dt:.1f} s (need >=1e5, 0, <=60 s)")
    assert ok


def test_c2_pipelines_vs_slot_simulator(report):
    t0 = time.perf_counter()
    n, bad = differential_check(10_500, seed=2024)
    m, bad2 = differential_check(1_500, seed=2025, train=True)
    dt = time.perf_counter() - t0
    ok = n >= 10_000 and not bad and not bad2 and dt <= 300
    report(2, ok, f"{n} single-packet + {m} train cases, {len(bad) + len(bad2)} mismatches "
                  f"at 1e-9 ms, {dt:.1f} s (need >=1e4, 0, <=300 s)")
    assert ok


def _best(space, T):
    res = optimize(space.restrict(dl_ul_tx_period=T), "mean", seed=0)
    d = res.distribution
    return res.point, d.min, d.mean, d.max


def test_c3_numerology2_short_periods(report):
    space = SearchSpace.builtin().restrict(slot_duration=0.25).with_profile(r1=0.45)
    p4, *four = _best(space, 4)
    p2, *two = _best(space, 2)
    fmt = lambda v: "/".join(f"{x:.3f}" for x in v)
    bands = (abs(four[0] - 1.67) <= 0.1 and abs(four[1] - 2.01) <= 0.15 and abs(four[2] - 2.47) <= 0.15
             and all(abs(a - b) <= 0.15 for a, b in zip(two, (2.7, 2.95, 3.2))))
    order = all(a < b for a, b in zip(four, two))
    ok = bands or order
    report(3, ok, f"4-slot best min/avg/max {fmt(four)} (d={p4.nof_dl_slots}), 2-slot {fmt(two)}; "
                  f"bands {'met' if bands else 'missed'}, strict 4-over-2 ordering "
                  f"{'holds' if order else 'fails'}")
    assert ok


def test_c4_throughput(report):
    cfg = tdd_config(0.5, 5, 3, 1, 0, advance_slots=1)
    prof = ProcessingProfile().replace(r1=0.45)
    trace = generate_trace(TrafficSpec.poisson(101.0, 64, count=10_000))
    latency_distribution(cfg, prof, trace, seed=0)
    runs = []
    for s in range(7):
        t = time.perf_counter()
        latency_distribution(cfg, prof, trace, seed=s)
        runs.append(time.perf_counter() - t)
    one = float(np.median(runs))
    t = time.perf_counter()
    res = optimize(SearchSpace.builtin(), "mean", workers=1)
    full = time.perf_counter() - t
    ok = one <= 0.020 and full <= 225
    report(4, ok, f"10k packets {1000 * one:.1f} ms (<=20), full FR1 optimize over {res.n_valid} "
                  f"configs {full:.1f} s single-core (<=225)")
    assert ok


def test_c5_pruning_count(report):
    n = count_valid(SearchSpace.builtin(), fix_monotone=True)
    rel = (n - 698_800) / 698_800
    ok = abs(rel) <= 0.05
    report(5, ok, f"{n} valid configurations, {100 * rel:+.2f}% vs 698.8k (need within 5%)")
    assert ok


def test_c6_reliability_spot_checks(report):
    gb = SearchSpace.builtin()
    r_gb = find_all(gb, ReliabilityTarget.parse("0.5ms@99.99"),
                    points=sample_valid(gb, 100_000, seed=0))
    gf = SearchSpace.builtin("fr1_grant_free")
    r_gf = find_all(gf, ReliabilityTarget.parse("1ms@99.99"),
                    points=sample_valid(gf, 100_000, seed=0))
    want = 3.2 / 326.6
    gb_ok = not r_gb.matches
    gf_ok = bool(r_gf.matches) and abs(r_gf.fraction - want) <= 0.02
    report(6, gb_ok and gf_ok,
           f"grant-based 0.5ms@99.99: {len(r_gb.matches)}/{r_gb.evaluated} match (need 0); "
           f"grant-free 1ms@99.99: {len(r_gf.matches)}/{r_gf.evaluated} = "
           f"{100 * r_gf.fraction:.2f}% (need non-empty, {100 * want:.2f} +/- 2 pp)")
    assert gb_ok and gf_ok


def test_c7_wasserstein_and_fit(report):
    fixtures = [wasserstein([1, 2, 3], [1, 2, 3]), wasserstein([0] * 4, [1] * 4),
                wasserstein([0, 1], [0.5, 0.5])]
    fix_ok = all(abs(a - b) <= 1e-6 for a, b in zip(fixtures, (0.0, 1.0, 0.5)))
    cfg = tdd_config(0.5, 5, 3, 1, 0, advance_slots=1)
    prof = ProcessingProfile().replace(r1=0.45)
    traffic = generate_trace(TrafficSpec.poisson(101.0, 64, count=10_000, seed=1))
    planted = (2.1, 0.3)
    observed = latency_distribution(cfg, prof.replace(l1=DistSpec.gaussian(*planted)), traffic, seed=11)
    step = 0.1
    grid = [(m, s) for m in frange(1.5, 2.7, step) for s in frange(0.1, 0.5, step)]
    res = fit_learned_distribution(cfg, observed, traffic, prof, "l1", "gaussian", grid, seed=3)
    fit_ok = (all(abs(a - b) <= step + 1e-9 for a, b in zip(res.params, planted))
              and res.distance < 0.01)
    report(7, fix_ok and fit_ok,
           f"fixtures {[round(x, 9) for x in fixtures]} (0/1/0.5); planted {planted} "
           f"recovered {res.params} at distance {res.distance:.5f} (<0.01, within one step)")
    assert fix_ok and fit_ok


def test_c8_numerology_sweep(report):
    # gNB L1 uplink delay keeps its default lognormal, whose mean is about 0.41 ms
    space = SearchSpace.builtin().with_profile(r1=0.5, l1=DistSpec.gaussian(1.46, 0.175))
    stats = {}
    for S in (1.0, 0.5, 0.25):
        d = optimize(space.restrict(slot_duration=S), "mean").distribution
        stats[S] = (d.min, d.mean, d.max)
    avgs = [stats[S][1] for S in (1.0, 0.5, 0.25)]
    ok = avgs[0] >= avgs[1] >= avgs[2] and stats[0.25][0] > 0.5
    report(8, ok, "best avg mu0/mu1/mu2 " + "/".join(f"{a:.3f}" for a in avgs)
                  + f" ms (non-increasing), mu2 min {stats[0.25][0]:.3f} ms (>0.5)")
    assert ok
