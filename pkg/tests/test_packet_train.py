import random

import pytest
from hypothesis import given, settings, strategies as st

from ranlat.core import tdd_config
from ranlat.duplex import packet_latency
from ranlat.fsm import packet_train_latency
from ranlat.profile import ProfileDraw
from ranlat.timeline import simulate_slot_timeline
from ranlat.traffic import PacketTrace, TrafficSpec, generate_trace


@pytest.fixture
def cfg():
    return tdd_config(0.5, 5, 3, 5, 3, advance_slots=1)


def totals(res):
    return [b.total for b in res]


def test_single_packet_degenerates(cfg, draw):
    for size in (64, 500, 5000):
        tr = PacketTrace.single(0.7, size)
        got = packet_train_latency(cfg, draw, tr)[0]
        assert got == packet_latency(cfg, draw, 0.7, size)


def test_second_packet_rides_first_grant(cfg, draw):
    tr = PacketTrace((0.2, 0.3), (32, 32))
    a, b = packet_train_latency(cfg, draw, tr)
    # same PUSCH slot, so the later arrival is 0.1 ms shorter
    assert a.total == pytest.approx(4.7)
    assert b.total == pytest.approx(4.6)
    assert totals(simulate_slot_timeline(cfg, draw, tr)) == pytest.approx([4.7, 4.6])


def test_late_rider_uses_spare_initial_grant(cfg, draw):
    # arrives after the SR went out but is ready before the granted PUSCH
    tr = PacketTrace((0.2, 3.0), (32, 32))
    a, b = packet_train_latency(cfg, draw, tr)
    assert b.total == pytest.approx(a.total - 2.8)


def test_spaced_packets_are_independent(cfg, draw):
    tr = generate_trace(TrafficSpec.constant(101.0, 64, count=20))
    got = totals(packet_train_latency(cfg, draw, tr))
    alone = [packet_latency(cfg, draw, o1, 64).total for o1 in tr.arrivals]
    assert got == pytest.approx(alone)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_recorded_style_traces_match_oracle(seed):
    rng = random.Random(seed)
    T, P = rng.choice([4, 5, 10]), rng.choice([1, 2, 5])
    cfg = tdd_config(0.5, T, 2, P, 3 % P, advance_slots=1)
    t, arrivals = 0.0, []
    for _ in range(rng.randint(2, 12)):
        t += rng.choice([rng.uniform(0, 1.0), rng.uniform(5, 40)])
        arrivals.append(t)
    sizes = [rng.choice([40, 64, 200, 1200, 4000]) for _ in arrivals]
    tr = PacketTrace(arrivals, sizes)
    d = ProfileDraw(l1=rng.uniform(0, 2), p4=0.3, r1=0.3)
    assert totals(packet_train_latency(cfg, d, tr)) == pytest.approx(
        totals(simulate_slot_timeline(cfg, d, tr)), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 30), min_size=2, max_size=10), st.integers(1, 3000))
def test_fifo_completion(gaps, size):
    cfg = tdd_config(0.5, 5, 3, 1, 0, advance_slots=1)
    arrivals, t = [], 0.0
    for g in gaps:
        t += g
        arrivals.append(t)
    tr = PacketTrace(arrivals, [size] * len(arrivals))
    d = ProfileDraw(l1=0.5, p4=0.3, r1=0.3)
    res = packet_train_latency(cfg, d, tr)
    assert len(res) == len(tr)
    ends = [b.total + o1 for b, o1 in zip(res, arrivals)]
    assert all(x <= y + 1e-9 for x, y in zip(ends, ends[1:]))
    assert all(b.total > 0 for b in res)
