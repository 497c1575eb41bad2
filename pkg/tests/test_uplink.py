import pytest
from hypothesis import given, settings, strategies as st

from ranlat.core import ControlAndTiming, SlotGrid, SystemConfig, TddPattern, capacities, tdd_config
from ranlat.errors import ConfigError, RadioUnderflow
from ranlat.profile import ProfileDraw
from ranlat.timeline import simulate_slot_timeline
from ranlat.traffic import PacketTrace
from ranlat.uplink import (compute_w2, compute_w3, compute_w3_prime, compute_w4, compute_w5,
                           compute_w5_prime, repeated_sr_starts, ul_latency, ul_latency_size1,
                           ul_latency_size2_multi_sr, ul_latency_size2_single_sr,
                           ul_slots_per_period)


def oracle_total(cfg, d, o1, size):
    return simulate_slot_timeline(cfg, d, PacketTrace.single(o1, size))[0].total


def test_w2():
    assert compute_w2(tdd_config(0.5, 5, 3, 1, 0, pucch_start=13)) == pytest.approx(0.5)
    assert compute_w2(tdd_config(0.5, 5, 3, 1, 0, pucch_start=0)) == pytest.approx(0.5 / 14)
    with pytest.raises(ConfigError):
        tdd_config(0.5, 5, 3, 1, 0, pucch_start=13, pucch_symbols=2)


def test_w4():
    assert compute_w4(tdd_config(0.5, 5, 3, 1, 0)) == pytest.approx(0.0357, abs=1e-4)
    assert compute_w4(tdd_config(1.0, 5, 3, 1, 0, pdcch_symbols=3)) == pytest.approx(0.2143, abs=1e-4)
    with pytest.raises(ConfigError):
        tdd_config(1.0, 5, 3, 1, 0, pdcch_symbols=4)


def test_w3(e1, draw):
    w2 = compute_w2(e1)
    assert compute_w3(e1, draw, 0.2, 1.3, w2) == pytest.approx(2.0)   # SR slot 3, grant lands DL
    assert compute_w3(e1, draw, 0.0, 2.0, w2) == pytest.approx(3.0)   # SR slot 4, wraps


def test_w3_radio_underflow(e1, draw):
    with pytest.raises(RadioUnderflow):
        compute_w3(e1, draw.replace(p2=1.1, p3=0.1), 0.2, 1.3, 0.5)


def test_w5(e1, draw):
    w4 = compute_w4(e1)
    assert compute_w5(e1, draw, 2, w4) == pytest.approx(0.5)
    assert compute_w5(e1, draw, 0, w4) == pytest.approx(1.5)


def test_w5_override():
    cfg = tdd_config(0.5, 5, 3, 1, 0, k2=5)
    d = ProfileDraw(l2=0.2)
    assert compute_w5(cfg, d, 3, compute_w4(cfg)) == pytest.approx(2.5)  # slot 8 is UL
    with pytest.raises(ConfigError):
        compute_w5(tdd_config(0.5, 5, 3, 1, 0, k2=1), ProfileDraw(l2=0.6), 2, 0.0357)


def test_w3_prime(e1, draw):
    # the BSR slot ends at a boundary congruent to 4, then to 0
    assert compute_w3_prime(e1, draw, 2.0) == pytest.approx(1.5)
    assert compute_w3_prime(e1, draw, 5.0) == pytest.approx(2.5)
    assert compute_w3_prime(e1, draw.replace(p1=0.0), 2.0) == pytest.approx(1.0)


def test_w5_prime(e1, draw):
    assert compute_w5_prime(e1, draw, 2) == pytest.approx(0.5)
    assert compute_w5_prime(e1, draw, 0) == pytest.approx(1.5)
    same = draw.replace(l2p=draw.l2)
    assert compute_w5_prime(e1, same, 2) == compute_w5(e1, same, 2, compute_w4(e1))


def test_ul_slots_per_period(e1):
    pat = TddPattern(5, 3)
    assert ul_slots_per_period(4000, 1950, pat) == 2
    assert ul_slots_per_period(1, 1950, pat) == 1
    assert ul_slots_per_period(1950, 1950, pat) == 1


def test_size1_total(e1, draw):
    b = ul_latency_size1(e1, draw, 0.2)
    assert b.total == pytest.approx(4.7)
    for k, v in {"w1": 1.3, "w3": 2.0, "w5": 0.5, "w6": 0.5, "w7": 0.4}.items():
        assert b[k] == pytest.approx(v)
    assert b.additive_sum() == pytest.approx(b.total)
    assert b.total == pytest.approx(oracle_total(e1, draw, 0.2, 64))


def test_minimum_inside_sr_slot(e1, draw):
    # The SR may go out in the slot where preparation ends, so the best
    # arrival is late inside an SR-eligible slot rather than at its start.
    d = draw.replace(l1=0.0)
    o1s = [k * 0.01 for k in range(500)]
    sweep = [ul_latency(e1, d, o1, 64).total for o1 in o1s]
    best = o1s[sweep.index(min(sweep))]
    assert int(best / e1.S) % e1.T >= e1.d
    assert min(sweep) == pytest.approx(2.91)
    assert min(sweep) == pytest.approx(oracle_total(e1, d, best, 64))
    assert ul_latency(e1, d, 1.5, 64).total == pytest.approx(3.4)


def test_size2_at_initial_grant_equals_size1(e1, draw):
    gi = e1.ctrl.initial_grant
    assert ul_latency(e1, draw, 0.2, gi).total == pytest.approx(ul_latency_size1(e1, draw, 0.2).total)


@pytest.fixture
def single_sr():
    """E1 with one SR opportunity per period (slot 3), so SRs are never repeated."""
    return tdd_config(0.5, 5, 3, 5, 3, advance_slots=1)


def test_size2_one_extra_slot(single_sr, draw):
    cfg = single_sr
    gi, bi = cfg.ctrl.initial_grant, capacities(cfg)[0]
    assert repeated_sr_starts(cfg, draw, 0.2)[1] == 1
    b = ul_latency_size2_single_sr(cfg, draw, 0.2, gi + bi)
    small = ul_latency_size1(cfg, draw, 0.2)
    assert b.total == pytest.approx(small.total + b["w3p"] + b["w5p"] + b["w6p"])
    assert (b["w3p"], b["w5p"], b["w6p"]) == pytest.approx((1.5, 0.5, 0.5))
    assert b.total == pytest.approx(oracle_total(cfg, draw, 0.2, gi + bi))


def test_size2_multi_period(single_sr, draw):
    cfg = single_sr
    gi, bi = cfg.ctrl.initial_grant, capacities(cfg)[0]
    one = ul_latency(cfg, draw, 0.2, gi + 2 * bi).total     # one full UL block
    three = ul_latency(cfg, draw, 0.2, gi + 6 * bi).total   # three blocks
    assert three == pytest.approx(one + 2 * (cfg.d * cfg.S + 2 * cfg.S))
    assert three == pytest.approx(oracle_total(cfg, draw, 0.2, gi + 6 * bi))


def test_within_initial_grants(e1, draw):
    # SR in every slot: two SRs go out before the first grant
    gi = e1.ctrl.initial_grant
    W, n = repeated_sr_starts(e1, draw, 0.2)
    assert n == 2
    b = ul_latency_size2_multi_sr(e1, draw, 0.2, gi + 1, W, n)
    assert "w3p" not in b.components
    assert b.total == pytest.approx(oracle_total(e1, draw, 0.2, gi + 1))


def mu2(a1):
    return SystemConfig(SlotGrid(2), TddPattern(8, 4), ControlAndTiming(4, 0, advance_slots=a1))


def test_repeated_sr_counts(draw):
    W, n = repeated_sr_starts(mu2(2), draw, 0.0)
    assert n == 1 and W == [1.0]
    W, n = repeated_sr_starts(mu2(7), draw, 0.0)
    assert n == 2 and W == [1.0, 3.0]


def test_repeated_sr_strictly_increasing(draw):
    cfg = SystemConfig(SlotGrid(2), TddPattern(10, 3), ControlAndTiming(1, 0, advance_slots=7))
    W, n = repeated_sr_starts(cfg, draw, 0.0)
    assert n == len(W) > 2
    assert all(a < b for a, b in zip(W, W[1:]))


@pytest.mark.parametrize("extra", [0, 1, 700])
def test_multi_sr_matches_oracle(draw, extra):
    cfg = mu2(7)
    gi = cfg.ctrl.initial_grant
    W, n = repeated_sr_starts(cfg, draw, 0.0)
    size = 2 * gi + extra if extra else gi + 1
    b = ul_latency_size2_multi_sr(cfg, draw, 0.0, size, W, n)
    assert b.total == pytest.approx(oracle_total(cfg, draw, 0.0, size), abs=1e-9)
    assert b.total == pytest.approx(ul_latency(cfg, draw, 0.0, size).total)


def test_dispatch(single_sr, draw):
    gi = single_sr.ctrl.initial_grant
    assert "w3p" not in ul_latency(single_sr, draw, 0.2, gi - 1).components
    assert "w3p" in ul_latency(single_sr, draw, 0.2, gi + 1).components
    assert ul_latency(mu2(7), draw, 0.0, 3 * gi).total == pytest.approx(
        oracle_total(mu2(7), draw, 0.0, 3 * gi))


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 50), st.floats(0, 3), st.floats(0, 0.4), st.floats(0, 1), st.floats(0, 1),
       st.floats(0, 0.5))
def test_monotone_in_delays(o1, l1, p1, p4, l2, bump):
    cfg = tdd_config(0.5, 5, 3, 2, 1)
    base = ProfileDraw(l1=l1, l2=l2, l2p=l2, p1=p1, p4=p4, r1=0.3)
    t0 = ul_latency(cfg, base, o1, 64).total
    for field in ("l1", "l2", "p1", "p4"):
        bumped = base.replace(**{field: getattr(base, field) + bump})
        if field == "l2":
            bumped = bumped.replace(l2p=bumped.l2)
        assert ul_latency(cfg, bumped, o1, 64).total >= t0 - 1e-9


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 50), st.integers(1, 4), st.integers(0, 3))
def test_monotone_in_a1_and_k2(o1, a1, k2_extra):
    d = ProfileDraw(l1=0.5, l2=0.2, l2p=0.2, r1=0.3)
    k2 = 1 + k2_extra
    t = ul_latency(tdd_config(0.5, 5, 3, 2, 1, advance_slots=a1, k2=k2), d, o1, 64).total
    assert ul_latency(tdd_config(0.5, 5, 3, 2, 1, advance_slots=a1 + 1, k2=k2), d, o1, 64).total >= t - 1e-9
    assert ul_latency(tdd_config(0.5, 5, 3, 2, 1, advance_slots=a1, k2=k2 + 1), d, o1, 64).total >= t - 1e-9
