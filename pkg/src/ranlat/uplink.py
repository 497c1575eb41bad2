"""Grant-based uplink latency: SR, grant, PUSCH and the large-grant drain.

Slot positions are absolute slot indices counted from time 0.  A component
in ms is the distance between two such positions.
"""
from __future__ import annotations

import math

from .core import (SYMBOLS_PER_SLOT, LatencyBreakdown, SystemConfig, capacities,
                   ceil_slots, floor_slots, next_dl, next_ul, nth_ul, ul_tail)
from .errors import ConfigError, RadioUnderflow
from .profile import ProfileDraw
from .sr import next_sr_slot


def check_radio(cfg: SystemConfig, draw: ProfileDraw) -> None:
    """MAC must hand samples to the radio early enough to avoid underflow."""
    S, a1 = cfg.S, cfg.ctrl.advance_slots
    gnb = draw.p2 + draw.p3
    if ceil_slots(gnb, S) > a1 + 1:
        raise RadioUnderflow(f"p2+p3={gnb:.3f} ms needs more than {a1 + 1} slots")
    if not draw.r1 < (a1 + 1) * S - gnb:
        raise RadioUnderflow(f"r1={draw.r1} ms does not fit in {(a1 + 1) * S - gnb:.3f} ms")


def compute_w2(cfg: SystemConfig) -> float:
    c = cfg.ctrl
    if c.pucch_start + c.pucch_symbols > SYMBOLS_PER_SLOT:
        raise ConfigError("PUCCH exceeds the slot")
    return (c.pucch_start + c.pucch_symbols) / SYMBOLS_PER_SLOT * cfg.S


def compute_w4(cfg: SystemConfig) -> float:
    dc = cfg.ctrl.pdcch_symbols
    if dc not in (1, 2, 3):
        raise ConfigError("PDCCH symbols must be 1..3")
    return dc / SYMBOLS_PER_SLOT * cfg.S


def grant_after_sr(cfg: SystemConfig, draw: ProfileDraw, sr_slot: int) -> int:
    """Slot carrying the grant that answers an SR sent in ``sr_slot``."""
    check_radio(cfg, draw)
    c = ceil_slots(compute_w2(cfg) + draw.p1, cfg.S)
    return next_dl(cfg, sr_slot + c + cfg.ctrl.advance_slots + 1)


def grant_after_bsr(cfg: SystemConfig, draw: ProfileDraw, pusch_slot: int) -> int:
    """Slot carrying the grant that answers a BSR sent in ``pusch_slot``.

    The gNB starts decoding once the whole slot has been received.
    """
    check_radio(cfg, draw)
    c = ceil_slots(draw.p1, cfg.S)
    return next_dl(cfg, pusch_slot + 1 + c + cfg.ctrl.advance_slots + 1)


def k2_slots(cfg: SystemConfig, prep: float) -> int:
    k2_min = ceil_slots(compute_w4(cfg) + prep, cfg.S)
    k2 = cfg.ctrl.k2
    if k2 is None:
        return k2_min
    if k2 < k2_min:
        raise ConfigError(f"k2={k2} below the UE minimum {k2_min}")
    return k2


def pusch_after_grant(cfg: SystemConfig, grant_slot: int, prep: float) -> int:
    return next_ul(cfg, grant_slot + k2_slots(cfg, prep))


def compute_w3(cfg: SystemConfig, draw: ProfileDraw, o1: float, w1: float, w2: float) -> float:
    S = cfg.S
    sr_slot = round((o1 + w1) / S)
    check_radio(cfg, draw)
    c = ceil_slots(w2 + draw.p1, S)
    return (next_dl(cfg, sr_slot + c + cfg.ctrl.advance_slots + 1) - sr_slot) * S


def compute_w5(cfg: SystemConfig, draw: ProfileDraw, grant_slot: int, w4: float) -> float:
    k2_min = ceil_slots(w4 + draw.l2, cfg.S)
    k2 = cfg.ctrl.k2
    if k2 is not None and k2 < k2_min:
        raise ConfigError(f"k2={k2} below the UE minimum {k2_min}")
    base = k2_min if k2 is None else k2
    return (next_ul(cfg, grant_slot + base) - grant_slot) * cfg.S


def compute_w3_prime(cfg: SystemConfig, draw: ProfileDraw, absolute_time: float) -> float:
    """Wait from the end of the PUSCH slot carrying a BSR to the large grant."""
    end_slot = round(absolute_time / cfg.S)
    return (grant_after_bsr(cfg, draw, end_slot - 1) - end_slot) * cfg.S


def compute_w5_prime(cfg: SystemConfig, draw: ProfileDraw, grant_slot: int) -> float:
    return (pusch_after_grant(cfg, grant_slot, draw.l2p) - grant_slot) * cfg.S


def ul_slots_per_period(p_rem: int, bi_ul: int, pattern) -> int:
    if p_rem <= 0 or bi_ul <= 0:
        raise ValueError("need positive remaining bytes and capacity")
    return min(math.ceil(p_rem / bi_ul), pattern.total_slots - pattern.dl_slots)


# ------------------------------------------------------------------ breakdowns

def decompose(cfg: SystemConfig, o1: float, first: int, first_src, last: int, last_src,
              end: float, p4: float) -> LatencyBreakdown:
    """Split a packet's latency along the chain of events that served it.

    ``first``/``last`` are the PUSCH slots carrying its first and last bytes.
    A source is ``("sr", sr_slot, grant_slot)`` for grants answering an SR,
    ``("bsr", bsr_slot, grant_slot, chain_start)`` for large grants, or None.
    """
    S = cfg.S
    comp = {}
    if first_src and first_src[0] == "sr":
        _, s, g = first_src
        comp.update(w1=s * S - o1, w2=compute_w2(cfg), w3=(g - s) * S,
                    w4=compute_w4(cfg), w5=(first - g) * S)
    else:
        comp["w1"] = first * S - o1
    if last == first:
        comp["w6"] = end - first * S
    else:
        comp["w6"] = S
        if last_src and last_src[0] == "bsr" and last_src[2] >= first + 1:
            _, _, g, c = last_src
            comp.update(w3p=(g - first - 1) * S, w5p=(c - g) * S, w6p=end - c * S)
        else:
            comp["w6p"] = end - (first + 1) * S
    comp["w7"] = p4
    return LatencyBreakdown(comp, end + p4 - o1)


# ------------------------------------------------------------------ pipelines

def _initial(cfg: SystemConfig, draw: ProfileDraw, o1: float):
    ready = floor_slots(o1 + draw.l1, cfg.S)
    s0 = next_sr_slot(cfg, ready)
    g0 = grant_after_sr(cfg, draw, s0)
    u0 = pusch_after_grant(cfg, g0, draw.l2)
    return s0, g0, u0


def ul_latency_size1(cfg: SystemConfig, draw: ProfileDraw, o1: float) -> LatencyBreakdown:
    s0, g0, u0 = _initial(cfg, draw, o1)
    end = u0 * cfg.S + ul_tail(cfg)
    return decompose(cfg, o1, u0, ("sr", s0, g0), u0, ("sr", s0, g0), end, draw.p4)


def _bi_ul(cfg: SystemConfig) -> int:
    bi = capacities(cfg)[0]
    if bi <= 0:
        raise ConfigError("no UL data capacity per slot")
    return bi


def ul_latency_size2_single_sr(cfg: SystemConfig, draw: ProfileDraw, o1: float,
                               P: int) -> LatencyBreakdown:
    S, T, d = cfg.S, cfg.T, cfg.d
    s0, g0, u0 = _initial(cfg, draw, o1)
    p_rem = P - cfg.ctrl.initial_grant
    if p_rem <= 0:
        end = u0 * S + ul_tail(cfg)
        return decompose(cfg, o1, u0, ("sr", s0, g0), u0, ("sr", s0, g0), end, draw.p4)
    bi = _bi_ul(cfg)
    g1 = grant_after_bsr(cfg, draw, u0)
    start = pusch_after_grant(cfg, g1, draw.l2p)
    slot, first_period = start, True
    while True:
        if cfg.pattern.is_tdd:
            # UL slots left in the current period; the first large grant can
            # land after the start of the UL block.
            avail = T - slot % T if first_period else T - d
            n = min(math.ceil(p_rem / bi), avail)
        else:
            n = math.ceil(p_rem / bi)
        p_rem -= n * bi
        if p_rem <= 0:
            last = slot + n - 1
            break
        slot += n + d
        first_period = False
    end = last * S + ul_tail(cfg)
    return decompose(cfg, o1, u0, ("sr", s0, g0), last, ("bsr", u0, g1, start), end, draw.p4)


def repeated_sr_starts(cfg: SystemConfig, draw: ProfileDraw, o1: float) -> tuple[list[float], int]:
    """SR retransmissions sent before the first grant reaches the UE."""
    s0, g0, _ = _initial(cfg, draw, o1)
    slots = [s0]
    s = next_sr_slot(cfg, s0 + 1)
    while s < g0:
        slots.append(s)
        s = next_sr_slot(cfg, s + 1)
    return [s * cfg.S - o1 for s in slots], len(slots)


def ul_latency_size2_multi_sr(cfg: SystemConfig, draw: ProfileDraw, o1: float, P: int,
                              W1: list[float], sr_num: int) -> LatencyBreakdown:
    """Every SR yields an initial grant; only the first one's BSR asks for more.

    The gNB sizes the large grant from the reported backlog minus what it
    has already granted for later slots, and skips slots already granted.
    """
    S, gi = cfg.S, cfg.ctrl.initial_grant
    srcs = {}
    for w in W1[:sr_num]:
        s = round((o1 + w) / S)
        g = grant_after_sr(cfg, draw, s)
        u = pusch_after_grant(cfg, g, draw.l2)
        srcs.setdefault(u, ("sr", s, g))
    initial = sorted(srcs)
    u0 = initial[0]
    cap = {u: gi for u in initial}
    needed = P - gi - gi * (len(initial) - 1)
    big = None
    if P - gi > 0 and needed > 0:
        bi = _bi_ul(cfg)
        g1 = grant_after_bsr(cfg, draw, u0)
        start = pusch_after_grant(cfg, g1, draw.l2p)
        big = ("bsr", u0, g1, start)
        n, k = math.ceil(needed / bi), 1
        while n:
            u = nth_ul(cfg, start, k)
            k += 1
            if u in cap:
                continue
            cap[u], srcs[u] = bi, big
            n -= 1
    p_rem = P
    for u in sorted(cap):
        p_rem -= cap[u]
        if p_rem <= 0:
            last = u
            break
    end = last * S + ul_tail(cfg)
    return decompose(cfg, o1, u0, srcs[u0], last, srcs[last], end, draw.p4)


def ul_latency(cfg: SystemConfig, draw: ProfileDraw, o1: float, P: int) -> LatencyBreakdown:
    if P < cfg.ctrl.initial_grant:
        return ul_latency_size1(cfg, draw, o1)
    W1, sr_num = repeated_sr_starts(cfg, draw, o1)
    if sr_num == 1:
        return ul_latency_size2_single_sr(cfg, draw, o1, P)
    return ul_latency_size2_multi_sr(cfg, draw, o1, P, W1, sr_num)
