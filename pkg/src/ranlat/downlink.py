"""Grant-free uplink and downlink pipelines."""
from __future__ import annotations

import math

from .core import (LatencyBreakdown, SystemConfig, capacities, ceil_slots, dl_tail,
                   floor_slots, next_dl, nth_dl, ul_tail)
from .errors import ConfigError
from .profile import ProfileDraw
from .sr import eligible_multipliers, next_sr_slot
from .uplink import check_radio


def grant_free_slots(cfg: SystemConfig, first: int, count: int) -> int:
    """The ``count``-th pre-configured slot counting ``first`` as the 1st."""
    gf = cfg.grant_free
    T, d = cfg.T, cfg.d
    A = eligible_multipliers(T, d, gf.period, gf.offset % T,
                             cfg.pattern.literal_sr_bounds and cfg.pattern.is_tdd)
    m = (first - gf.offset) // gf.period
    j, a = divmod(m - 1, T)
    idx = A.index(a + 1) + count - 1
    j += idx // len(A)
    return gf.offset + (A[idx % len(A)] + j * T) * gf.period


def grant_free_ul_latency(cfg: SystemConfig, draw: ProfileDraw, o1: float, P: int) -> LatencyBreakdown:
    if cfg.access != "grant-free":
        raise ConfigError("configuration is not in grant-free mode")
    S = cfg.S
    bi = capacities(cfg)[0]
    if bi <= 0:
        raise ConfigError("no UL data capacity per slot")
    ready = floor_slots(o1 + draw.l1, S)
    first = next_sr_slot(cfg, ready, grant_free=True)
    n = math.ceil(P / bi)
    last = grant_free_slots(cfg, first, n) if n > 1 else first
    end = last * S + ul_tail(cfg)
    comp = {"w1": first * S - o1, "w6": ul_tail(cfg)}
    if last != first:
        comp["w6p"] = end - first * S - ul_tail(cfg)
    comp["w7"] = draw.p4
    return LatencyBreakdown(comp, end + draw.p4 - o1)


def dl_first_slot(cfg: SystemConfig, draw: ProfileDraw, o1: float) -> tuple[int, int]:
    """(scheduling slot, first DL data slot) for a packet reaching the gNB at ``o1``."""
    check_radio(cfg, draw)
    m = ceil_slots(o1 + draw.p5, cfg.S)
    return m, next_dl(cfg, m + cfg.ctrl.advance_slots + 1)


def dl_latency_tdd(cfg: SystemConfig, draw: ProfileDraw, o1: float, P: int) -> LatencyBreakdown:
    S, T, d = cfg.S, cfg.T, cfg.d
    bi = capacities(cfg)[1]
    if bi <= 0:
        raise ConfigError("no DL data capacity per slot")
    m, first = dl_first_slot(cfg, draw, o1)
    p_rem, slot, first_period = P, first, True
    if cfg.pattern.is_tdd:
        while True:
            avail = d - slot % T if first_period else d
            n = min(math.ceil(p_rem / bi), avail)
            p_rem -= n * bi
            if p_rem <= 0:
                last = slot + n - 1
                break
            slot += n + (T - d)
            first_period = False
    else:
        last = nth_dl(cfg, first, math.ceil(P / bi))
    end = last * S + dl_tail(cfg)
    comp = {"u1": m * S - o1, "u2": (first - m) * S, "u3": end - first * S, "u4": draw.l3}
    return LatencyBreakdown(comp, end + draw.l3 - o1)
