"""Packet trains: several packets sharing one UE buffer.

Bytes go through four states: arrived, requested (an SR is out), reported
(a BSR carried them) and granted (sent in a PUSCH).  The model jumps from
event to event; slot positions come from the closed-form helpers.

Per slot the order is: grants reaching the UE, packets becoming ready, SR
transmission, PUSCH transmission.  A packet that becomes ready triggers an
SR only when no SR is pending and the UE knows of no PUSCH after the ready
slot.  A PUSCH carries bytes that were ready before the slot started, first
come first served, and reports what is left of them.  The gNB grants large
slots only for the part of the report not already covered by grants it has
issued.

Per-packet draws supply l1, p4, p5 and l3; gNB and radio delays come from
the first draw.
"""
from __future__ import annotations

import heapq
import math
from bisect import insort

from .core import (LatencyBreakdown, SystemConfig, capacities, ceil_slots, dl_tail,
                   floor_slots, next_dl, nth_ul, ul_tail)
from .errors import ConfigError
from .profile import ProfileDraw
from .sr import next_sr_slot
from .traffic import PacketTrace
from .uplink import (check_radio, decompose, grant_after_bsr, grant_after_sr,
                     pusch_after_grant)


def _per_packet(draw, n: int) -> list[ProfileDraw]:
    if isinstance(draw, ProfileDraw):
        return [draw] * n
    draws = list(draw)
    if len(draws) != n:
        raise ValueError("need one draw per packet")
    return draws


def packet_train_latency(cfg: SystemConfig, draw, trace: PacketTrace,
                         direction: str = "ul") -> list[LatencyBreakdown]:
    draws = _per_packet(draw, len(trace))
    if not len(trace):
        return []
    if direction == "dl":
        return _dl_train(cfg, draws, trace)
    if cfg.access == "grant-free":
        return _grant_free_train(cfg, draws, trace)
    return _ul_train(cfg, draws, trace)


def _ul_train(cfg: SystemConfig, draws, trace: PacketTrace) -> list[LatencyBreakdown]:
    S, gi, sysd = cfg.S, cfg.ctrl.initial_grant, draws[0]
    o1, size = trace.arrivals, trace.sizes
    npk = len(o1)
    ready = [floor_slots(o1[i] + draws[i].l1, S) for i in range(npk)]
    by_ready = sorted(range(npk), key=lambda i: (ready[i], i))
    rem = list(size)
    first, first_src = [None] * npk, [None] * npk
    out = [None] * npk
    sched = {}            # PUSCH slot -> [capacity, source, grant slot]
    grants = []           # heap of grant slots not yet seen by the UE
    active = []           # ready, unfinished packets in arrival order
    pending, rp, done = False, 0, 0
    n = ready[by_ready[0]]
    while done < npk:
        while grants and grants[0] <= n:
            heapq.heappop(grants)
            pending = False
        while rp < npk and ready[by_ready[rp]] == n:
            insort(active, by_ready[rp])
            rp += 1
            if not pending and not any(u > n and g <= n for u, (_, _, g) in sched.items()):
                pending = True
        if pending and next_sr_slot(cfg, n) == n:
            g = grant_after_sr(cfg, sysd, n)
            u = pusch_after_grant(cfg, g, sysd.l2)
            if u not in sched:
                sched[u] = [gi, ("sr", n, g), g]
                heapq.heappush(grants, g)
        if n in sched:
            cap, src, _ = sched.pop(n)
            eligible = [i for i in active if ready[i] < n]
            for i in eligible:
                if cap <= 0:
                    break
                take = min(cap, rem[i])
                if first[i] is None:
                    first[i], first_src[i] = n, src
                rem[i] -= take
                cap -= take
                if rem[i] == 0:
                    end = n * S + ul_tail(cfg)
                    out[i] = decompose(cfg, o1[i], first[i], first_src[i], n, src, end, draws[i].p4)
                    active.remove(i)
                    done += 1
            need = sum(rem[i] for i in eligible) - sum(c for c, _, _ in sched.values())
            if need > 0:
                bi = capacities(cfg)[0]
                if bi <= 0:
                    raise ConfigError("no UL data capacity per slot")
                g1 = grant_after_bsr(cfg, sysd, n)
                start = pusch_after_grant(cfg, g1, sysd.l2p)
                src = ("bsr", n, g1, start)
                count, k = math.ceil(need / bi), 1
                while count:
                    u = nth_ul(cfg, start, k)
                    k += 1
                    if u not in sched:
                        sched[u] = [bi, src, g1]
                        count -= 1
                heapq.heappush(grants, g1)
        nxt = []
        if rp < npk:
            nxt.append(ready[by_ready[rp]])
        if grants:
            nxt.append(grants[0])
        if sched:
            nxt.append(min(sched))
        if pending:
            nxt.append(next_sr_slot(cfg, n + 1))
        if not nxt:
            if done < npk:
                raise RuntimeError("buffer stalled with no pending event")
            break
        n = min(nxt)
    return out


def _grant_free_train(cfg: SystemConfig, draws, trace: PacketTrace) -> list[LatencyBreakdown]:
    S = cfg.S
    bi = capacities(cfg)[0]
    if bi <= 0:
        raise ConfigError("no UL data capacity per slot")
    o1, size = trace.arrivals, trace.sizes
    npk = len(o1)
    ready = [floor_slots(o1[i] + draws[i].l1, S) for i in range(npk)]
    by_ready = sorted(range(npk), key=lambda i: (ready[i], i))
    rem, first, out = list(size), [None] * npk, [None] * npk
    active, rp, done = [], 0, 0
    tail = ul_tail(cfg)
    n = next_sr_slot(cfg, ready[by_ready[0]], grant_free=True)
    while done < npk:
        while rp < npk and ready[by_ready[rp]] <= n:
            insort(active, by_ready[rp])
            rp += 1
        cap = bi
        for i in list(active):
            if cap <= 0:
                break
            take = min(cap, rem[i])
            if first[i] is None:
                first[i] = n
            rem[i] -= take
            cap -= take
            if rem[i] == 0:
                end = n * S + tail
                comp = {"w1": first[i] * S - o1[i], "w6": tail}
                if n != first[i]:
                    comp["w6p"] = (n - first[i]) * S
                comp["w7"] = draws[i].p4
                out[i] = LatencyBreakdown(comp, end + draws[i].p4 - o1[i])
                active.remove(i)
                done += 1
        if done == npk:
            break
        after = n + 1 if active else max(n + 1, ready[by_ready[rp]])
        n = next_sr_slot(cfg, after, grant_free=True)
    return out


def _dl_train(cfg: SystemConfig, draws, trace: PacketTrace) -> list[LatencyBreakdown]:
    S, a1 = cfg.S, cfg.ctrl.advance_slots
    bi = capacities(cfg)[1]
    if bi <= 0:
        raise ConfigError("no DL data capacity per slot")
    check_radio(cfg, draws[0])
    o1, size = trace.arrivals, trace.sizes
    npk = len(o1)
    sched_slot = [ceil_slots(o1[i] + draws[i].p5, S) for i in range(npk)]
    used = {}
    out = [None] * npk
    tail = dl_tail(cfg)
    for i in sorted(range(npk), key=lambda i: (sched_slot[i], i)):
        m = sched_slot[i]
        slot = next_dl(cfg, m + a1 + 1)
        rem, first = size[i], None
        while True:
            free = bi - used.get(slot, 0)
            if free > 0:
                if first is None:
                    first = slot
                take = min(free, rem)
                used[slot] = used.get(slot, 0) + take
                rem -= take
                if rem == 0:
                    break
            slot = next_dl(cfg, slot + 1)
        end = slot * S + tail
        comp = {"u1": m * S - o1[i], "u2": (first - m) * S, "u3": end - first * S,
                "u4": draws[i].l3}
        out[i] = LatencyBreakdown(comp, end + draws[i].l3 - o1[i])
    return out
