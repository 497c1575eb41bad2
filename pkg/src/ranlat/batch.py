"""Vectorized latency of many independent packets under one configuration.

Same arithmetic as the scalar pipelines, on numpy arrays.  Packets larger
than the initial grant whose SR is repeated before the grant arrives are
handed to the scalar pipeline.
"""
from __future__ import annotations

import numpy as np

from .core import EPS, SYMBOLS_PER_SLOT, SystemConfig, capacities, dl_tail, ul_tail
from .errors import ConfigError, InfeasibleError, UnreachableSR
from .profile import FIELDS, ProfileDraw
from .sr import _search_table, eligible_multipliers


def _ceil(x, S):
    return np.ceil(np.asarray(x) / S - EPS).astype(np.int64)


class _Calendar:
    def __init__(self, cfg: SystemConfig):
        self.tdd = cfg.pattern.is_tdd
        self.T, self.d = cfg.T, cfg.d

    def next_dl(self, x):
        if not self.tdd:
            return x
        pos = x % self.T
        return np.where(pos < self.d, x, x + self.T - pos)

    def next_ul(self, x):
        if not self.tdd:
            return x
        pos = x % self.T
        return np.where(pos < self.d, x + self.d - pos, x)

    def nth_ul(self, start, k):
        if not self.tdd:
            return start + k - 1
        T, d = self.T, self.d
        idx = start % T - d + k - 1
        return start - start % T + (idx // (T - d)) * T + d + idx % (T - d)

    def nth_dl(self, start, k):
        if not self.tdd:
            return start + k - 1
        T, d = self.T, self.d
        idx = start % T + k - 1
        return start - start % T + (idx // d) * T + idx % d


def _next_opportunity(cfg: SystemConfig, ready, grant_free=False):
    p = cfg.pattern
    lit = p.literal_sr_bounds and p.is_tdd
    if grant_free:
        P, O = cfg.grant_free.period, cfg.grant_free.offset
    else:
        P, O = cfg.ctrl.sr_period, cfg.ctrl.sr_offset
    ext, kp = _search_table(cfg.T, cfg.d, P, O, lit)
    if not ext:
        raise UnreachableSR(f"no SR opportunity lands in UL (T={cfg.T}, d={cfg.d}, P={P}, O={O})")
    q, r = np.divmod(ready - O, cfg.T * P)
    k = np.asarray(ext)[np.searchsorted(np.asarray(kp), r, side="left")]
    return O + (k + q * cfg.T) * P


def _radio_ok(cfg, v, a1):
    S = cfg.S
    gnb = v["p2"] + v["p3"]
    return (_ceil(gnb, S) <= a1 + 1) & (v["r1"] < (a1 + 1) * S - gnb)


def _k2(w4, prep, ok, S, k2):
    k2_min = _ceil(w4 + prep, S)
    if k2 is None:
        return k2_min, ok
    return k2 + 0 * k2_min, ok & (k2 >= k2_min)


def packet_index(cfg: SystemConfig, o1, v: dict, direction: str = "ul"):
    """Slot index that fixes a packet's fate: ready slot (UL) or scheduling slot (DL)."""
    if direction == "dl":
        return _ceil(np.asarray(o1) + v["p5"], cfg.S)
    return np.floor((np.asarray(o1) + v["l1"]) / cfg.S + EPS).astype(np.int64)


def end_times(cfg: SystemConfig, idx, sizes, v: dict, direction: str = "ul",
              a1=None, k2=None, c=None):
    """End (ms) of the last data slot for packets with slot index ``idx``.

    ``a1``, ``k2`` and ``c`` (SR-to-grant processing slots) override the
    configuration and may be column arrays, giving one row per setting.
    End times are shift-periodic in ``idx`` with the SR/TDD common period.
    """
    idx = np.asarray(idx, dtype=np.int64)
    sizes = np.broadcast_to(np.asarray(sizes, dtype=np.int64), idx.shape)
    if direction == "dl":
        return _dl(cfg, idx, sizes, v, a1)
    if direction != "ul":
        raise ValueError(f"direction must be 'ul' or 'dl', got {direction!r}")
    if cfg.access == "grant-free":
        return _grant_free(cfg, idx, sizes)
    return _ul(cfg, idx, sizes, v, a1, k2, c)


def latency_totals(cfg: SystemConfig, o1, sizes, v: dict, direction: str = "ul"):
    """Totals (ms) and a validity mask for packets arriving at ``o1``.

    ``v`` maps each delay name to a scalar or an array aligned with ``o1``.
    Invalid packets (radio underflow, k2 below the UE minimum) get NaN.
    """
    o1 = np.asarray(o1, dtype=float)
    n = o1.shape[0]
    sizes = np.broadcast_to(np.asarray(sizes, dtype=np.int64), (n,))
    end, ok = end_times(cfg, packet_index(cfg, o1, v, direction), sizes, v, direction)
    total = end + (v["l3"] if direction == "dl" else v["p4"]) - o1
    ok = np.broadcast_to(ok, (n,))
    return np.where(ok, total, np.nan), ok


def _ul(cfg, ready, P, v, a1=None, k2=None, c=None):
    from .uplink import ul_latency
    S, gi = cfg.S, cfg.ctrl.initial_grant
    grid = any(np.ndim(x) for x in (a1, k2, c) if x is not None)
    a1 = cfg.ctrl.advance_slots if a1 is None else a1
    cal = _Calendar(cfg)
    w2 = (cfg.ctrl.pucch_start + cfg.ctrl.pucch_symbols) / SYMBOLS_PER_SLOT * S
    w4 = cfg.ctrl.pdcch_symbols / SYMBOLS_PER_SLOT * S
    ok = _radio_ok(cfg, v, a1)
    s0 = _next_opportunity(cfg, ready)
    c = _ceil(w2 + v["p1"], S) if c is None else c
    g0 = cal.next_dl(s0 + c + a1 + 1)
    base, ok = _k2(w4, v["l2"], ok, cfg.S, cfg.ctrl.k2 if k2 is None else k2)
    u0 = cal.next_ul(g0 + base)
    last = u0
    more = P > gi
    if not more.any():
        return last * S + ul_tail(cfg), ok
    if grid:
        raise ValueError("packets above the initial grant need scalar settings")
    bi = capacities(cfg)[0]
    multi = more & (_next_opportunity(cfg, s0 + 1) < g0)
    single = more & ~multi
    if bi <= 0:
        ok = ok & ~more
    elif single.any():
        g1 = cal.next_dl(u0 + 1 + _ceil(v["p1"], S) + a1 + 1)
        base1, ok1 = _k2(w4, v["l2p"], True, cfg.S, cfg.ctrl.k2)
        ok = ok & (ok1 | ~single)
        start = cal.next_ul(g1 + base1)
        count = np.maximum(-(-(P - gi) // bi), 1)
        last = np.where(single, cal.nth_ul(start, count), u0)
    end = np.array(np.broadcast_to(last * S + ul_tail(cfg), ready.shape), dtype=float)
    ok = np.array(np.broadcast_to(ok, ready.shape))
    for i in (np.flatnonzero(multi & ok) if bi > 0 else ()):
        d = ProfileDraw(**{f: float(np.broadcast_to(v[f], ready.shape)[i]) for f in FIELDS})
        d = d.replace(l1=0.0, p4=0.0)
        o1 = float(ready[i]) * S
        try:
            end[i] = ul_latency(cfg, d, o1, int(P[i])).total + o1
        except (ConfigError, InfeasibleError):
            ok[i] = False
    return end, ok


def _grant_free(cfg, ready, P):
    S = cfg.S
    gf = cfg.grant_free
    bi = capacities(cfg)[0]
    if bi <= 0:
        raise ConfigError("no UL data capacity per slot")
    first = _next_opportunity(cfg, ready, grant_free=True)
    A = np.asarray(eligible_multipliers(cfg.T, cfg.d, gf.period, gf.offset % cfg.T,
                                        cfg.pattern.literal_sr_bounds and cfg.pattern.is_tdd))
    count = -(-P // bi)
    j, a = np.divmod((first - gf.offset) // gf.period - 1, cfg.T)
    idx = np.searchsorted(A, a + 1) + count - 1
    j = j + idx // len(A)
    last = gf.offset + (A[idx % len(A)] + j * cfg.T) * gf.period
    return last * S + ul_tail(cfg), np.ones(ready.shape, bool)


def _dl(cfg, m, P, v, a1=None):
    S = cfg.S
    a1 = cfg.ctrl.advance_slots if a1 is None else a1
    cal = _Calendar(cfg)
    bi = capacities(cfg)[1]
    if bi <= 0:
        raise ConfigError("no DL data capacity per slot")
    ok = _radio_ok(cfg, v, a1)
    first = cal.next_dl(m + a1 + 1)
    last = cal.nth_dl(first, -(-P // bi))
    return last * S + dl_tail(cfg), ok
