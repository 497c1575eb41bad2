"""Brute-force slot-by-slot simulation, used to check the closed forms.

Nothing here uses the modular formulas: slot types, SR opportunities and
grant timing are found by stepping forward one slot at a time and comparing
times directly.  The event rules are the ones described in ``fsm``.
"""
from __future__ import annotations

import math
import random

from .core import (EPS, SYMBOLS_PER_SLOT, ControlAndTiming, Duplexing, GrantFreeConfig,
                   LatencyBreakdown, LinkBudget, MiniSlotSplit, SlotGrid, SystemConfig,
                   TddPattern, TDD_PERIODS_MS, SR_PERIODS, default_tables)
from .errors import ConfigError, RadioUnderflow
from .profile import ProfileDraw
from .traffic import PacketTrace


class _Clock:
    def __init__(self, cfg: SystemConfig):
        p = cfg.pattern
        self.S = cfg.S
        self.T, self.d, self.tdd = p.total_slots, p.dl_slots, p.is_tdd
        self.sr_lo = p.dl_slots + 1 if (p.literal_sr_bounds and p.is_tdd) else p.dl_slots
        sp = p.split
        self.ul_end = self.S if sp is None else self.S * sp.sy_lul / SYMBOLS_PER_SLOT
        self.dl_end = self.S if sp is None else self.S * sp.sy_ldl / SYMBOLS_PER_SLOT

    def ul(self, n):
        return not self.tdd or n % self.T >= self.d

    def dl(self, n):
        return not self.tdd or n % self.T < self.d

    def slot_of(self, t):
        """Slot whose start is the last one at or before ``t``."""
        n = int(t // self.S)
        while (n + 1) * self.S <= t + EPS * self.S:
            n += 1
        while n * self.S > t + EPS * self.S:
            n -= 1
        return n

    def slot_from(self, t):
        """First slot starting at or after ``t``."""
        n = self.slot_of(t)
        if n * self.S < t - EPS * self.S:
            n += 1
        return n


def _capacity(cfg: SystemConfig, symbols: int) -> int:
    link = cfg.link
    n_rb = link.tables.n_rb(link.bandwidth_mhz, cfg.grid.numerology)
    qm, cr = link.tables.modulation(link.mcs_index)
    bits = n_rb * 12 * qm * cr * max(symbols, 0)
    return bits // 8192


def _ul_symbols(cfg):
    sp = cfg.pattern.split
    return (sp.sy_lul - sp.sy_ful + 1 if sp else SYMBOLS_PER_SLOT) - cfg.ctrl.pucch_symbols


def _dl_symbols(cfg):
    sp = cfg.pattern.split
    return (sp.sy_fdl if sp else SYMBOLS_PER_SLOT) - cfg.ctrl.pdcch_symbols


def _radio(cfg, draw):
    S, a1 = cfg.S, cfg.ctrl.advance_slots
    lead = (a1 + 1) * S
    gnb = draw.p2 + draw.p3
    if gnb > lead + EPS * S or not draw.r1 < lead - gnb:
        raise RadioUnderflow("radio front-end starved")


class _Gnb:
    """Grant timing found by walking the slot grid."""

    def __init__(self, cfg, clock, draw):
        self.cfg, self.c, self.d = cfg, clock, draw
        _radio(cfg, draw)

    def _grant_from(self, t):
        m = self.c.slot_from(t) + self.cfg.ctrl.advance_slots + 1
        while not self.c.dl(m):
            m += 1
        return m

    def after_sr(self, n):
        ctrl = self.cfg.ctrl
        pucch_end = n * self.c.S + (ctrl.pucch_start + ctrl.pucch_symbols) / SYMBOLS_PER_SLOT * self.c.S
        return self._grant_from(pucch_end + self.d.p1)

    def after_bsr(self, n):
        return self._grant_from((n + 1) * self.c.S + self.d.p1)

    def pusch(self, g, prep):
        S = self.c.S
        ready_at = g * S + self.cfg.ctrl.pdcch_symbols / SYMBOLS_PER_SLOT * S + prep
        k = g
        while k * S < ready_at - EPS * S:
            k += 1
        k2 = self.cfg.ctrl.k2
        if k2 is not None:
            if g + k2 < k:
                raise ConfigError("k2 below the UE minimum")
            k = g + k2
        while not self.c.ul(k):
            k += 1
        return k


def simulate_slot_timeline(cfg: SystemConfig, draw, trace: PacketTrace,
                           direction: str = "ul") -> list[LatencyBreakdown]:
    n = len(trace)
    draws = [draw] * n if isinstance(draw, ProfileDraw) else list(draw)
    if not n:
        return []
    if direction == "dl":
        return _dl(cfg, draws, trace)
    if cfg.access == "grant-free":
        return _grant_free(cfg, draws, trace)
    return _ul(cfg, draws, trace)


def _ul(cfg, draws, trace):
    from .uplink import decompose   # only for the component split of the result
    c = _Clock(cfg)
    S, gi = c.S, cfg.ctrl.initial_grant
    P, O = cfg.ctrl.sr_period, cfg.ctrl.sr_offset
    gnb = _Gnb(cfg, c, draws[0])
    bi = _capacity(cfg, _ul_symbols(cfg))
    o1, size = trace.arrivals, trace.sizes
    npk = len(o1)
    ready = [c.slot_of(o1[i] + draws[i].l1) for i in range(npk)]
    rem = list(size)
    first, first_src, out = [None] * npk, [None] * npk, [None] * npk
    sched, grants_due = {}, []
    pending, done = False, 0
    is_ready = [False] * npk
    n = min(ready)
    while done < npk:
        if any(g == n for g in grants_due):
            pending = False
        grants_due = [g for g in grants_due if g > n]
        for i in range(npk):
            if ready[i] == n:
                is_ready[i] = True
                known = any(u > n and g <= n for u, (_, _, g) in sched.items())
                if not pending and not known:
                    pending = True
        sr_here = (c.ul(n) and (not c.tdd or n % c.T >= c.sr_lo) and (n - O) % P == 0)
        if pending and sr_here:
            g = gnb.after_sr(n)
            u = gnb.pusch(g, draws[0].l2)
            if u not in sched:
                sched[u] = [gi, ("sr", n, g), g]
                grants_due.append(g)
        if n in sched:
            cap, src, _ = sched.pop(n)
            carried = [i for i in range(npk) if is_ready[i] and ready[i] < n and rem[i] > 0]
            for i in carried:
                take = min(cap, rem[i])
                if take <= 0:
                    break
                if first[i] is None:
                    first[i], first_src[i] = n, src
                rem[i] -= take
                cap -= take
                if rem[i] == 0:
                    end = n * S + c.ul_end
                    out[i] = decompose(cfg, o1[i], first[i], first_src[i], n, src, end, draws[i].p4)
                    done += 1
            backlog = sum(rem[i] for i in carried)
            covered = sum(v[0] for u, v in sched.items() if u > n)
            if backlog > covered:
                if bi <= 0:
                    raise ConfigError("no UL data capacity per slot")
                g1 = gnb.after_bsr(n)
                start = gnb.pusch(g1, draws[0].l2p)
                src = ("bsr", n, g1, start)
                count = math.ceil((backlog - covered) / bi)
                k = start
                while count:
                    if c.ul(k) and k not in sched:
                        sched[k] = [bi, src, g1]
                        count -= 1
                    k += 1
                grants_due.append(g1)
        n += 1
        idle = not pending and not sched and not grants_due
        if idle and done < npk and all(rem[i] == 0 for i in range(npk) if is_ready[i]):
            n = max(n, min(ready[i] for i in range(npk) if not is_ready[i]))
    return out


def _grant_free(cfg, draws, trace):
    c = _Clock(cfg)
    S = c.S
    gf = cfg.grant_free
    bi = _capacity(cfg, _ul_symbols(cfg))
    if bi <= 0:
        raise ConfigError("no UL data capacity per slot")
    o1, size = trace.arrivals, trace.sizes
    npk = len(o1)
    ready = [c.slot_of(o1[i] + draws[i].l1) for i in range(npk)]
    rem, first, out = list(size), [None] * npk, [None] * npk
    n, done = min(ready), 0
    while done < npk:
        usable = c.ul(n) and (not c.tdd or n % c.T >= c.sr_lo) and (n - gf.offset) % gf.period == 0
        if usable:
            cap = bi
            for i in range(npk):
                if ready[i] <= n and rem[i] > 0 and cap > 0:
                    take = min(cap, rem[i])
                    first[i] = n if first[i] is None else first[i]
                    rem[i] -= take
                    cap -= take
                    if rem[i] == 0:
                        comp = {"w1": first[i] * S - o1[i], "w6": c.ul_end}
                        if n != first[i]:
                            comp["w6p"] = (n - first[i]) * S
                        comp["w7"] = draws[i].p4
                        out[i] = LatencyBreakdown(comp, n * S + c.ul_end + draws[i].p4 - o1[i])
                        done += 1
        n += 1
    return out


def _dl(cfg, draws, trace):
    c = _Clock(cfg)
    S, a1 = c.S, cfg.ctrl.advance_slots
    _radio(cfg, draws[0])
    bi = _capacity(cfg, _dl_symbols(cfg))
    if bi <= 0:
        raise ConfigError("no DL data capacity per slot")
    o1, size = trace.arrivals, trace.sizes
    npk = len(o1)
    at_gnb = [o1[i] + draws[i].p5 for i in range(npk)]
    rem, first, sched_at, out = list(size), [None] * npk, [None] * npk, [None] * npk
    queue = []        # packets handed to the scheduler, in order, with earliest usable slot
    used = {}
    n, done = c.slot_of(min(o1)), 0
    while done < npk:
        for i in range(npk):
            if sched_at[i] is None and at_gnb[i] <= n * S + EPS * S:
                sched_at[i] = n
                queue.append(i)
        for i in list(queue):
            k = sched_at[i] + a1 + 1
            while rem[i] > 0:
                if c.dl(k) and used.get(k, 0) < bi:
                    take = min(bi - used.get(k, 0), rem[i])
                    used[k] = used.get(k, 0) + take
                    first[i] = k if first[i] is None else first[i]
                    rem[i] -= take
                    if rem[i] == 0:
                        break
                k += 1
            end = k * S + c.dl_end
            comp = {"u1": sched_at[i] * S - o1[i], "u2": (first[i] - sched_at[i]) * S,
                    "u3": end - first[i] * S, "u4": draws[i].l3}
            out[i] = LatencyBreakdown(comp, end + draws[i].l3 - o1[i])
            queue.remove(i)
            done += 1
        n += 1
    return out


# ---------------------------------------------------------------- random cases

def random_case(rng: random.Random, train: bool = False):
    """A random feasible (config, draw, trace, direction) for differential tests."""
    while True:
        try:
            return _random_case(rng, train)
        except ConfigError:
            continue


def _random_case(rng: random.Random, train: bool):
    from .sr import eligible_multipliers
    S = rng.choice([1.0, 0.5, 0.25])
    mu = {1.0: 0, 0.5: 1, 0.25: 2}[S]
    duplex = rng.choices([Duplexing.TDD, Duplexing.MINI_SLOT, Duplexing.FDD], [6, 2, 2])[0]
    split = None
    if duplex is Duplexing.TDD:
        Ts = [T for T in (2, 4, 5, 6, 8, 10, 12, 16, 20, 40, 80)
              if any(math.isclose(T * S, p) for p in TDD_PERIODS_MS)] or [int(2 / S)]
        T = rng.choice(Ts + [rng.randint(2, 12)])
        d = rng.randint(1, T - 1)
    else:
        T, d = 1, 0
        if duplex is Duplexing.MINI_SLOT:
            ldl = rng.randint(1, 10)
            ful = rng.randint(ldl + 1, 14)
            split = MiniSlotSplit(rng.randint(max(ldl - 1, 2), ldl + 1) if ldl < 14 else 14,
                                  ldl, ful, rng.randint(ful, 14))
    period = rng.choice([p for p in SR_PERIODS if p <= 40])
    offset = rng.randrange(0, min(period, T) if duplex is Duplexing.TDD else period)
    if duplex is Duplexing.TDD and not eligible_multipliers(T, d, period, offset):
        raise ConfigError("unreachable")
    draw = ProfileDraw(l1=rng.uniform(0, 3), l2=rng.uniform(0, 1.2), l2p=rng.uniform(0, 1.5),
                       l3=rng.uniform(0, 0.5), p1=rng.uniform(0, 0.8), p2=rng.uniform(0, 0.3),
                       p3=rng.uniform(0, 0.05), p4=rng.uniform(0, 1), p5=rng.uniform(0, 0.5),
                       r1=rng.uniform(0, 0.8))
    gnb = draw.p2 + draw.p3
    a1_min = max(math.ceil(gnb / S - EPS) - 1, math.floor((draw.r1 + gnb) / S + EPS), 0)
    a1 = a1_min + rng.choice([0, 0, 1, 2, 5])
    if split is not None:
        uc_st = rng.randint(split.sy_ful - 1, split.sy_lul - 1)
        uc_no = rng.randint(1, max(1, min(3, split.sy_lul - uc_st)))
        dc = rng.randint(1, min(3, split.sy_ldl))
    else:
        uc_st, dc = rng.randint(0, 13), rng.randint(1, 3)
        uc_no = rng.randint(1, min(3, 14 - uc_st))
    k2 = None
    if rng.random() < 0.3:
        k2 = math.ceil((dc / 14 * S + max(draw.l2, draw.l2p)) / S - EPS) + rng.randint(0, 3)
    bands = [b for (b, m) in default_tables().nrb if m == mu and b <= 20]
    link = LinkBudget(rng.choice(bands), rng.choice([0, 1, 2, 5, 9]))
    gi = rng.choice([16, 32, 64, 128])
    ctrl = ControlAndTiming(period, offset, uc_st, uc_no, dc, a1, k2, gi)
    access = "grant-free" if rng.random() < 0.2 else "grant-based"
    gf = None
    if access == "grant-free":
        gp = rng.choice([p for p in SR_PERIODS if p <= 20])
        go = rng.randrange(0, min(gp, T) if duplex is Duplexing.TDD else gp)
        if duplex is Duplexing.TDD and not eligible_multipliers(T, d, gp, go):
            raise ConfigError("unreachable")
        gf = GrantFreeConfig(gp, go)
    cfg = SystemConfig(SlotGrid(mu), TddPattern(T, d, duplex, split), ctrl, link, access, gf)
    direction = "dl" if rng.random() < 0.2 else "ul"
    from .core import capacities
    bi_ul, bi_dl = capacities(cfg)
    if bi_ul <= 0 or bi_dl <= 0:
        raise ConfigError("no capacity")
    big = bi_dl if direction == "dl" else bi_ul

    def size():
        return rng.choice([rng.randint(1, gi), gi, gi + rng.randint(1, 3 * big),
                           rng.randint(1, 6 * big)])

    if train:
        count = rng.randint(2, 6)
        t, arrivals = rng.uniform(0, 20), []
        for _ in range(count):
            arrivals.append(t)
            t += rng.choice([rng.uniform(0, 2 * S), rng.uniform(0, 10)])
        trace = PacketTrace(arrivals, [size() for _ in arrivals])
        draws = [draw.replace(l1=rng.uniform(0, 3), p4=rng.uniform(0, 1), p5=rng.uniform(0, 0.5),
                              l3=rng.uniform(0, 0.5)) for _ in arrivals]
        draws[0] = draw
        return cfg, draws, trace, direction
    return cfg, draw, PacketTrace.single(rng.uniform(0, 50), size()), direction


def _close(a: LatencyBreakdown, b: LatencyBreakdown, tol: float) -> bool:
    return (abs(a.total - b.total) <= tol and a.components.keys() == b.components.keys()
            and all(abs(a.components[k] - b.components[k]) <= tol for k in a.components))


def differential_check(n_cases: int, seed: int = 0, train: bool = False, tol: float = 1e-9):
    """Compare closed forms, the batch engine and the buffer model to this oracle.

    Returns (cases compared, list of mismatch descriptions).  Configurations
    the oracle rejects must be rejected by the closed form too.
    """
    import numpy as np

    from .batch import latency_totals
    from .duplex import packet_latency
    from .errors import InfeasibleError
    from .fsm import packet_train_latency
    from .profile import FIELDS

    rng = random.Random(seed)
    bad, compared = [], 0
    for i in range(n_cases):
        cfg, draw, trace, direction = random_case(rng, train)
        first = draw[0] if isinstance(draw, list) else draw
        try:
            ref = simulate_slot_timeline(cfg, draw, trace, direction)
        except (ConfigError, InfeasibleError) as e:
            if not train:
                try:
                    packet_latency(cfg, first, trace.arrivals[0], trace.sizes[0], direction)
                    bad.append(f"case {i}: oracle rejects ({e}) but closed form does not")
                except (ConfigError, InfeasibleError):
                    pass
            continue
        compared += 1
        got = {"fsm": packet_train_latency(cfg, draw, trace, direction)}
        if not train:
            got["closed-form"] = [packet_latency(cfg, first, trace.arrivals[0], trace.sizes[0], direction)]
            v = {f: getattr(first, f) for f in FIELDS}
            tot, ok = latency_totals(cfg, np.array(trace.arrivals), np.array(trace.sizes), v, direction)
            if not ok[0] or abs(tot[0] - ref[0].total) > tol:
                bad.append(f"case {i}: batch {tot[0]!r} vs oracle {ref[0].total!r} for {cfg}")
        for name, res in got.items():
            for k, (a, b) in enumerate(zip(res, ref)):
                if not _close(a, b, tol):
                    bad.append(f"case {i} packet {k}: {name} {a} vs oracle {b} for {cfg}")
    return compared, bad
