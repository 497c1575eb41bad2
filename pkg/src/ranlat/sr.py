"""SR-eligible slots and the wait until the first usable SR opportunity.

An SR opportunity sits at slot ``O + k*P``.  It is usable when that slot is an
UL slot of the TDD pattern.  Because ``k*P mod T`` only takes multiples of
``n = gcd(P, T)``, the usable multipliers can be written down directly with a
modular inverse of ``P/n`` modulo ``T/n`` (Euler's theorem), instead of being
searched for.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from functools import lru_cache

from .core import SystemConfig, TddPattern, ControlAndTiming, floor_slots
from .errors import UnreachableSR


def totient(m: int) -> int:
    result, x, p = m, m, 2
    while p * p <= x:
        if x % p == 0:
            while x % p == 0:
                x //= p
            result -= result // p
        p += 1
    if x > 1:
        result -= result // x
    return result


def inverse_euler(a: int, m: int) -> int:
    if m == 1:
        return 0
    return pow(a, totient(m) - 1, m)


def inverse_egcd(a: int, m: int) -> int:
    if m == 1:
        return 0
    old_r, r, old_s, s = a % m, m, 1, 0
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
    if old_r != 1:
        raise ValueError(f"{a} has no inverse modulo {m}")
    return old_s % m


@dataclass(frozen=True)
class SrSlotSet:
    """Usable SR multipliers ``A`` (subset of 1..T) and the UL residues ``B`` they hit."""
    A: tuple[int, ...]
    B: tuple[int, ...]
    T: int
    period: int
    offset: int

    def __bool__(self) -> bool:
        return bool(self.A)

    def __len__(self) -> int:
        return len(self.A)


def _lower(d: int, literal: bool) -> int:
    return d + 1 if literal else d


@lru_cache(maxsize=65536)
def eligible_multipliers(T: int, d: int, P: int, O: int, literal: bool = False,
                         inverse=inverse_euler) -> tuple[int, ...]:
    O %= T
    n = math.gcd(P, T)
    Tn, Pn = T // n, P // n
    inv = inverse(Pn, Tn)
    lo = -((O - _lower(d, literal)) // n)          # ceil((lo_slot - O) / n)
    hi = (T - 1 - O) // n
    if lo > hi:
        return ()
    out = set()
    for j in range(lo, hi + 1):
        base = (j * inv) % Tn
        for i in range(n):
            k = base + Tn * i
            out.add(k if k else T)
    return tuple(sorted(out))


def _make(T, d, P, O, A) -> SrSlotSet:
    B = tuple(sorted({(O + k * P) % T for k in A}))
    return SrSlotSet(A, B, T, P, O)


def _pattern_bounds(pattern: TddPattern) -> tuple[int, int, bool]:
    return pattern.total_slots, pattern.dl_slots, pattern.literal_sr_bounds and pattern.is_tdd


def sr_slot_set(pattern: TddPattern, ctrl: ControlAndTiming) -> SrSlotSet:
    T, d, lit = _pattern_bounds(pattern)
    P, O = ctrl.sr_period, ctrl.sr_offset
    return _make(T, d, P, O, eligible_multipliers(T, d, P, O, lit))


def sr_slot_set_oracle(pattern: TddPattern, ctrl: ControlAndTiming) -> SrSlotSet:
    T, d, lit = _pattern_bounds(pattern)
    P, O = ctrl.sr_period, ctrl.sr_offset
    lo = _lower(d, lit)
    hits = set()
    for k in range(1, T * P // math.gcd(P, T) + 1):
        if lo <= (O + k * P) % T <= T - 1:
            hits.add((k - 1) % T + 1)
    return _make(T, d, P, O, tuple(sorted(hits)))


# ------------------------------------------------------------- next opportunity

@lru_cache(maxsize=65536)
def _search_table(T: int, d: int, P: int, O: int, literal: bool) -> tuple[tuple[int, ...], tuple[int, ...]]:
    A = eligible_multipliers(T, d, P, O, literal)
    ext = ([0] if A and A[-1] == T else []) + list(A) + [a + T for a in A]
    return tuple(ext), tuple(k * P for k in ext)


def next_opportunity(T: int, d: int, P: int, O: int, ready_slot: int, literal: bool = False) -> int:
    """First slot ``s >= ready_slot`` with ``s = O + m*P`` landing in UL."""
    ext, kp = _search_table(T, d, P, O, literal)
    if not ext:
        raise UnreachableSR(f"no SR opportunity lands in UL (T={T}, d={d}, P={P}, O={O})")
    q, r = divmod(ready_slot - O, T * P)
    k = ext[bisect.bisect_left(kp, r)]
    return O + (k + q * T) * P


def _sr_params(cfg: SystemConfig, grant_free: bool = False):
    p = cfg.pattern
    if grant_free:
        gf = cfg.grant_free
        P, O = gf.period, gf.offset
    else:
        P, O = cfg.ctrl.sr_period, cfg.ctrl.sr_offset
    return p.total_slots, p.dl_slots, P, O, p.literal_sr_bounds and p.is_tdd


def next_sr_slot(cfg: SystemConfig, ready_slot: int, grant_free: bool = False) -> int:
    T, d, P, O, lit = _sr_params(cfg, grant_free)
    return next_opportunity(T, d, P, O, ready_slot, lit)


def compute_w1(cfg: SystemConfig, o1: float, l1: float, grant_free: bool = False) -> float:
    """Wait from arrival ``o1`` to the start of the first usable SR slot.

    The UE may use the SR slot in which its preparation completes, so ``w1``
    is negative when preparation ends inside the arrival slot itself.
    """
    ready = floor_slots(o1 + l1, cfg.S)
    return next_sr_slot(cfg, ready, grant_free) * cfg.S - o1
