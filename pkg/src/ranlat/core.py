"""Domain types, slot arithmetic and per-slot byte capacity."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .errors import ConfigError

# Tolerance (in slots) used when turning a duration into a slot count.  Keeps
# products such as 3 * (1/14) from drifting across an integer boundary.
EPS = 1e-9

SYMBOLS_PER_SLOT = 14

# Standard SR periodicities in slots and the largest one allowed per numerology.
SR_PERIODS = (1, 2, 4, 5, 8, 10, 16, 20, 40, 80, 160, 320, 640)
MAX_SR_PERIOD = {0: 80, 1: 160, 2: 320, 3: 640, 4: 640, 5: 640, 6: 640}

# Allowed TDD transmission periodicities in ms.
TDD_PERIODS_MS = (0.5, 0.625, 1.0, 1.25, 2.0, 2.5, 3.0, 4.0, 5.0, 10.0)

FR_NUMEROLOGIES = {"FR1": (0, 1, 2), "FR2": (2, 3, 4, 5, 6)}


def ceil_slots(duration: float, slot: float) -> int:
    return math.ceil(duration / slot - EPS)


def floor_slots(t: float, slot: float) -> int:
    return math.floor(t / slot + EPS)


class Duplexing(str, enum.Enum):
    TDD = "tdd"
    MINI_SLOT = "mini-slot"
    FDD = "fdd"


class SlotKind(str, enum.Enum):
    DL = "DL"
    UL = "UL"


@dataclass(frozen=True, slots=True)
class SlotGrid:
    numerology: int
    frequency_range: str = "FR1"

    def __post_init__(self):
        allowed = FR_NUMEROLOGIES.get(self.frequency_range)
        if allowed is None:
            raise ConfigError(f"unknown frequency range {self.frequency_range!r}")
        if self.numerology not in allowed:
            raise ConfigError(
                f"numerology {self.numerology} not allowed in {self.frequency_range}")

    @property
    def slot_duration(self) -> float:
        return 1.0 / (1 << self.numerology)

    @classmethod
    def from_slot_duration(cls, s: float, frequency_range: str | None = None) -> "SlotGrid":
        mu = round(-math.log2(s))
        if not math.isclose(1.0 / (1 << max(mu, 0)), s) or mu < 0:
            raise ConfigError(f"slot duration {s} ms is not 1/2^mu")
        if frequency_range is None:
            frequency_range = "FR1" if mu <= 2 else "FR2"
        return cls(mu, frequency_range)


@dataclass(frozen=True, slots=True)
class MiniSlotSplit:
    """Symbol split of a mini-slot TDD slot (1-based symbol indices).

    ``sy_fdl`` is used as the count of DL symbols when sizing DL capacity.
    ``guard_check=False`` admits overlapping DL/UL parts, which is only useful
    to compare against FDD.
    """
    sy_fdl: int
    sy_ldl: int
    sy_ful: int
    sy_lul: int
    guard_check: bool = True

    def __post_init__(self):
        for v in (self.sy_fdl, self.sy_ldl, self.sy_ful, self.sy_lul):
            if not 1 <= v <= SYMBOLS_PER_SLOT:
                raise ConfigError(f"symbol index {v} outside 1..14")
        if self.sy_ful > self.sy_lul:
            raise ConfigError("first UL symbol after last UL symbol")
        if self.guard_check and not self.sy_ldl < self.sy_ful:
            raise ConfigError("DL symbols must end before the first UL symbol")


@dataclass(frozen=True, slots=True)
class TddPattern:
    """Slot pattern.  Canonical indexing: DL = {0..d-1}, UL = {d..T-1}.

    Mini-slot and FDD patterns use d = 0: every slot has both DL and UL
    capability.  ``literal_sr_bounds`` keeps SR opportunities to {d+1..T-1}.
    """
    total_slots: int
    dl_slots: int
    duplexing: Duplexing = Duplexing.TDD
    split: MiniSlotSplit | None = None
    literal_sr_bounds: bool = False

    def __post_init__(self):
        object.__setattr__(self, "duplexing", Duplexing(self.duplexing))
        if self.duplexing is Duplexing.TDD:
            if not 0 < self.dl_slots < self.total_slots:
                raise ConfigError(
                    f"need 0 < d < T, got d={self.dl_slots}, T={self.total_slots}")
        else:
            if self.total_slots < 1 or self.dl_slots != 0:
                raise ConfigError("mini-slot/FDD patterns use T >= 1 and d = 0")
        if (self.split is not None) != (self.duplexing is Duplexing.MINI_SLOT):
            raise ConfigError("a symbol split is required iff duplexing is mini-slot")

    @property
    def ul_slots(self) -> int:
        return self.total_slots - self.dl_slots

    @property
    def is_tdd(self) -> bool:
        return self.duplexing is Duplexing.TDD


@dataclass(frozen=True, slots=True)
class ControlAndTiming:
    sr_period: int
    sr_offset: int
    pucch_start: int = 13
    pucch_symbols: int = 1
    pdcch_symbols: int = 1
    advance_slots: int = 1
    k2: int | None = None
    initial_grant: int = 128

    def __post_init__(self):
        if self.sr_period < 1:
            raise ConfigError("SR period must be >= 1 slot")
        if self.sr_offset < 0:
            raise ConfigError("SR offset must be >= 0")
        if self.pucch_start < 0 or self.pucch_symbols < 1:
            raise ConfigError("bad PUCCH placement")
        if self.pucch_start + self.pucch_symbols > SYMBOLS_PER_SLOT:
            raise ConfigError(
                f"PUCCH start {self.pucch_start} + {self.pucch_symbols} symbols exceeds 14")
        if self.pdcch_symbols not in (1, 2, 3):
            raise ConfigError(f"PDCCH symbols must be 1..3, got {self.pdcch_symbols}")
        if self.advance_slots < 0:
            raise ConfigError("advance slots must be >= 0")
        if self.k2 is not None and self.k2 < 0:
            raise ConfigError("k2 must be >= 0")
        if self.initial_grant < 1:
            raise ConfigError("initial grant must be >= 1 byte")


@dataclass(frozen=True)
class NrTables:
    nrb: dict
    mcs: dict

    def n_rb(self, bandwidth: float, mu: int) -> int:
        try:
            return self.nrb[(bandwidth, mu)]
        except KeyError:
            raise ConfigError(f"no N_RB entry for {bandwidth} MHz at numerology {mu}") from None

    def modulation(self, mcs_index: int) -> tuple[int, int]:
        try:
            return self.mcs[mcs_index]
        except KeyError:
            raise ConfigError(f"unknown MCS index {mcs_index}") from None


def load_tables(path: str | Path | None = None) -> NrTables:
    if path is None:
        text = resources.files("ranlat").joinpath("data/nr_tables.txt").read_text()
    else:
        text = Path(path).read_text()
    nrb, mcs = {}, {}
    section = None
    header_seen = False
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            section, header_seen = line.strip("[]"), False
            continue
        if not header_seen:
            header_seen = True
            continue
        a, b, c = (x.strip() for x in line.split(","))
        if section == "nrb":
            bw = float(a)
            nrb[(int(bw) if bw.is_integer() else bw, int(b))] = int(c)
        elif section == "mcs":
            mcs[int(a)] = (int(b), int(c))
    return NrTables(nrb, mcs)


@lru_cache(maxsize=1)
def default_tables() -> NrTables:
    return load_tables()


@dataclass(frozen=True, slots=True)
class LinkBudget:
    bandwidth_mhz: float = 20
    mcs_index: int = 10
    tables: NrTables = field(default_factory=default_tables, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class GrantFreeConfig:
    period: int
    offset: int


@dataclass(frozen=True, slots=True)
class SystemConfig:
    grid: SlotGrid
    pattern: TddPattern
    ctrl: ControlAndTiming
    link: LinkBudget = field(default_factory=LinkBudget)
    access: str = "grant-based"
    grant_free: GrantFreeConfig | None = None

    def __post_init__(self):
        if self.access not in ("grant-based", "grant-free"):
            raise ConfigError(f"unknown access mode {self.access!r}")
        p, c = self.pattern, self.ctrl
        if p.is_tdd and c.sr_offset >= p.total_slots:
            raise ConfigError(f"SR offset {c.sr_offset} must be < T={p.total_slots}")
        if not p.is_tdd and c.sr_offset >= max(c.sr_period, p.total_slots):
            raise ConfigError("SR offset must be < SR period")
        if p.split is not None:
            sp = p.split
            # PUCCH start is 0-based, split indices are 1-based.
            if c.pucch_start < sp.sy_ful - 1:
                raise ConfigError("PUCCH must start no earlier than the first UL symbol")
            if c.pucch_start + c.pucch_symbols > sp.sy_lul:
                raise ConfigError("PUCCH must end within the UL symbols")
            if c.pdcch_symbols > sp.sy_ldl:
                raise ConfigError("PDCCH must fit in the DL symbols")
        if self.access == "grant-free":
            if self.grant_free is None:
                object.__setattr__(self, "grant_free", GrantFreeConfig(c.sr_period, c.sr_offset))
            if self.grant_free.period < 1 or self.grant_free.offset < 0:
                raise ConfigError("bad grant-free schedule")

    @property
    def S(self) -> float:
        return self.grid.slot_duration

    @property
    def T(self) -> int:
        return self.pattern.total_slots

    @property
    def d(self) -> int:
        return self.pattern.dl_slots


def tdd_config(S: float, T: int, d: int, sr_period: int, sr_offset: int, **ctrl) -> SystemConfig:
    """Convenience constructor for TDD-common configurations."""
    link = ctrl.pop("link", None) or LinkBudget()
    access = ctrl.pop("access", "grant-based")
    gf = ctrl.pop("grant_free", None)
    return SystemConfig(SlotGrid.from_slot_duration(S), TddPattern(T, d),
                        ControlAndTiming(sr_period, sr_offset, **ctrl), link, access, gf)


# ---------------------------------------------------------------- slot calendar

def slot_kind(cfg: SystemConfig, slot: int) -> SlotKind:
    if slot < 0:
        raise ValueError("slot index must be >= 0")
    if not cfg.pattern.is_tdd:
        return SlotKind.UL
    return SlotKind.DL if slot % cfg.T < cfg.d else SlotKind.UL


def has_dl(cfg: SystemConfig, slot: int) -> bool:
    return not cfg.pattern.is_tdd or slot % cfg.T < cfg.d


def has_ul(cfg: SystemConfig, slot: int) -> bool:
    return not cfg.pattern.is_tdd or slot % cfg.T >= cfg.d


def next_dl(cfg: SystemConfig, n: int) -> int:
    if not cfg.pattern.is_tdd:
        return n
    pos = n % cfg.T
    return n if pos < cfg.d else n + cfg.T - pos


def next_ul(cfg: SystemConfig, n: int) -> int:
    if not cfg.pattern.is_tdd:
        return n
    pos = n % cfg.T
    return n + cfg.d - pos if pos < cfg.d else n


def nth_ul(cfg: SystemConfig, start: int, k: int) -> int:
    """k-th (1-based) UL-capable slot at or after ``start``."""
    start = next_ul(cfg, start)
    if not cfg.pattern.is_tdd:
        return start + k - 1
    T, d = cfg.T, cfg.d
    idx = start % T - d + k - 1
    return start - start % T + (idx // (T - d)) * T + d + idx % (T - d)


def nth_dl(cfg: SystemConfig, start: int, k: int) -> int:
    start = next_dl(cfg, start)
    if not cfg.pattern.is_tdd:
        return start + k - 1
    T, d = cfg.T, cfg.d
    idx = start % T + k - 1
    return start - start % T + (idx // d) * T + idx % d


def ul_tail(cfg: SystemConfig) -> float:
    """Time from the start of a UL slot to the end of its data symbols (w6)."""
    sp = cfg.pattern.split
    return cfg.S if sp is None else sp.sy_lul / SYMBOLS_PER_SLOT * cfg.S


def dl_tail(cfg: SystemConfig) -> float:
    sp = cfg.pattern.split
    return cfg.S if sp is None else sp.sy_ldl / SYMBOLS_PER_SLOT * cfg.S


# ---------------------------------------------------------------- capacity

def _bytes(n_rb: int, qm: int, cr1024: int, symbols: int) -> int:
    if symbols <= 0:
        return 0
    # bits = N_RB * 12 * Qm * (cr/1024) * symbols, floor-converted to bytes
    return (n_rb * 12 * qm * cr1024 * symbols) // (1024 * 8)


def ul_bytes_per_slot(link: LinkBudget, grid: SlotGrid, ctrl: ControlAndTiming,
                      pattern: TddPattern | None = None) -> int:
    n_rb = link.tables.n_rb(link.bandwidth_mhz, grid.numerology)
    qm, cr = link.tables.modulation(link.mcs_index)
    if pattern is not None and pattern.split is not None:
        sp = pattern.split
        symbols = sp.sy_lul - sp.sy_ful + 1 - ctrl.pucch_symbols
    else:
        symbols = SYMBOLS_PER_SLOT - ctrl.pucch_symbols
    return _bytes(n_rb, qm, cr, symbols)


def dl_bytes_per_slot(link: LinkBudget, grid: SlotGrid, ctrl: ControlAndTiming,
                      pattern: TddPattern | None = None) -> int:
    if ctrl.pdcch_symbols not in (1, 2, 3):
        raise ConfigError("PDCCH symbols must be 1..3")
    n_rb = link.tables.n_rb(link.bandwidth_mhz, grid.numerology)
    qm, cr = link.tables.modulation(link.mcs_index)
    if pattern is not None and pattern.split is not None:
        symbols = pattern.split.sy_fdl - ctrl.pdcch_symbols
    else:
        symbols = SYMBOLS_PER_SLOT - ctrl.pdcch_symbols
    return _bytes(n_rb, qm, cr, symbols)


@lru_cache(maxsize=4096)
def capacities(cfg: SystemConfig) -> tuple[int, int]:
    """(Bi_UL, Bi_DL) for a configuration."""
    return (ul_bytes_per_slot(cfg.link, cfg.grid, cfg.ctrl, cfg.pattern),
            dl_bytes_per_slot(cfg.link, cfg.grid, cfg.ctrl, cfg.pattern))


# ---------------------------------------------------------------- results

# Components that add up to the total.  w2 and w4 are reported for reference:
# they are contained in w3 and w5 respectively.
ADDITIVE = ("w1", "w3", "w5", "w6", "w3p", "w5p", "w6p", "w7", "u1", "u2", "u3", "u4")


@dataclass(frozen=True)
class LatencyBreakdown:
    components: dict
    total: float

    def __getitem__(self, key: str) -> float:
        return self.components[key]

    def additive_sum(self) -> float:
        return sum(v for k, v in self.components.items() if k in ADDITIVE)
