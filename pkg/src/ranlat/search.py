"""Configuration space: loading, pruning, two-phase optimization and find-all.

Every configuration is evaluated on the same packets and the same delay
draws (common random numbers), so differences between configurations are
never sampling noise.  For a fixed (slot, pattern, SR schedule) the end of
transmission depends on a packet only through its ready slot, periodically
in the SR/TDD common period, so one small table per schedule serves every
packet and every (a1, k2, control-symbol) setting at once.
"""
from __future__ import annotations

import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np
import yaml

from .batch import end_times, latency_totals
from .core import (EPS, FR_NUMEROLOGIES, MAX_SR_PERIOD, SYMBOLS_PER_SLOT, TDD_PERIODS_MS,
                   ControlAndTiming, GrantFreeConfig, LinkBudget, SlotGrid, SystemConfig,
                   TddPattern, capacities)
from .dists import DistSpec
from .errors import ConfigError, InfeasibleError, NoFeasibleConfiguration
from .profile import ProcessingProfile
from .sr import eligible_multipliers
from .stochastic import LatencyDistribution, latency_distribution
from .traffic import TrafficSpec, generate_trace


class Point(NamedTuple):
    """One configuration, fields in the search-file key order (also the tie-break order)."""
    slot_duration: float
    dl_ul_tx_period: int
    nof_dl_slots: int
    k2: int
    sr_period: int
    sr_offset: int
    pucch_st_sym: int
    pucch_nof_sym: int
    pdcch_nof_sym: int
    in_advance_submission: int


KNOBS = Point._fields

# search-file key -> (profile field, role)
PROCESSING_KEYS = {
    "ue_preparation_time_sr_mean": ("l1", "mean"),
    "ue_preparation_time_sr_std": ("l1", "std"),
    "gnb_processing_time_sr": ("p1", "value"),
    "mac_scheduling_time": ("p2", "value"),
    "gnb_phy_processing_time": ("p3", "value"),
    "radio_preparation_time": ("r1", "value"),
    "ue_l2_down_processing_time": ("l2", "value"),
    "ue_large_grant_processing_time": ("l2p", "value"),
    "ue_dl_processing_time": ("l3", "value"),
    "gnb_dl_processing_time": ("p5", "value"),
    "gnb_processing_time_l1_up_mean": ("p4", "scale"),
    "gnb_processing_time_l1_up_std": ("p4", "shape"),
    "gnb_processing_time_l1_up_loc": ("p4", "loc"),
}

SETTING_KEYS = ("no_mixed_slot", "frequency_range", "access_mode", "bandwidth_mhz", "mcs_index",
                "initial_grant_bytes", "packet_size_bytes", "inter_arrival_ms",
                "inter_arrival_std_ms", "inter_arrival_kind", "traffic_seed")


def expand_values(values) -> tuple:
    """Expand ``[1, 2, ..., 80]`` style lists (``..`` works too)."""
    out = []
    vals = list(values)
    for i, v in enumerate(vals):
        if isinstance(v, str) and re.fullmatch(r"\.{2,3}", v.strip()):
            if len(out) < 2 or i + 1 >= len(vals):
                raise ConfigError(f"ellipsis needs two leading values and an end: {values}")
            last, step, end = out[-1], out[-1] - out[-2], vals[i + 1]
            if step <= 0:
                raise ConfigError(f"ellipsis needs an increasing progression: {values}")
            n = int(round((end - last) / step))
            out.extend(last + k * step for k in range(1, n))
        else:
            out.append(v)
    return tuple(dict.fromkeys(out))


def _entry(raw):
    if isinstance(raw, dict):
        if "value" not in raw:
            raise ConfigError(f"entry {raw} has no 'value'")
        return raw["value"], bool(raw.get("optimize", False)), raw.get("discrete_values")
    return raw, False, None


@dataclass(frozen=True)
class SearchSpace:
    knobs: dict = field(default_factory=dict)          # knob -> tuple of candidates
    profile: ProcessingProfile = field(default_factory=ProcessingProfile)
    frequency_range: str = "FR1"
    access: str = "grant-based"
    link: LinkBudget = field(default_factory=LinkBudget)
    initial_grant: int = 128
    traffic: TrafficSpec = TrafficSpec.poisson(101.0, 64)

    def __post_init__(self):
        missing = [k for k in KNOBS if k not in self.knobs]
        if missing:
            raise ConfigError(f"search space lacks {', '.join(missing)}")
        for k in KNOBS:
            if not self.knobs[k]:
                raise ConfigError(f"{k} has no candidate values")
        if self.access not in ("grant-based", "grant-free"):
            raise ConfigError(f"unknown access mode {self.access!r}")
        if self.frequency_range not in FR_NUMEROLOGIES:
            raise ConfigError(f"unknown frequency range {self.frequency_range!r}")

    @classmethod
    def from_mapping(cls, data: dict) -> "SearchSpace":
        knobs, prof, settings = {}, {}, {}
        for key, raw in data.items():
            value, optimize, discrete = _entry(raw)
            if key in KNOBS:
                vals = expand_values(discrete) if optimize and discrete is not None else (value,)
                knobs[key] = tuple(float(v) if key == "slot_duration" else int(v) for v in vals)
            elif key in PROCESSING_KEYS:
                if optimize:
                    raise ConfigError(f"{key} is a processing delay and cannot be optimized")
                prof[key] = float(value)
            elif key in SETTING_KEYS:
                settings[key] = value
            else:
                raise ConfigError(f"unknown search-space key {key!r}")
        if settings.get("no_mixed_slot", True) is not True:
            raise ConfigError("mixed DL/UL slots are not modelled; set no_mixed_slot: true")
        profile = _profile_from(prof)
        kind = settings.get("inter_arrival_kind", "poisson")
        gap = float(settings.get("inter_arrival_ms", 101.0))
        size = int(settings.get("packet_size_bytes", 64))
        tseed = int(settings.get("traffic_seed", 0))
        if kind == "poisson":
            traffic = TrafficSpec.poisson(gap, size, seed=tseed)
        elif kind == "constant":
            traffic = TrafficSpec.constant(gap, size, seed=tseed)
        elif kind == "gaussian":
            traffic = TrafficSpec.gaussian(gap, float(settings.get("inter_arrival_std_ms", 0.0)),
                                           size, seed=tseed)
        else:
            raise ConfigError(f"unknown inter-arrival kind {kind!r}")
        link = LinkBudget(float(settings.get("bandwidth_mhz", 20)), int(settings.get("mcs_index", 10)))
        return cls(knobs, profile, str(settings.get("frequency_range", "FR1")),
                   str(settings.get("access_mode", "grant-based")), link,
                   int(settings.get("initial_grant_bytes", 128)), traffic)

    @classmethod
    def load(cls, path: str | Path) -> "SearchSpace":
        try:
            data = yaml.safe_load(Path(path).read_text())
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a key/value mapping")
        return cls.from_mapping(data)

    @classmethod
    def builtin(cls, name: str = "fr1_grant_based") -> "SearchSpace":
        return cls.from_mapping(builtin_mapping(name))

    def restrict(self, **fixed) -> "SearchSpace":
        """Copy with some knobs pinned to a value or a list of values."""
        knobs = dict(self.knobs)
        for k, v in fixed.items():
            if k not in KNOBS:
                raise ConfigError(f"unknown knob {k!r}")
            knobs[k] = tuple(v) if isinstance(v, (list, tuple)) else (v,)
        return replace(self, knobs=knobs)

    def with_profile(self, **delays) -> "SearchSpace":
        return replace(self, profile=self.profile.replace(**delays))

    @property
    def cartesian_size(self) -> int:
        return math.prod(len(self.knobs[k]) for k in KNOBS)

    def config(self, p: Point) -> SystemConfig:
        ctrl = ControlAndTiming(p.sr_period, p.sr_offset, p.pucch_st_sym, p.pucch_nof_sym,
                                p.pdcch_nof_sym, p.in_advance_submission, p.k2, self.initial_grant)
        gf = GrantFreeConfig(p.sr_period, p.sr_offset) if self.access == "grant-free" else None
        return SystemConfig(SlotGrid.from_slot_duration(p.slot_duration, self.frequency_range),
                            TddPattern(p.dl_ul_tx_period, p.nof_dl_slots), ctrl, self.link,
                            self.access, gf)


def builtin_mapping(name: str = "fr1_grant_based") -> dict:
    """Raw key/value mapping of a bundled search-space file."""
    try:
        text = resources.files("ranlat").joinpath("data", f"{name}.yaml").read_text()
    except FileNotFoundError:
        raise ConfigError(f"no built-in search space called {name!r}") from None
    return yaml.safe_load(text)


def _profile_from(prof: dict) -> ProcessingProfile:
    base = ProcessingProfile()
    kw = {}
    groups: dict[str, dict] = {}
    for key, v in prof.items():
        name, role = PROCESSING_KEYS[key]
        groups.setdefault(name, {})[role] = v
    for name, g in groups.items():
        cur = getattr(base, name)
        if name == "l1":
            kw[name] = DistSpec.gaussian(g.get("mean", cur.mean), g.get("std", cur.std))
        elif name == "p4":
            kw[name] = DistSpec.lognormal(g.get("shape", cur.shape), g.get("loc", cur.loc),
                                          g.get("scale", cur.scale))
        else:
            kw[name] = DistSpec.constant(g["value"])
    if "l2" in kw and "l2p" not in kw:
        kw["l2p"] = kw["l2"]
    return base.replace(**kw)


# ------------------------------------------------------------------ pruning

class Core(NamedTuple):
    """Schedule part of a configuration: slot duration, TDD pattern and SR slots."""
    slot_duration: float
    dl_ul_tx_period: int
    nof_dl_slots: int
    sr_period: int
    sr_offset: int


def _numerology(S: float) -> int | None:
    mu = round(-math.log2(S)) if S > 0 else -1
    return mu if mu >= 0 and math.isclose(S, 1.0 / (1 << mu)) else None


def _fixed(space: SearchSpace, name: str) -> float:
    return getattr(space.profile, name).lower_bound()


def radio_ok(space: SearchSpace, S: float, a1: int) -> bool:
    gnb = _fixed(space, "p2") + _fixed(space, "p3")
    return math.ceil(gnb / S - EPS) <= a1 + 1 and _fixed(space, "r1") < (a1 + 1) * S - gnb


def k2_min(space: SearchSpace, S: float, pdcch: int) -> int:
    return math.ceil((pdcch / SYMBOLS_PER_SLOT * S + _fixed(space, "l2")) / S - EPS)


def _rows(space: SearchSpace, S: float, fix: bool) -> list[tuple]:
    """Valid (k2, pucch start, pucch symbols, pdcch symbols, a1) for one slot duration."""
    kn = space.knobs
    st_vals, nof_vals, dc_vals = kn["pucch_st_sym"], kn["pucch_nof_sym"], kn["pdcch_nof_sym"]
    if fix:
        # Earlier control symbols only ever shorten w2/w4: keep the smallest.
        st_vals, nof_vals, dc_vals = (min(st_vals),), (min(nof_vals),), (min(dc_vals),)
    a1s = [a for a in sorted(kn["in_advance_submission"]) if a >= 0 and radio_ok(space, S, a)]
    rows = []
    for k2 in sorted(kn["k2"]):
        for st in sorted(st_vals):
            for nof in sorted(nof_vals):
                if st < 0 or nof < 1 or st + nof > SYMBOLS_PER_SLOT:
                    continue
                for dc in sorted(dc_vals):
                    if dc not in (1, 2, 3) or k2 < k2_min(space, S, dc):
                        continue
                    rows.extend((k2, st, nof, dc, a1) for a1 in a1s)
    return rows


def _cores(space: SearchSpace) -> Iterable[Core]:
    kn = space.knobs
    allowed = FR_NUMEROLOGIES[space.frequency_range]
    for S in sorted(kn["slot_duration"]):
        mu = _numerology(S)
        if mu is None or mu not in allowed:
            continue
        for T in sorted(kn["dl_ul_tx_period"]):
            if not any(math.isclose(T * S, p) for p in TDD_PERIODS_MS):
                continue
            for d in sorted(kn["nof_dl_slots"]):
                if not 1 <= d < T:
                    continue
                for P in sorted(kn["sr_period"]):
                    if P < 1 or P > MAX_SR_PERIOD[mu]:
                        continue
                    for O in sorted(kn["sr_offset"]):
                        if 0 <= O < min(P, T) and eligible_multipliers(T, d, P, O):
                            yield Core(S, T, d, P, O)


def _groups(space: SearchSpace, fix: bool):
    rows_by_s = {}
    for core in _cores(space):
        S = core.slot_duration
        if S not in rows_by_s:
            rows_by_s[S] = _rows(space, S, fix)
        if rows_by_s[S]:
            yield core, rows_by_s[S]


def _point(core: Core, row: tuple) -> Point:
    k2, st, nof, dc, a1 = row
    S, T, d, P, O = core
    return Point(S, T, d, k2, P, O, st, nof, dc, a1)


def _split(p: Point) -> tuple[Core, tuple]:
    return (Core(p.slot_duration, p.dl_ul_tx_period, p.nof_dl_slots, p.sr_period, p.sr_offset),
            (p.k2, p.pucch_st_sym, p.pucch_nof_sym, p.pdcch_nof_sym, p.in_advance_submission))


def enumerate_valid(space: SearchSpace, fix_monotone: bool = False) -> Iterable[Point]:
    """Every configuration passing the validity predicates, grouped by schedule.

    ``fix_monotone`` keeps only the smallest control-symbol settings, which
    is what the optimizer searches.
    """
    for core, rows in _groups(space, fix_monotone):
        for row in rows:
            yield _point(core, row)


def count_valid(space: SearchSpace, fix_monotone: bool = False) -> int:
    return sum(len(rows) for _, rows in _groups(space, fix_monotone))


def sample_valid(space: SearchSpace, n: int, seed: int = 0,
                 fix_monotone: bool = False) -> list[Point]:
    """Uniform sample (without replacement) of valid configurations, in enumeration order."""
    groups = list(_groups(space, fix_monotone))
    sizes = np.array([len(rows) for _, rows in groups], dtype=np.int64)
    total = int(sizes.sum())
    if total == 0:
        return []
    rng = np.random.Generator(np.random.Philox(seed))
    picks = np.sort(rng.choice(total, size=min(n, total), replace=False))
    starts = np.cumsum(sizes) - sizes
    which = np.searchsorted(starts, picks, side="right") - 1
    return [_point(groups[g][0], groups[g][1][int(k - starts[g])]) for g, k in zip(which, picks)]


def violations(space: SearchSpace, p: Point) -> list[str]:
    """Names of the validity predicates ``p`` fails (empty when valid)."""
    out = []
    S, T, d = p.slot_duration, p.dl_ul_tx_period, p.nof_dl_slots
    mu = _numerology(S)
    if mu is None or mu not in FR_NUMEROLOGIES[space.frequency_range]:
        return ["numerology"]
    if not any(math.isclose(T * S, q) for q in TDD_PERIODS_MS):
        out.append("tdd-period")
    if not 1 <= d < T:
        return out + ["dl-slots"]
    if p.sr_period > MAX_SR_PERIOD[mu]:
        out.append("sr-period")
    if not 0 <= p.sr_offset < min(p.sr_period, T):
        out.append("sr-offset")
    elif not eligible_multipliers(T, d, p.sr_period, p.sr_offset):
        out.append("sr-unreachable")
    if not radio_ok(space, S, p.in_advance_submission):
        out.append("radio")
    if p.pucch_st_sym + p.pucch_nof_sym > SYMBOLS_PER_SLOT:
        out.append("pucch")
    if p.k2 < k2_min(space, S, p.pdcch_nof_sym):
        out.append("k2")
    return out


# ------------------------------------------------------------------ objectives

@dataclass(frozen=True)
class Objective:
    """mean, min, max or a nearest-rank percentile ("p99.99")."""
    kind: str = "mean"
    q: float = 0.0

    @classmethod
    def parse(cls, text: str | "Objective") -> "Objective":
        if isinstance(text, Objective):
            return text
        t = str(text).strip().lower()
        if t in ("mean", "avg", "average"):
            return cls("mean")
        if t in ("min", "max"):
            return cls(t)
        m = re.fullmatch(r"(?:p|percentile\()\s*([0-9.]+)\)?", t)
        if m and 0 <= float(m.group(1)) <= 100:
            return cls("percentile", float(m.group(1)))
        raise ConfigError(f"unknown objective {text!r}")

    def __str__(self) -> str:
        return f"p{self.q:g}" if self.kind == "percentile" else self.kind

    def of(self, dist: LatencyDistribution) -> float:
        if not len(dist):
            return math.inf
        if self.kind == "mean":
            return dist.mean
        if self.kind == "min":
            return dist.min
        if self.kind == "max":
            return dist.max
        return dist.percentile(self.q)

    def rows(self, totals: np.ndarray) -> np.ndarray:
        """Objective of each row of a (configs, packets) matrix."""
        n = totals.shape[1]
        if self.kind == "mean":
            return totals.mean(axis=1)
        if self.kind == "min":
            return totals.min(axis=1)
        if self.kind == "max":
            return totals.max(axis=1)
        k = max(1, math.ceil(self.q / 100 * n - 1e-9)) - 1
        return np.partition(totals, k, axis=1)[:, k]


@dataclass(frozen=True)
class ReliabilityTarget:
    latency_bound: float
    reliability: float

    def __post_init__(self):
        if not 0 < self.reliability <= 100:
            raise ConfigError("reliability must be in (0, 100]")
        if self.latency_bound <= 0:
            raise ConfigError("latency bound must be > 0")

    @classmethod
    def parse(cls, text: str) -> "ReliabilityTarget":
        m = re.fullmatch(r"\s*([0-9.]+)\s*ms\s*@\s*([0-9.]+)\s*%?\s*", text)
        if not m:
            raise ConfigError(f"target must look like '1ms@99.99', got {text!r}")
        return cls(float(m.group(1)), float(m.group(2)))

    def __str__(self) -> str:
        return f"{self.latency_bound:g}ms@{self.reliability:g}"


def reliability_check(dist: LatencyDistribution, target: ReliabilityTarget) -> tuple[bool, float]:
    achieved = dist.percentile(target.reliability)
    return achieved <= target.latency_bound + 1e-12, achieved


# ------------------------------------------------------------------ evaluation

_SYSTEM = ("l2", "l2p", "p1", "p2", "p3", "r1")


class _Packets:
    """Shared packets and delay draws, plus per-slot-duration slot indices."""

    def __init__(self, space: SearchSpace, n: int, seed: int, direction: str):
        trace = generate_trace(space.traffic.with_count(n))
        self.o1 = np.asarray(trace.arrivals)
        self.sizes = np.asarray(trace.sizes, dtype=np.int64)
        raw = space.profile.sample(n, seed)
        self.v = {f: (float(raw[f][0]) if getattr(space.profile, f).is_constant and n else raw[f])
                  for f in raw}
        self.direction = direction
        self.tabulable = all(np.ndim(self.v[f]) == 0 for f in _SYSTEM)
        self.extra = (self.v["l3"] if direction == "dl" else self.v["p4"]) - self.o1
        self._idx = {}

    def index(self, S: float) -> np.ndarray:
        if S not in self._idx:
            if self.direction == "dl":
                self._idx[S] = np.ceil((self.o1 + self.v["p5"]) / S - EPS).astype(np.int64)
            else:
                self._idx[S] = np.floor((self.o1 + self.v["l1"]) / S + EPS).astype(np.int64)
        return self._idx[S]


def _core_values(space: SearchSpace, pk: _Packets, core: Core, rows, objective: Objective) -> np.ndarray:
    """Objective value of each row of one schedule (inf when infeasible)."""
    if not len(pk.o1):
        return np.full(len(rows), math.inf)
    cfg0 = space.config(_point(core, rows[0]))
    S = core.slot_duration
    gb = space.access == "grant-based"
    if pk.direction == "dl":
        bi = capacities(cfg0)[1]
    else:
        bi = capacities(cfg0)[0]
    single_class = (pk.sizes.max() <= space.initial_grant if gb and pk.direction == "ul"
                    else bi > 0 and len(np.unique(-(-pk.sizes // bi))) == 1)
    if not (pk.tabulable and single_class):
        return np.array([_slow_value(space, pk, _point(core, r), objective) for r in rows])
    p1 = pk.v["p1"]
    keys = []
    for k2, st, nof, dc, a1 in rows:
        if pk.direction == "dl":
            keys.append((a1,))
        elif gb:
            c = math.ceil(((st + nof) / SYMBOLS_PER_SLOT * S + p1) / S - EPS)
            keys.append((a1, k2, c))
        else:
            keys.append(())
    uniq = sorted(set(keys))
    col = {k: i for i, k in enumerate(uniq)}
    L = core.dl_ul_tx_period if pk.direction == "dl" else math.lcm(core.dl_ul_tx_period, core.sr_period)
    r = np.arange(L, dtype=np.int64)[None, :]
    size = int(pk.sizes[0])
    try:
        if pk.direction == "dl":
            a1 = np.array([k[0] for k in uniq])[:, None]
            end, ok = end_times(cfg0, r, size, pk.v, "dl", a1=a1)
        elif gb:
            arr = np.array(uniq)
            end, ok = end_times(cfg0, r, size, pk.v, "ul", a1=arr[:, :1], k2=arr[:, 1:2], c=arr[:, 2:3])
        else:
            end, ok = end_times(cfg0, r, size, pk.v, "ul")
    except (ConfigError, InfeasibleError):
        return np.full(len(rows), math.inf)
    end = np.broadcast_to(end, (len(uniq), L))
    good = np.broadcast_to(ok, (len(uniq), L)).all(axis=1)
    idx = pk.index(S)
    q = idx % L
    base = (idx - q) * S + pk.extra
    vals = objective.rows(end[:, q] + base)
    vals = np.where(good, vals, math.inf)
    return np.array([vals[col[k]] for k in keys])


def _slow_value(space, pk, p: Point, objective: Objective) -> float:
    try:
        tot, ok = latency_totals(space.config(p), pk.o1, pk.sizes, pk.v, pk.direction)
    except (ConfigError, InfeasibleError):
        return math.inf
    return objective.of(LatencyDistribution(tot[ok]))


_WORKER_PACKETS: dict = {}


def _eval_chunk(args):
    space, n, seed, direction, objective, chunk = args
    key = (repr(space.profile), repr(space.traffic), n, seed, direction)
    pk = _WORKER_PACKETS.get(key)
    if pk is None:
        _WORKER_PACKETS.clear()
        pk = _WORKER_PACKETS[key] = _Packets(space, n, seed, direction)
    return [_core_values(space, pk, core, rows, objective) for core, rows in chunk]


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("RANLAT_WORKERS", "1")))
    except ValueError:
        return 1


def _evaluate(space, groups, n, seed, direction, objective, workers) -> list[np.ndarray]:
    workers = workers or default_workers()
    if workers <= 1 or len(groups) < 2:
        return _eval_chunk((space, n, seed, direction, objective, groups))
    # Contiguous chunks keep the merge order identical to the serial order.
    bounds = np.linspace(0, len(groups), min(workers * 4, len(groups)) + 1).astype(int)
    chunks = [groups[a:b] for a, b in zip(bounds, bounds[1:])]
    out = []
    with ProcessPoolExecutor(max_workers=workers) as ex:
        for part in ex.map(_eval_chunk, [(space, n, seed, direction, objective, c) for c in chunks]):
            out.extend(part)
    return out


def _ranked(groups, values) -> list[tuple[float, Point]]:
    out = [(float(v), _point(core, row)) for (core, rows), vals in zip(groups, values)
           for row, v in zip(rows, vals)]
    out.sort()
    return out


def _regroup(points: Iterable[Point]):
    by_core: dict[Core, list] = {}
    for p in points:
        core, row = _split(p)
        by_core.setdefault(core, []).append(row)
    return [(c, sorted(r)) for c, r in sorted(by_core.items())]


@dataclass
class OptimizeResult:
    point: Point
    config: SystemConfig
    objective: Objective
    value: float
    distribution: LatencyDistribution
    n_valid: int
    n_fine: int
    ranking: list = field(default_factory=list, repr=False)   # fine-phase (value, Point)


def optimize(space: SearchSpace, objective="mean", n_coarse: int = 500, n_fine: int = 10000,
             seed: int = 0, exact: bool = False, workers: int | None = None,
             keep_fraction: float = 0.1, fix_monotone: bool = True,
             direction: str = "ul") -> OptimizeResult:
    """Two-phase search: rank every valid configuration on ``n_coarse`` packets,
    re-evaluate the best ``keep_fraction`` on ``n_fine`` packets.

    ``exact`` skips the coarse phase.  Ties are broken by the configuration
    key order, so the result does not depend on ``workers``.
    """
    objective = Objective.parse(objective)
    groups = list(_groups(space, fix_monotone))
    n_valid = sum(len(r) for _, r in groups)
    if not n_valid:
        raise NoFeasibleConfiguration("no configuration in the search space passes the validity checks")
    if not exact:
        coarse = _ranked(groups, _evaluate(space, groups, n_coarse, seed, direction, objective, workers))
        keep = max(1, math.ceil(keep_fraction * len(coarse)))
        groups = _regroup(p for v, p in coarse[:keep] if math.isfinite(v))
    fine = _ranked(groups, _evaluate(space, groups, n_fine, seed, direction, objective, workers))
    if not fine or not math.isfinite(fine[0][0]):
        raise NoFeasibleConfiguration("every valid configuration failed under the processing profile")
    value, best = fine[0]
    cfg = space.config(best)
    dist = latency_distribution(cfg, space.profile, space.traffic.with_count(n_fine),
                                seed=seed, direction=direction)
    return OptimizeResult(best, cfg, objective, value, dist, n_valid, len(fine), fine)


@dataclass
class FindAllResult:
    matches: list            # (Point, achieved latency at the target reliability)
    evaluated: int
    target: ReliabilityTarget

    @property
    def fraction(self) -> float:
        return len(self.matches) / self.evaluated if self.evaluated else 0.0


def find_all(space: SearchSpace, target: ReliabilityTarget, n_packets: int = 10000,
             seed: int = 0, points: Iterable[Point] | None = None, workers: int | None = None,
             direction: str = "ul") -> FindAllResult:
    """Every valid configuration (or every one of ``points``) meeting ``target``.

    No control symbols are pre-fixed and no coarse filtering happens here.
    """
    if points is None:
        groups = list(_groups(space, False))
    else:
        pts = list(points)
        bad = [p for p in pts if violations(space, p)]
        if bad:
            raise ConfigError(f"{len(bad)} given configurations are not valid, e.g. {bad[0]}")
        groups = _regroup(pts)
    objective = Objective("percentile", target.reliability)
    values = _evaluate(space, groups, n_packets, seed, direction, objective, workers)
    matches = [(p, v) for v, p in _ranked(groups, values) if v <= target.latency_bound + 1e-12]
    matches.sort(key=lambda m: m[0])
    return FindAllResult(matches, sum(len(r) for _, r in groups), target)
