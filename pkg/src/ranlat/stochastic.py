"""Monte-Carlo latency distributions, Wasserstein distance and fitting."""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import wasserstein_distance

from .batch import latency_totals
from .core import SystemConfig
from .dists import DistSpec, draw  # noqa: F401  (re-exported)
from .errors import ConfigError, InfeasibleError, NoFeasibleConfiguration
from .fsm import packet_train_latency
from .profile import FIELDS, ProcessingProfile, ProfileDraw, draw_at
from .traffic import PacketTrace, TrafficSpec, generate_trace


@dataclass
class LatencyDistribution:
    samples: np.ndarray
    errored: int = 0
    _sorted: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        self._sorted = np.sort(self.samples)

    def __len__(self) -> int:
        return self.samples.size

    def _need(self):
        if not self.samples.size:
            raise ValueError("empty distribution")

    @property
    def min(self) -> float:
        self._need()
        return float(self._sorted[0])

    @property
    def max(self) -> float:
        self._need()
        return float(self._sorted[-1])

    @property
    def mean(self) -> float:
        self._need()
        return float(self.samples.mean())

    def percentile(self, q: float) -> float:
        """Nearest-rank percentile: the smallest sample with at least q% at or below it."""
        self._need()
        if not 0 <= q <= 100:
            raise ValueError("percentile must be in [0, 100]")
        rank = max(1, math.ceil(q / 100 * len(self) - 1e-9))
        return float(self._sorted[rank - 1])

    def reliability(self, bound_ms: float) -> float:
        """Fraction of packets with latency at or below ``bound_ms``."""
        self._need()
        return float(np.searchsorted(self._sorted, bound_ms + 1e-12, side="right") / len(self))

    def cdf(self) -> list[tuple[float, float]]:
        vals, counts = np.unique(self._sorted, return_counts=True)
        return list(zip(vals.tolist(), (np.cumsum(counts) / len(self)).tolist()))

    def summary(self) -> dict[str, float]:
        return {"count": len(self), "min": self.min, "mean": self.mean, "max": self.max,
                "p50": self.percentile(50), "p90": self.percentile(90),
                "p99": self.percentile(99), "p99.99": self.percentile(99.99)}


def _compact(samples: dict, profile: ProcessingProfile) -> dict:
    # Constant delays stay scalars so the batch engine broadcasts them.
    return {f: (float(samples[f][0]) if getattr(profile, f).is_constant and len(samples[f]) else samples[f])
            for f in FIELDS}


def latency_distribution(cfg: SystemConfig, profile: ProcessingProfile | ProfileDraw,
                         traffic: PacketTrace | TrafficSpec, n_packets: int | None = None,
                         seed: int = 0, direction: str = "ul", train: bool = False,
                         return_breakdowns: bool = False):
    """Latency of every packet in ``traffic`` with delays drawn from ``profile``.

    By default each packet is treated in isolation, which is exact whenever
    packets do not overlap in the buffer.  ``train=True`` runs the shared
    buffer model instead.  Packets whose draw makes the configuration
    infeasible are excluded and counted in ``errored``.
    """
    if isinstance(profile, ProfileDraw):
        profile = ProcessingProfile.constant(profile)
    if isinstance(traffic, TrafficSpec):
        traffic = generate_trace(traffic.with_count(n_packets if n_packets is not None else traffic.count))
    elif n_packets is not None:
        traffic = traffic.head(n_packets)
    n = len(traffic)
    samples = profile.sample(n, seed)
    breakdowns = None
    if train or return_breakdowns:
        draws = [draw_at(samples, i) for i in range(n)]
        if train:
            breakdowns = packet_train_latency(cfg, draws, traffic, direction)
        else:
            from .duplex import packet_latency
            breakdowns = []
            for d, o1, p in zip(draws, traffic.arrivals, traffic.sizes):
                try:
                    breakdowns.append(packet_latency(cfg, d, o1, p, direction))
                except InfeasibleError as e:
                    if e.kind == "unreachable-SR":
                        raise
                    breakdowns.append(None)
                except ConfigError:
                    breakdowns.append(None)
        totals = np.array([b.total if b is not None else np.nan for b in breakdowns])
        ok = ~np.isnan(totals)
        breakdowns = [b for b in breakdowns if b is not None]
    else:
        totals, ok = latency_totals(cfg, np.asarray(traffic.arrivals), np.asarray(traffic.sizes),
                                    _compact(samples, profile), direction)
    errored = int(n - ok.sum())
    if errored:
        warnings.warn(f"{errored} of {n} packets infeasible under their draws; excluded", stacklevel=2)
    dist = LatencyDistribution(totals[ok], errored)
    return (dist, breakdowns) if return_breakdowns else dist


def wasserstein(a, b) -> float:
    """W1 distance after min-max normalizing both sample sets with shared bounds."""
    a = np.asarray(getattr(a, "samples", a), dtype=float)
    b = np.asarray(getattr(b, "samples", b), dtype=float)
    if not a.size or not b.size:
        raise ValueError("both distributions must be non-empty")
    lo = min(a.min(), b.min())
    span = max(a.max(), b.max()) - lo
    if span == 0:
        return 0.0
    return float(wasserstein_distance((a - lo) / span, (b - lo) / span))


def frange(lo: float, hi: float, step: float) -> list[float]:
    n = int(round((hi - lo) / step))
    return [round(lo + i * step, 10) for i in range(n + 1)]


DEFAULT_MEANS = frange(0.5, 3.5, 0.05)
DEFAULT_STDS = frange(0.05, 0.8, 0.05)


@dataclass(frozen=True)
class FitResult:
    params: tuple[float, float]
    distance: float
    variable: str
    kind: str

    def spec(self, scale: float = 1.0) -> DistSpec:
        if self.kind == "gaussian":
            return DistSpec.gaussian(*self.params)
        return DistSpec.lognormal(self.params[0], self.params[1], scale)


def fit_learned_distribution(cfg: SystemConfig, observed, traffic: PacketTrace | TrafficSpec,
                             profile: ProcessingProfile | None = None, variable: str = "l1",
                             kind: str = "gaussian", grid=None, seed: int = 0,
                             direction: str = "ul") -> FitResult:
    """Grid-search the distribution of one delay so the model matches ``observed``.

    gaussian grids are over (mean, std); lognormal grids over (shape, loc)
    with the profile's scale kept.  Ties go to the lexicographically
    smallest parameter pair.
    """
    profile = profile or ProcessingProfile()
    if variable not in FIELDS:
        raise ConfigError(f"unknown delay variable {variable!r}")
    if grid is None:
        grid = itertools.product(DEFAULT_MEANS, DEFAULT_STDS)
    grid = sorted(tuple(map(float, g)) for g in grid)
    if not grid:
        raise ConfigError("empty parameter grid")
    if isinstance(traffic, TrafficSpec):
        traffic = generate_trace(traffic)
    scale = getattr(profile, variable).scale
    best = None
    for params in grid:
        if kind == "gaussian":
            spec = DistSpec.gaussian(*params)
        elif kind == "lognormal":
            spec = DistSpec.lognormal(params[0], params[1], scale)
        else:
            raise ConfigError(f"cannot fit a {kind!r} distribution")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            model = latency_distribution(cfg, profile.replace(**{variable: spec}), traffic,
                                         seed=seed, direction=direction)
        if not len(model):
            continue
        dist = wasserstein(model, observed)
        if best is None or dist < best[1] - 1e-15:
            best = (params, dist)
    if best is None:
        raise NoFeasibleConfiguration("every grid point made all packets infeasible")
    return FitResult(best[0], best[1], variable, kind)
