"""Synthetic traffic, trace files and result export."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dists import DistSpec, draw_many
from .errors import ConfigError


@dataclass(frozen=True)
class PacketTrace:
    arrivals: tuple[float, ...]
    sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "arrivals", tuple(float(a) for a in self.arrivals))
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if len(self.arrivals) != len(self.sizes):
            raise ConfigError("arrivals and sizes differ in length")
        if any(a < 0 for a in self.arrivals):
            raise ConfigError("arrival times must be >= 0")
        if any(s < 1 for s in self.sizes):
            raise ConfigError("packet sizes must be >= 1 byte")
        if any(b < a for a, b in zip(self.arrivals, self.arrivals[1:])):
            raise ConfigError("arrivals must be sorted")

    def __len__(self) -> int:
        return len(self.arrivals)

    def head(self, n: int) -> "PacketTrace":
        return PacketTrace(self.arrivals[:n], self.sizes[:n])

    @classmethod
    def single(cls, o1: float, size: int) -> "PacketTrace":
        return cls((o1,), (size,))


@dataclass(frozen=True)
class TrafficSpec:
    """Arrival process: constant, gaussian or poisson (exponential gaps)."""
    inter_arrival: DistSpec = DistSpec.constant(101.0)
    packet_size: int | DistSpec = 64
    count: int = 10000
    seed: int = 0

    def __post_init__(self):
        if self.inter_arrival.kind not in ("constant", "gaussian", "exponential"):
            raise ConfigError("inter-arrival must be constant, gaussian or poisson")
        if self.count < 0:
            raise ConfigError("count must be >= 0")

    @classmethod
    def constant(cls, gap_ms: float, size: int = 64, count: int = 10000, seed: int = 0):
        return cls(DistSpec.constant(gap_ms), size, count, seed)

    @classmethod
    def gaussian(cls, mean_ms: float, std_ms: float, size: int = 64, count: int = 10000, seed: int = 0):
        return cls(DistSpec.gaussian(mean_ms, std_ms), size, count, seed)

    @classmethod
    def poisson(cls, mean_ms: float, size: int = 64, count: int = 10000, seed: int = 0):
        return cls(DistSpec.exponential(mean_ms), size, count, seed)

    def with_count(self, count: int) -> "TrafficSpec":
        return TrafficSpec(self.inter_arrival, self.packet_size, count, self.seed)


def generate_trace(spec: TrafficSpec) -> PacketTrace:
    n = spec.count
    if n == 0:
        return PacketTrace((), ())
    gaps = draw_many(spec.inter_arrival, spec.seed, "inter_arrival", n)
    if np.any(gaps <= 0):
        raise ConfigError("inter-arrival draw <= 0; reduce the spread")
    arrivals = np.cumsum(gaps)
    if isinstance(spec.packet_size, DistSpec):
        sizes = np.maximum(np.rint(draw_many(spec.packet_size, spec.seed, "packet_size", n)), 1)
    else:
        sizes = np.full(n, int(spec.packet_size))
    return PacketTrace(arrivals.tolist(), sizes.astype(int).tolist())


def save_trace(trace: PacketTrace, path: str | Path) -> None:
    lines = ["arrival_ms,size_bytes"]
    lines += [f"{a!r},{s}" for a, s in zip(trace.arrivals, trace.sizes)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_trace(path: str | Path) -> PacketTrace:
    arrivals, sizes = [], []
    first = True
    with open(path, newline="") as fh:
        for i, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if first:
                first = False
                if not _is_number(parts[0]):
                    continue
            if len(parts) != 2:
                raise ConfigError(f"{path}:{i}: expected 'arrival_ms,size_bytes'")
            try:
                a, s = float(parts[0]), int(parts[1])
            except ValueError:
                raise ConfigError(f"{path}:{i}: malformed record {line!r}") from None
            if a < 0 or not math.isfinite(a):
                raise ConfigError(f"{path}:{i}: arrival must be finite and >= 0")
            arrivals.append(a)
            sizes.append(s)
    return PacketTrace(arrivals, sizes)


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


SUMMARY_LEVELS = (("p50", 50), ("p90", 90), ("p99", 99), ("p99.99", 99.99))


def export_results(dist, breakdowns, path: str | Path, fmt: str = "summary") -> None:
    """Write a distribution as a sample table, a CDF table or a summary."""
    path = Path(path)
    if fmt == "samples-table":
        lines = ["index,latency_ms"]
        lines += [f"{i},{x:.9g}" for i, x in enumerate(dist.samples)]
        if breakdowns:
            keys = sorted({k for b in breakdowns for k in b.components})
            lines[0] += "," + ",".join(keys)
            for i, b in enumerate(breakdowns):
                lines[i + 1] += "," + ",".join(
                    f"{b.components[k]:.9g}" if k in b.components else "" for k in keys)
    elif fmt == "cdf-table":
        lines = ["latency_ms,cumulative_fraction"]
        lines += [f"{x:.9g},{f:.9g}" for x, f in dist.cdf()]
    elif fmt == "summary":
        lines = ["statistic,value_ms",
                 f"count,{len(dist)}", f"min,{dist.min:.9g}",
                 f"mean,{dist.mean:.9g}", f"max,{dist.max:.9g}"]
        lines += [f"{name},{dist.percentile(q):.9g}" for name, q in SUMMARY_LEVELS]
    else:
        raise ValueError(f"unknown export format {fmt!r}")
    path.write_text("\n".join(lines) + "\n")


def read_table(path: str | Path) -> list[list[str]]:
    rows = [ln.split(",") for ln in Path(path).read_text().splitlines() if ln]
    return rows[1:]
