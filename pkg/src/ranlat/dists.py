"""Distribution specs and seeded sampling.

Every draw consumes exactly one uniform and maps it through the inverse CDF,
so a variable's i-th draw depends only on (seed, variable name, i).
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from .errors import ConfigError

KINDS = ("constant", "gaussian", "lognormal", "exponential", "empirical")


@dataclass(frozen=True)
class DistSpec:
    """A non-negative delay distribution in ms.

    gaussian: mean, std.  lognormal: loc + scale * exp(shape * Z).
    exponential: mean.  empirical: equiprobable ``values``.
    """
    kind: str = "constant"
    mean: float = 0.0
    std: float = 0.0
    shape: float = 0.0
    loc: float = 0.0
    scale: float = 1.0
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown distribution kind {self.kind!r}")
        if self.std < 0 or self.shape < 0 or self.scale < 0:
            raise ConfigError("spread parameters must be >= 0")
        if self.kind == "empirical":
            if not self.values:
                raise ConfigError("empirical distribution needs at least one value")
            object.__setattr__(self, "values", tuple(sorted(float(v) for v in self.values)))
        if self.kind == "exponential" and self.mean <= 0:
            raise ConfigError("exponential mean must be > 0")

    @classmethod
    def constant(cls, value: float) -> "DistSpec":
        return cls("constant", mean=float(value))

    @classmethod
    def gaussian(cls, mean: float, std: float) -> "DistSpec":
        return cls("gaussian", mean=float(mean), std=float(std))

    @classmethod
    def lognormal(cls, shape: float, loc: float, scale: float) -> "DistSpec":
        return cls("lognormal", shape=float(shape), loc=float(loc), scale=float(scale))

    @classmethod
    def exponential(cls, mean: float) -> "DistSpec":
        return cls("exponential", mean=float(mean))

    @classmethod
    def empirical(cls, values) -> "DistSpec":
        return cls("empirical", values=tuple(values))

    @classmethod
    def from_file(cls, path: str | Path) -> "DistSpec":
        vals = []
        for i, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                vals.append(float(line))
            except ValueError:
                raise ConfigError(f"{path}:{i}: not a number: {line!r}") from None
        return cls.empirical(vals)

    @property
    def is_constant(self) -> bool:
        return (self.kind == "constant" or (self.kind == "gaussian" and self.std == 0)
                or (self.kind == "lognormal" and self.shape == 0)
                or (self.kind == "empirical" and self.values[0] == self.values[-1]))

    def lower_bound(self) -> float:
        if self.kind == "constant":
            return max(self.mean, 0.0)
        if self.kind == "gaussian":
            return max(self.mean, 0.0) if self.std == 0 else 0.0
        if self.kind == "lognormal":
            return max(self.loc + (self.scale if self.shape == 0 else 0.0), 0.0)
        if self.kind == "exponential":
            return 0.0
        return max(self.values[0], 0.0)

    def expected(self) -> float:
        if self.kind in ("constant", "gaussian", "exponential"):
            return self.mean
        if self.kind == "lognormal":
            return self.loc + self.scale * float(np.exp(self.shape ** 2 / 2))
        return float(np.mean(self.values))

    def ppf(self, u):
        """Inverse CDF, clamped to >= 0.  Accepts scalars or arrays."""
        u = np.asarray(u, dtype=float)
        k = self.kind
        if k == "constant":
            x = np.full(u.shape, self.mean)
        elif k == "gaussian":
            x = self.mean + self.std * ndtri(u) if self.std else np.full(u.shape, self.mean)
        elif k == "lognormal":
            x = self.loc + self.scale * np.exp(self.shape * ndtri(u)) if self.shape \
                else np.full(u.shape, self.loc + self.scale)
        elif k == "exponential":
            x = -self.mean * np.log1p(-u)
        else:
            vals = np.asarray(self.values)
            x = vals[np.minimum((u * len(vals)).astype(np.int64), len(vals) - 1)]
        return np.maximum(x, 0.0)


def stream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for one named variable."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(zlib.crc32(name.encode()),))
    return np.random.Generator(np.random.Philox(ss))


def draw(spec: DistSpec, rng: np.random.Generator) -> float:
    return float(spec.ppf(rng.random()))


def draw_many(spec: DistSpec, seed: int, name: str, n: int) -> np.ndarray:
    if spec.kind == "constant":
        return np.full(n, max(spec.mean, 0.0))
    return spec.ppf(stream(seed, name).random(n))
