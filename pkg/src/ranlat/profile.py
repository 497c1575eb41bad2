"""Processing and preparation delays of the UE, gNB and radio front-end."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dists import DistSpec, draw_many
from .errors import ConfigError

FIELDS = ("l1", "l2", "l2p", "l3", "p1", "p2", "p3", "p4", "p5", "r1")


@dataclass(frozen=True, slots=True)
class ProfileDraw:
    """One instantiation of every delay (ms).

    l1: UE SR preparation.  l2: UE prep after a grant.  l2p: UE prep for a
    large UL grant.  l3: UE DL receive processing.  p1: gNB SR/BSR
    processing.  p2: MAC allocation.  p3: gNB PHY sample generation.
    p4: gNB UL processing up the stack.  p5: gNB DL ingress processing.
    r1: radio preparation lead time.
    """
    l1: float = 1.464
    l2: float = 0.3
    l2p: float = 0.3
    l3: float = 0.3
    p1: float = 0.1
    p2: float = 0.1
    p3: float = 0.01
    p4: float = 0.41
    p5: float = 0.1
    r1: float = 0.5

    def __post_init__(self):
        for f in FIELDS:
            if getattr(self, f) < 0:
                raise ConfigError(f"{f} must be >= 0")

    def replace(self, **kw) -> "ProfileDraw":
        return replace(self, **kw)


def _c(v):
    return DistSpec.constant(v)


@dataclass(frozen=True)
class ProcessingProfile:
    l1: DistSpec = DistSpec.gaussian(1.464, 0.175)
    l2: DistSpec = _c(0.3)
    l2p: DistSpec = _c(0.3)
    l3: DistSpec = _c(0.3)
    p1: DistSpec = _c(0.1)
    p2: DistSpec = _c(0.1)
    p3: DistSpec = _c(0.01)
    p4: DistSpec = DistSpec.lognormal(0.40, 0.27, 0.13)
    p5: DistSpec = _c(0.1)
    r1: DistSpec = _c(0.5)

    @classmethod
    def constant(cls, draw: ProfileDraw | None = None, **kw) -> "ProcessingProfile":
        draw = draw or ProfileDraw(**kw)
        return cls(**{f: _c(getattr(draw, f)) for f in FIELDS})

    def replace(self, **kw) -> "ProcessingProfile":
        kw = {k: (v if isinstance(v, DistSpec) else _c(v)) for k, v in kw.items()}
        return replace(self, **kw)

    @property
    def is_constant(self) -> bool:
        return all(getattr(self, f).is_constant for f in FIELDS)

    def sample(self, n: int, seed: int) -> dict[str, np.ndarray]:
        return {f: draw_many(getattr(self, f), seed, f, n) for f in FIELDS}

    def lower(self) -> ProfileDraw:
        return ProfileDraw(**{f: getattr(self, f).lower_bound() for f in FIELDS})

    def expected(self) -> ProfileDraw:
        return ProfileDraw(**{f: max(getattr(self, f).expected(), 0.0) for f in FIELDS})


def draw_at(samples: dict[str, np.ndarray], i: int) -> ProfileDraw:
    return ProfileDraw(**{f: float(samples[f][i]) for f in FIELDS})

