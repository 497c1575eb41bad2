"""Mini-slot TDD and FDD pipelines.

Both keep every slot UL- and DL-capable, so the common pipelines apply with
no DL-slot wait, no UL-slot postponement and an SR opportunity in every
configured slot.  What differs is where data ends inside a slot and how many
symbols carry data.
"""
from __future__ import annotations

from .core import Duplexing, LatencyBreakdown, SystemConfig
from .downlink import dl_latency_tdd, grant_free_ul_latency
from .errors import ConfigError
from .profile import ProfileDraw
from .uplink import ul_latency


def _require(cfg: SystemConfig, mode: Duplexing) -> None:
    if cfg.pattern.duplexing is not mode:
        raise ConfigError(f"configuration is {cfg.pattern.duplexing.value}, not {mode.value}")


def _ul(cfg, draw, o1, P):
    if cfg.access == "grant-free":
        return grant_free_ul_latency(cfg, draw, o1, P)
    return ul_latency(cfg, draw, o1, P)


def mini_slot_ul_latency(cfg: SystemConfig, draw: ProfileDraw, o1: float, P: int) -> LatencyBreakdown:
    _require(cfg, Duplexing.MINI_SLOT)
    return _ul(cfg, draw, o1, P)


def mini_slot_dl_latency(cfg: SystemConfig, draw: ProfileDraw, o1: float, P: int) -> LatencyBreakdown:
    _require(cfg, Duplexing.MINI_SLOT)
    return dl_latency_tdd(cfg, draw, o1, P)


def fdd_ul_latency(cfg: SystemConfig, draw: ProfileDraw, o1: float, P: int) -> LatencyBreakdown:
    _require(cfg, Duplexing.FDD)
    return _ul(cfg, draw, o1, P)


def fdd_dl_latency(cfg: SystemConfig, draw: ProfileDraw, o1: float, P: int) -> LatencyBreakdown:
    _require(cfg, Duplexing.FDD)
    return dl_latency_tdd(cfg, draw, o1, P)


def packet_latency(cfg: SystemConfig, draw: ProfileDraw, o1: float, P: int,
                   direction: str = "ul") -> LatencyBreakdown:
    """Closed-form latency of one isolated packet in whatever mode ``cfg`` is in."""
    if direction == "dl":
        return dl_latency_tdd(cfg, draw, o1, P)
    if direction != "ul":
        raise ValueError(f"direction must be 'ul' or 'dl', got {direction!r}")
    return _ul(cfg, draw, o1, P)
