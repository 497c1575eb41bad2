"""Latency breakdown of one 64-byte packet in each duplexing mode."""
from ranlat.core import (ControlAndTiming, Duplexing, MiniSlotSplit, SlotGrid, SystemConfig,
                         TddPattern, tdd_config)
from ranlat.duplex import packet_latency
from ranlat.profile import ProfileDraw

draw = ProfileDraw(l1=0.2, l2=0.2, l2p=0.3, l3=0.3, p1=0.1, p2=0.1, p3=0.01, p4=0.4, p5=0.2, r1=0.45)
cases = {
    "TDD UL, grant-based": (tdd_config(0.5, 5, 3, 1, 0, advance_slots=1), "ul"),
    "TDD UL, grant-free": (tdd_config(0.5, 5, 3, 1, 0, advance_slots=1, access="grant-free"), "ul"),
    "TDD DL": (tdd_config(0.5, 5, 3, 1, 0, advance_slots=1), "dl"),
    "mini-slot UL": (SystemConfig(SlotGrid(1), TddPattern(1, 0, Duplexing.MINI_SLOT,
                                                          MiniSlotSplit(9, 9, 10, 14)),
                                  ControlAndTiming(1, 0, pucch_start=11)), "ul"),
    "FDD UL": (SystemConfig(SlotGrid(1), TddPattern(1, 0, Duplexing.FDD), ControlAndTiming(1, 0)), "ul"),
}
for name, (cfg, direction) in cases.items():
    b = packet_latency(cfg, draw, 0.2, 64, direction)
    parts = "  ".join(f"{k}={v:.3f}" for k, v in b.components.items())
    print(f"{name:<22} total {b.total:.3f} ms   {parts}")
