"""Single-configuration files.

Same keys as a search-space file, either flat (``k2: 2``) or in the
``{value: ..., optimize: ...}`` form; only ``value`` is used.  A few extra
keys select the duplexing mode and the grant-free schedule.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from .core import (ControlAndTiming, Duplexing, GrantFreeConfig, MiniSlotSplit, SlotGrid,
                   SystemConfig, TddPattern)
from .errors import ConfigError
from .profile import ProcessingProfile
from .search import KNOBS, SearchSpace, _entry
from .traffic import TrafficSpec

EXTRA_KEYS = ("duplexing", "symbol_split", "grant_free_period", "grant_free_offset",
              "literal_sr_bounds")

DEFAULTS = {"slot_duration": 0.5, "dl_ul_tx_period": 4, "nof_dl_slots": 2, "k2": None,
            "sr_period": 4, "sr_offset": 3, "pucch_st_sym": 13, "pucch_nof_sym": 1,
            "pdcch_nof_sym": 1, "in_advance_submission": 1}

MODES = ("ul", "dl", "grant-free", "mini-slot", "fdd")


@dataclass
class ModelSetup:
    config: SystemConfig
    profile: ProcessingProfile
    traffic: TrafficSpec
    direction: str


def read_mapping(path: str | Path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{path}: no such file")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: {e}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a key/value mapping")
    return data


def setup_from_mapping(data: dict, mode: str | None = None, direction: str = "ul") -> ModelSetup:
    if mode is not None and mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}")
    data = dict(data)
    extra = {k: _entry(data.pop(k))[0] for k in EXTRA_KEYS if k in data}
    values = {k: _entry(v)[0] for k, v in data.items()}
    knob = {k: values.pop(k, DEFAULTS[k]) for k in KNOBS}
    plain = {k: {"value": v} for k, v in values.items()}
    # The knobs go through the search-space parser only for validation of types.
    plain.update({k: {"value": (1 if v is None else v)} for k, v in knob.items()})
    space = SearchSpace.from_mapping(plain)

    duplex = Duplexing(extra.get("duplexing", "tdd"))
    access = space.access
    if mode == "dl":
        direction = "dl"
    elif mode == "grant-free":
        access = "grant-free"
    elif mode == "mini-slot":
        duplex = Duplexing.MINI_SLOT
    elif mode == "fdd":
        duplex = Duplexing.FDD
    elif mode == "ul":
        direction = "ul"

    split = None
    T, d = int(knob["dl_ul_tx_period"]), int(knob["nof_dl_slots"])
    if duplex is not Duplexing.TDD:
        T, d = 1, 0
    if duplex is Duplexing.MINI_SLOT:
        sym = extra.get("symbol_split")
        if not isinstance(sym, (list, tuple)) or len(sym) != 4:
            raise ConfigError("mini-slot mode needs symbol_split: [first DL, last DL, first UL, last UL]")
        split = MiniSlotSplit(*(int(s) for s in sym))
    pattern = TddPattern(T, d, duplex, split, bool(extra.get("literal_sr_bounds", False)))
    ctrl = ControlAndTiming(int(knob["sr_period"]), int(knob["sr_offset"]), int(knob["pucch_st_sym"]),
                            int(knob["pucch_nof_sym"]), int(knob["pdcch_nof_sym"]),
                            int(knob["in_advance_submission"]),
                            None if knob["k2"] is None else int(knob["k2"]), space.initial_grant)
    gf = None
    if access == "grant-free":
        gf = GrantFreeConfig(int(extra.get("grant_free_period", ctrl.sr_period)),
                             int(extra.get("grant_free_offset", ctrl.sr_offset)))
    grid = SlotGrid.from_slot_duration(float(knob["slot_duration"]), space.frequency_range)
    cfg = SystemConfig(grid, pattern, ctrl, space.link, access, gf)
    return ModelSetup(cfg, space.profile, space.traffic, direction)


def load_setup(path: str | Path, mode: str | None = None, direction: str = "ul") -> ModelSetup:
    return setup_from_mapping(read_mapping(path), mode, direction)
