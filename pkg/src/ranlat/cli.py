"""Command-line entry point.

Exit codes: 0 success, 1 oracle mismatch, 2 configuration error,
3 infeasible (unreachable SR, radio underflow, nothing meets the target).
"""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import yaml

from .configfile import MODES, load_setup, read_mapping
from .errors import ConfigError, InfeasibleError
from .search import (KNOBS, PROCESSING_KEYS, ReliabilityTarget, SearchSpace, builtin_mapping,
                     default_workers, find_all, optimize, sample_valid)
from .stochastic import fit_learned_distribution, frange, latency_distribution
from .traffic import SUMMARY_LEVELS, TrafficSpec, export_results, load_trace

FORMATS = ("summary", "samples-table", "cdf-table")


def parse_traffic(text: str, seed: int = 0) -> TrafficSpec:
    """``poisson:MEAN[:SIZE]``, ``constant:GAP[:SIZE]`` or ``gaussian:MEAN:STD[:SIZE]``."""
    parts = text.split(":")
    try:
        kind, nums = parts[0], [float(x) for x in parts[1:]]
        if kind in ("poisson", "constant") and len(nums) in (1, 2):
            size = int(nums[1]) if len(nums) == 2 else 64
            make = TrafficSpec.poisson if kind == "poisson" else TrafficSpec.constant
            return make(nums[0], size, seed=seed)
        if kind == "gaussian" and len(nums) in (2, 3):
            size = int(nums[2]) if len(nums) == 3 else 64
            return TrafficSpec.gaussian(nums[0], nums[1], size, seed=seed)
    except ValueError:
        pass
    raise ConfigError(f"bad traffic spec {text!r}; try poisson:101:64")


def _print_summary(dist, out=None):
    out = out or sys.stdout
    print(f"packets     {len(dist)}" + (f"  ({dist.errored} excluded)" if dist.errored else ""), file=out)
    print(f"min         {dist.min:.6f} ms", file=out)
    print(f"mean        {dist.mean:.6f} ms", file=out)
    print(f"max         {dist.max:.6f} ms", file=out)
    for name, q in SUMMARY_LEVELS:
        print(f"{name:<11} {dist.percentile(q):.6f} ms", file=out)


def cmd_model(a) -> int:
    setup = load_setup(a.config, a.mode, a.direction)
    if a.trace:
        traffic = load_trace(a.trace)
    elif a.traffic:
        traffic = parse_traffic(a.traffic, a.seed)
    else:
        traffic = setup.traffic
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        want = a.format == "samples-table" and bool(a.out)
        res = latency_distribution(setup.config, setup.profile, traffic, a.packets, a.seed,
                                   setup.direction, train=a.train, return_breakdowns=want)
    dist, parts = res if want else (res, None)
    if not len(dist):
        raise InfeasibleError("every packet is infeasible (radio underflow or k2 below the UE minimum)")
    _print_summary(dist)
    if a.out:
        export_results(dist, parts, a.out, a.format)
    return 0


def _space(a) -> SearchSpace:
    data = read_mapping(a.space) if a.space else builtin_mapping()
    for item in a.set or []:
        key, _, val = item.partition("=")
        if key not in PROCESSING_KEYS and key not in KNOBS:
            raise ConfigError(f"--set: unknown key {key!r}")
        data[key] = {"value": yaml.safe_load(val), "optimize": False}
    for item in a.fix or []:
        key, _, val = item.partition("=")
        if key not in KNOBS:
            raise ConfigError(f"--fix: unknown knob {key!r}")
        vals = [yaml.safe_load(v) for v in val.split(",")]
        data[key] = {"value": vals[0], "optimize": len(vals) > 1, "discrete_values": vals}
    return SearchSpace.from_mapping(data)


def _point_line(p) -> str:
    return " ".join(f"{k}={v}" for k, v in zip(KNOBS, p))


def cmd_optimize(a) -> int:
    space = _space(a)
    res = optimize(space, a.objective, n_coarse=a.coarse, n_fine=a.fine, seed=a.seed,
                   exact=a.exact, workers=a.workers)
    print(f"valid configurations  {res.n_valid}")
    print(f"fine-phase evaluated  {res.n_fine}")
    print(f"objective             {res.objective} = {res.value:.6f} ms")
    print("best configuration")
    for k, v in zip(KNOBS, res.point):
        print(f"  {k}: {v}")
    _print_summary(res.distribution)
    if a.out:
        rows = ["objective_ms," + ",".join(KNOBS)]
        rows += [f"{v:.9g}," + ",".join(str(x) for x in p) for v, p in res.ranking]
        Path(a.out).write_text("\n".join(rows) + "\n")
    return 0


def cmd_find_all(a) -> int:
    space = _space(a)
    target = ReliabilityTarget.parse(a.target)
    points = sample_valid(space, a.sample, a.seed) if a.sample else None
    res = find_all(space, target, a.packets, a.seed, points, a.workers)
    print(f"target      {target}")
    print(f"evaluated   {res.evaluated}")
    print(f"matching    {len(res.matches)} ({100 * res.fraction:.4f}%)")
    if a.out:
        rows = [",".join(KNOBS) + ",achieved_ms"]
        rows += [",".join(str(x) for x in p) + f",{v:.9g}" for p, v in res.matches]
        Path(a.out).write_text("\n".join(rows) + "\n")
    for p, v in res.matches[:10]:
        print(f"  {v:.6f} ms  {_point_line(p)}")
    if not res.matches:
        print("no-feasible-configuration: nothing meets the target", file=sys.stderr)
        return 3
    return 0


def _read_observed(path: str) -> list[float]:
    vals = []
    for i, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        field = line.split(",")[1] if "," in line else line
        try:
            vals.append(float(field))
        except ValueError:
            if i == 1:
                continue
            raise ConfigError(f"{path}:{i}: not a latency value: {line!r}") from None
    if not vals:
        raise ConfigError(f"{path}: no samples")
    return vals


def _grid(text: str):
    try:
        axes = [frange(*(float(x) for x in part.split(":"))) for part in text.split(",")]
    except (TypeError, ValueError):
        raise ConfigError(f"bad grid {text!r}; try 0.5:3.5:0.05,0.05:0.8:0.05") from None
    if len(axes) != 2:
        raise ConfigError("grid needs two axes")
    return [(x, y) for x in axes[0] for y in axes[1]]


def cmd_fit(a) -> int:
    setup = load_setup(a.config, a.mode, a.direction)
    observed = _read_observed(a.observed)
    if a.trace:
        traffic = load_trace(a.trace)
    elif a.traffic:
        traffic = parse_traffic(a.traffic, a.seed).with_count(a.packets)
    else:
        traffic = setup.traffic.with_count(a.packets)
    grid = _grid(a.grid) if a.grid else None
    res = fit_learned_distribution(setup.config, observed, traffic, setup.profile, a.variable,
                                   a.kind, grid, a.seed, setup.direction)
    names = ("mean", "std") if a.kind == "gaussian" else ("shape", "loc")
    print(f"variable    {res.variable} ({res.kind})")
    for n, v in zip(names, res.params):
        print(f"{n:<11} {v:g}")
    print(f"wasserstein {res.distance:.6f}")
    return 0


def cmd_oracle_check(a) -> int:
    from .timeline import differential_check
    n, bad = differential_check(a.configs, a.seed, train=False)
    m, bad2 = differential_check(max(1, a.configs // 4), a.seed + 1, train=True)
    for line in (bad + bad2)[:20]:
        print(line)
    print(f"single-packet cases {n}, packet trains {m}, mismatches {len(bad) + len(bad2)}")
    return 1 if bad or bad2 else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ranlat", description="5G NR RAN latency model")
    sub = ap.add_subparsers(dest="command", required=True)

    def traffic_args(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--trace", help="arrival_ms,size_bytes file")
        g.add_argument("--traffic", help="poisson:MEAN[:SIZE], constant:GAP[:SIZE], gaussian:MEAN:STD[:SIZE]")

    p = sub.add_parser("model", help="latency distribution of one configuration")
    p.add_argument("--config", required=True)
    traffic_args(p)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--direction", choices=("ul", "dl"), default="ul",
                   help="for mini-slot and fdd modes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--packets", type=int)
    p.add_argument("--train", action="store_true", help="packets share the UE buffer")
    p.add_argument("--out")
    p.add_argument("--format", choices=FORMATS, default="summary")
    p.set_defaults(func=cmd_model)

    def space_args(p):
        p.add_argument("--space", help="search-space file (default: built-in FR1 grant-based)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a fixed value")
        p.add_argument("--fix", action="append", metavar="KNOB=V[,V...]", help="pin a knob")
        p.add_argument("--workers", type=int, default=default_workers())
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out")

    p = sub.add_parser("optimize", help="best configuration for an objective")
    space_args(p)
    p.add_argument("--objective", default="mean", help="mean, min, max or pQ (e.g. p99.9)")
    p.add_argument("--exact", action="store_true", help="skip the coarse filtering phase")
    p.add_argument("--coarse", type=int, default=500)
    p.add_argument("--fine", type=int, default=10000)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("find-all", help="every configuration meeting a reliability target")
    space_args(p)
    p.add_argument("--target", required=True, help="e.g. 1ms@99.99")
    p.add_argument("--packets", type=int, default=10000)
    p.add_argument("--sample", type=int, help="evaluate a uniform sample of this many configurations")
    p.set_defaults(func=cmd_find_all)

    p = sub.add_parser("fit", help="learn a delay distribution from observed latencies")
    p.add_argument("--config", required=True)
    p.add_argument("--observed", required=True, help="one latency (ms) per line, or a samples table")
    traffic_args(p)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--direction", choices=("ul", "dl"), default="ul")
    p.add_argument("--variable", default="l1")
    p.add_argument("--kind", choices=("gaussian", "lognormal"), default="gaussian")
    p.add_argument("--grid", help="LO:HI:STEP,LO:HI:STEP over (mean, std) or (shape, loc)")
    p.add_argument("--packets", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("oracle-check", help="randomized comparison against the slot simulator")
    p.add_argument("--configs", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    except InfeasibleError as e:
        print(str(e), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
