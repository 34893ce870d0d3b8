"""Command-line front end: ``mems-forge {synthesize,sweep,experiment}``.

Exit codes: 0 success, 2 invalid configuration, 3 unphysical (or
unsynthesizable) map, 4 reconstruction failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import bench, channel, qstate, tomo
from .errors import (DegenerateDeviceError, DomainError, MemsForgeError, PhysicalityError,
                     ReconstructionError, StateError, SynthesisError)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNPHYSICAL = 3
EXIT_RECONSTRUCTION = 4

SEED_ENV = "MEMS_FORGE_SEED"
DEFAULT_GRID = "a1=1,a2=0.05:1:20;a1=0.05:0.95:19,a2=1;a1=0,a2=1"


class ConfigError(MemsForgeError):
    pass


@dataclass
class RunConfig:
    command: str
    target: str = "mems1:0.8"
    initial: str = "singlet"
    a1: float = 1.0
    a2: float = 1.0
    grid: list = field(default_factory=list)
    curves: tuple = bench.CURVES
    curve_points: int = 51
    N: int = 10_000
    seed: int = 0
    noiseless: bool = False
    out: str | None = None
    format: str = "json"


def _number(text):
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a number: {text!r}") from None


def parse_state(spec):
    """Build a state from ``name[:param]`` or ``file:path.json``."""
    name, _, arg = spec.partition(":")
    ctors = {"mems1": qstate.mems1, "mems2": qstate.mems2, "werner": qstate.werner}
    if name == "singlet":
        if arg:
            raise ConfigError("singlet takes no parameter")
        return qstate.singlet(), None
    if name == "file":
        try:
            return qstate.load_state(arg), None
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot read state file {arg!r}: {exc}") from None
    if name not in ctors:
        raise ConfigError(f"unknown state {name!r}; use singlet, mems1:p, mems2:c, werner:p or file:path")
    if not arg:
        raise ConfigError(f"{name} needs a parameter, e.g. {name}:0.8")
    try:
        rho = ctors[name](_number(arg))
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    return rho, (qstate.MEMS2_NOTE if name == "mems2" else None)


def _axis(text):
    parts = text.split(":")
    if len(parts) == 1:
        return [_number(parts[0])]
    if len(parts) == 3:
        start, stop, num = _number(parts[0]), _number(parts[1]), parts[2]
        if not num.isdigit() or int(num) < 1:
            raise ConfigError(f"bad point count in range {text!r}")
        return [float(x) for x in np.linspace(start, stop, int(num))]
    raise ConfigError(f"bad grid axis {text!r}; use value or start:stop:num")


def parse_grid(text):
    """``a1=<axis>,a2=<axis>[;...]``; each block is the product of its two axes."""
    points = []
    for block in filter(None, (b.strip() for b in text.split(";"))):
        axes = {}
        for item in block.split(","):
            key, eq, val = item.partition("=")
            key = key.strip()
            if not eq or key not in ("a1", "a2") or key in axes:
                raise ConfigError(f"bad grid block {block!r}")
            axes[key] = _axis(val)
        if set(axes) != {"a1", "a2"}:
            raise ConfigError(f"grid block {block!r} must set both a1 and a2")
        points.extend((a1, a2) for a1 in axes["a1"] for a2 in axes["a2"])
    if not points:
        raise ConfigError("empty grid")
    for a1, a2 in points:
        if not (0 <= a1 <= 1 and 0 <= a2 <= 1):
            raise ConfigError(f"grid point ({a1}, {a2}) outside [0, 1]^2")
    return points


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(obj, out):
    _emit(json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n", out)


def cmd_synthesize(cfg):
    target, note = parse_state(cfg.target)
    initial, _ = parse_state(cfg.initial)
    doc = {"target": cfg.target, "initial": cfg.initial}
    if note:
        doc["note"] = note
    try:
        m = channel.synthesize_local_map(target, initial)
    except SynthesisError as exc:
        doc.update(error=str(exc), condition=exc.condition, mueller=None, kraus=None)
        _emit_json(doc, cfg.out)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNPHYSICAL
    try:
        k = channel.kraus_decompose(m)
    except PhysicalityError as exc:
        doc.update(channel.channel_to_dict(m, None, exc.report), error=str(exc))
        _emit_json(doc, cfg.out)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNPHYSICAL
    doc.update(channel.channel_to_dict(m, k, channel.physicality(m)))
    _emit_json(doc, cfg.out)
    return EXIT_OK


def cmd_sweep(cfg):
    rows = []
    if "device" in cfg.curves:
        rows += bench.sweep(cfg.grid)
    refs = tuple(c for c in cfg.curves if c != "device")
    rows += bench.reference_curves(cfg.curve_points, refs)
    if cfg.format == "csv":
        _emit(bench.rows_to_csv(rows), cfg.out)
    else:
        doc = {"rows": [{"a1": r.a1, "a2": r.a2, "p": r.p, "linear_entropy": r.linear_entropy,
                         "tangle": r.tangle, "curve": r.curve, "error": r.error} for r in rows],
               "boundary_tangle": 4 / 9}
        if "mems2" in refs:
            doc["note"] = {"mems2": qstate.MEMS2_NOTE}
        _emit_json(doc, cfg.out)
    return EXIT_OK


def cmd_experiment(cfg):
    device = bench.mems_device(cfg.a1, cfg.a2)
    true_rho = channel.apply_kraus(bench.device_map(device), qstate.singlet())
    schedule = tomo.standard_schedule()
    counts = tomo.simulate_counts(true_rho, schedule, cfg.N, seed=cfg.seed,
                                  noiseless=cfg.noiseless)
    if cfg.format == "csv":
        _emit(tomo.counts_to_csv(counts, schedule), cfg.out)
        return EXIT_OK
    try:
        result = tomo.reconstruct(counts, schedule)
    except ReconstructionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RECONSTRUCTION
    rho_hat = result.rho_hat
    doc = {
        "device": bench.device_to_dict(device),
        "a1": cfg.a1, "a2": cfg.a2, "p": bench.effective_p(cfg.a1, cfg.a2),
        "N": cfg.N, "seed": cfg.seed, "noiseless": cfg.noiseless,
        "true": qstate.state_to_dict(true_rho),
        "reconstructed": result.to_dict(),
        "fidelity": qstate.fidelity(true_rho, rho_hat),
        "tangle": {"true": qstate.tangle(true_rho), "reconstructed": qstate.tangle(rho_hat)},
        "linear_entropy": {"true": qstate.linear_entropy(true_rho),
                           "reconstructed": qstate.linear_entropy(rho_hat)},
    }
    _emit_json(doc, cfg.out)
    return EXIT_OK if result.converged else EXIT_RECONSTRUCTION


COMMANDS = {"synthesize": cmd_synthesize, "sweep": cmd_sweep, "experiment": cmd_experiment}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    parser = _Parser(prog="mems-forge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, fmt_default):
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=fmt_default)

    p = sub.add_parser("synthesize", help="map from initial to target state, with Kraus terms")
    p.add_argument("--target", required=True)
    p.add_argument("--initial", default="singlet")
    common(p, "json")

    p = sub.add_parser("sweep", help="linear-entropy/tangle data for the two-path device")
    p.add_argument("--grid", default=DEFAULT_GRID)
    p.add_argument("--curves", default=",".join(bench.CURVES))
    p.add_argument("--curve-points", type=int, default=51)
    common(p, "csv")

    p = sub.add_parser("experiment", help="device, simulated tomography and reconstruction")
    p.add_argument("--a1", type=_number, default=1.0)
    p.add_argument("--a2", type=_number, default=1.0)
    p.add_argument("--N", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--noiseless", action="store_true")
    common(p, "json")
    return parser


def config_from_args(argv=None):
    args = build_parser().parse_args(argv)
    cfg = RunConfig(command=args.command, out=args.out, format=args.format)
    if args.command == "synthesize":
        if args.format != "json":
            raise ConfigError("synthesize writes JSON only")
        cfg.target, cfg.initial = args.target, args.initial
    elif args.command == "sweep":
        cfg.grid = parse_grid(args.grid)
        curves = tuple(c.strip() for c in args.curves.split(",") if c.strip())
        unknown = set(curves) - set(bench.CURVES)
        if not curves or unknown:
            raise ConfigError(f"unknown curves {sorted(unknown)}; choose from {bench.CURVES}")
        if args.curve_points < 2:
            raise ConfigError("--curve-points must be at least 2")
        cfg.curves, cfg.curve_points = curves, args.curve_points
    else:
        if not (0 <= args.a1 <= 1 and 0 <= args.a2 <= 1):
            raise ConfigError("--a1 and --a2 must lie in [0, 1]")
        if args.a1 == 0 and args.a2 == 0:
            raise ConfigError("--a1 and --a2 cannot both be 0")
        if args.N < 1:
            raise ConfigError("--N must be positive")
        seed = args.seed
        if seed is None:
            env = os.environ.get(SEED_ENV, "0")
            if not env.strip().lstrip("-").isdigit():
                raise ConfigError(f"{SEED_ENV}={env!r} is not an integer")
            seed = int(env)
        cfg.a1, cfg.a2, cfg.N, cfg.seed = args.a1, args.a2, args.N, seed
        cfg.noiseless = args.noiseless
    return cfg


def main(argv=None):
    try:
        cfg = config_from_args(argv)
        return COMMANDS[cfg.command](cfg)
    except (ConfigError, DomainError, StateError, DegenerateDeviceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
