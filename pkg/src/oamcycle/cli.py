"""Command-line interface.

Exit codes: 0 success, 1 verification failure or nothing found, 2 usage or
parse errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import imperfect, render
from .components import build_circuit
from .modespace import SINK, ModeLabel, ModeSpaceError, apply, basis_state, mode_probabilities
from .search import SCHEMA_VERSION, SearchConfig, Target, run_search
from .setupdsl import SetupParseError, parse_setup, serialize_setup
from .verify import check_cycle, enumerate_cycles

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _csv_ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}")


def _load(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")
    return parse_setup(text)


def _parse_input(spec: str) -> ModeLabel:
    parts = spec.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"--input must be <path>:<ell>[:<H|V>], got {spec!r}")
    try:
        ell = int(parts[1])
    except ValueError:
        raise UsageError(f"bad ell in --input {spec!r}")
    return ModeLabel(parts[0], ell, parts[2] if len(parts) == 3 else None)


def _emit(obj: dict) -> None:
    print(json.dumps({"schema_version": SCHEMA_VERSION, **obj}, indent=2, sort_keys=True))


def cmd_simulate(args) -> int:
    circuit = _load(args.setup)
    label = _parse_input(args.input)
    if circuit.space.pol_enabled and label.pol is None:
        label = label._replace(pol="H")
    out = apply(build_circuit(circuit), basis_state(circuit.space, label))
    probs = mode_probabilities(out, threshold=1e-15)
    if args.json:
        _emit({"input": str(label),
               "probabilities": {("sink" if k == SINK else str(k)): v for k, v in probs.items()}})
    else:
        for k, v in probs.items():
            print(f"{'sink' if k == SINK else str(k):>12}  {v:.12f}")
    return EXIT_OK


def cmd_verify(args) -> int:
    circuit = _load(args.setup)
    pols = args.pols.split(",") if args.pols else None
    rep = check_cycle(build_circuit(circuit), args.in_path, _csv_ints(args.ells), args.out_path,
                      args.tol, pols=pols, strict_phase=args.strict_phase)
    if args.json:
        _emit(rep.to_dict())
    else:
        verdict = "CYCLE" if rep.is_cycle else "NOT A CYCLE"
        print(f"{verdict} (order {rep.order}, worst leak {rep.worst_leak:.3g}, "
              f"n-th power deviation {rep.nth_power_deviation:.3g})")
        for k, v in rep.mapping.items():
            ph = rep.phases.get(k)
            tail = f"  phase {np.angle(ph) / np.pi:+.4f} pi" if ph is not None and np.isfinite(ph) else ""
            print(f"  {k} -> {v if v is not None else '?'}{tail}")
        for r in rep.reasons:
            print(f"  ! {r}")
    return EXIT_OK if rep.is_cycle else EXIT_FAIL


def cmd_search(args) -> int:
    target = args.target
    if not target.startswith("cycle") or not target[5:].isdigit():
        raise UsageError("--target must look like cycle<n>, e.g. cycle4")
    n = int(target[5:])
    ells = tuple(_csv_ints(args.ells)) if args.ells else None
    pols = ("H", "V") if args.pol else None
    paths = tuple(args.paths.split(","))
    cfg = SearchConfig(
        l_min=args.lmin, l_max=args.lmax, paths=paths, pol_enabled=args.pol,
        toolbox=tuple(t.strip() for t in args.toolbox.split(",")),
        max_elements=args.max_elements, trials=args.trials, seed=args.seed,
        target=Target(n, args.in_path, ells, args.out_path, pols))
    rep = run_search(cfg, workers=args.workers)
    print(rep.to_json())
    if rep.found and args.out:
        Path(args.out).write_text(serialize_setup(rep.circuit))
    return EXIT_OK if rep.found else EXIT_FAIL


def cmd_sweep(args) -> int:
    circuit = _load(args.setup)
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    values = np.linspace(args.start, args.stop, args.steps) if args.steps > 1 else [args.start]
    base = imperfect.ImperfectionParams(
        aperture_radius=args.aperture, bs_ratio_error=args.bs_ratio_error,
        phase_error=args.phase_error, coupling_decay=args.coupling_decay)
    rows = imperfect.sweep(circuit, args.param, values, base, tuple(_csv_ints(args.ells)),
                           args.in_path, args.out_path)
    sys.stdout.write(imperfect.rows_to_csv(rows))
    return EXIT_OK


def cmd_render(args) -> int:
    intensity, phase = render.render_mode(args.ell, args.size, args.waist)
    for p in render.save_mode_images(args.out, intensity, phase, csv=args.csv):
        print(p)
    return EXIT_OK


def cmd_cycles(args) -> int:
    cycles = enumerate_cycles(args.limit)
    if args.json:
        _emit({"limit": args.limit, "cycles": [list(c) for c in cycles]})
    else:
        for c in cycles:
            print(" -> ".join(f"{l:+d}" for l in c) + f" -> {c[0]:+d}")
    return EXIT_OK


def cmd_reference(args) -> int:
    _emit(imperfect.reference_efficiencies())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="oamcycle", description="Discrete OAM linear-optics simulator and cycle search.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="propagate one input mode through a setup")
    s.add_argument("setup")
    s.add_argument("--input", required=True, help="<path>:<ell>[:<H|V>]")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("verify-cycle", help="check a setup for a lossless cycle")
    s.add_argument("setup")
    s.add_argument("--ells", required=True)
    s.add_argument("--in-path", required=True)
    s.add_argument("--out-path", required=True)
    s.add_argument("--pols", help="comma-separated polarizations (pol-enabled setups)")
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--strict-phase", action="store_true")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("search", help="random search for a cycle setup")
    s.add_argument("--target", required=True, help="cycle<n>")
    s.add_argument("--ells", help="designated ells; omit to accept any four-step family")
    s.add_argument("--toolbox", required=True, help="e.g. spp,oambs,mirror,bs,dove")
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--pol", action="store_true", help="hybrid OAM x polarization space")
    s.add_argument("--paths", default="a,b")
    s.add_argument("--in-path", default="a")
    s.add_argument("--out-path", default="a")
    s.add_argument("--lmin", type=int, default=-6)
    s.add_argument("--lmax", type=int, default=6)
    s.add_argument("--max-elements", type=int, default=12)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", help="write the discovered setup file here")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("sweep", help="efficiencies over an imperfection parameter grid (CSV)")
    s.add_argument("setup")
    s.add_argument("--param", required=True, choices=imperfect.SWEEP_PARAMS)
    s.add_argument("--from", dest="start", type=float, required=True)
    s.add_argument("--to", dest="stop", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--ells", default="-2,-1,0,1")
    s.add_argument("--in-path", default="a")
    s.add_argument("--out-path", default="a")
    s.add_argument("--aperture", type=float, default=float("inf"))
    s.add_argument("--bs-ratio-error", type=float, default=0.0)
    s.add_argument("--phase-error", type=float, default=0.0)
    s.add_argument("--coupling-decay", type=float, default=1.0)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("render", help="write LG intensity/phase images as PGM")
    s.add_argument("--ell", type=int, required=True)
    s.add_argument("--size", type=int, default=128)
    s.add_argument("--waist", type=float, default=1.0)
    s.add_argument("--out", required=True, help="output prefix")
    s.add_argument("--csv", action="store_true", help="also dump raw values as CSV")
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("cycles", help="list the four-step families up to |ell| <= limit")
    s.add_argument("--limit", type=int, required=True)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_cycles)

    s = sub.add_parser("reference", help="print the measured reference efficiencies")
    s.set_defaults(func=cmd_reference)
    return p


_LIST_OPTIONS = ("--ells",)


def _join_list_options(argv: list[str]) -> list[str]:
    # "--ells -2,-1,0,1" would otherwise be read as an unknown option
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _LIST_OPTIONS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def run(argv: list[str] | None = None) -> int:
    argv = _join_list_options(sys.argv[1:] if argv is None else list(argv))
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SetupParseError as exc:
        for e in exc.errors:
            print(f"{args.setup}:{e}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ModeSpaceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
