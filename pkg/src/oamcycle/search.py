"""Randomized setup discovery against a lossless-cycle criterion.

Trial ``k`` of a run with seed ``s`` is drawn from its own generator seeded
with ``(s, k)``, so any trial can be regenerated in isolation and parallel
shards agree with a serial run: the lowest passing trial index always wins.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .components import (ANGLE_KINDS, POL_KINDS, TWO_PATH_KINDS, Circuit, Element, Kind,
                         build_circuit)
from .modespace import ModeSpace
from .setupdsl import parse_setup, serialize_setup
from .verify import DEFAULT_TOL, CycleReport, check_cycle, enumerate_cycles

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_CHARGES = (-3, -2, -1, 1, 2, 3)
ANGLE_GRID = tuple(k * math.pi / 8 for k in range(16))


@dataclass(frozen=True)
class Target:
    """Cycle criterion.  ``ells=None`` accepts any four-step family that fits the window."""

    n: int = 4
    input_path: str = "a"
    ells: tuple[int, ...] | None = (-2, -1, 0, 1)
    output_path: str = "a"
    pols: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("target cycle order must be at least 2")
        if self.ells is not None:
            object.__setattr__(self, "ells", tuple(int(l) for l in self.ells))
            n_pol = len(self.pols) if self.pols else 1
            if len(self.ells) * n_pol != self.n:
                raise ValueError(f"target n={self.n} does not match {len(self.ells)} ells x {n_pol} pols")
        if self.pols is not None:
            object.__setattr__(self, "pols", tuple(self.pols))


@dataclass(frozen=True)
class SearchConfig:
    l_min: int = -6
    l_max: int = 6
    paths: tuple[str, ...] = ("a", "b")
    pol_enabled: bool = False
    toolbox: tuple[str, ...] = ("spp", "oambs", "mirror", "bs", "dove")
    charges: tuple[int, ...] = DEFAULT_CHARGES
    angles: tuple[float, ...] = ANGLE_GRID
    max_elements: int = 12
    trials: int = 100_000
    seed: int = 0
    target: Target = field(default_factory=Target)
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(self, "toolbox", tuple(Kind(k).value for k in self.toolbox))
        object.__setattr__(self, "paths", tuple(self.paths))
        if self.trials < 0:
            raise ValueError("trial budget must be non-negative")
        if self.max_elements < 1:
            raise ValueError("max_elements must be at least 1")
        if any(Kind(k) in POL_KINDS for k in self.toolbox) and not self.pol_enabled:
            raise ValueError("polarization elements need pol_enabled")
        if 0 in self.charges:
            raise ValueError("spiral phase charges must be nonzero")

    @property
    def space(self) -> ModeSpace:
        return ModeSpace(self.l_min, self.l_max, self.paths, self.pol_enabled)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["angles_deg"] = [round(math.degrees(a), 6) for a in d.pop("angles")]
        return d


@dataclass
class SearchReport:
    found: bool
    circuit: Circuit | None
    trials_used: int
    cycle_report: CycleReport | None
    seed: int
    hit_trial: int | None = None
    original_length: int | None = None

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "found": self.found,
            "seed": self.seed,
            "trials_used": self.trials_used,
            "hit_trial": self.hit_trial,
            "original_length": self.original_length,
            "setup": serialize_setup(self.circuit) if self.circuit is not None else None,
            "cycle_report": self.cycle_report.to_dict() if self.cycle_report else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial_index)]))


def sample_setup(config: SearchConfig, trial_index: int) -> Circuit:
    """Random circuit for one trial; a pure function of ``(config.seed, trial_index)``."""
    if not config.toolbox:
        raise ValueError("empty toolbox")
    rng = trial_rng(config.seed, trial_index)
    paths = config.paths
    n = int(rng.integers(1, config.max_elements + 1))
    elements = []
    for _ in range(n):
        kind = Kind(config.toolbox[int(rng.integers(len(config.toolbox)))])
        if kind in TWO_PATH_KINDS:
            i, j = rng.choice(len(paths), size=2, replace=False)
            el_paths = (paths[int(i)], paths[int(j)])
        else:
            el_paths = (paths[int(rng.integers(len(paths)))],)
        charge = angle = None
        if kind is Kind.SPP:
            charge = config.charges[int(rng.integers(len(config.charges)))]
        elif kind in ANGLE_KINDS:
            angle = config.angles[int(rng.integers(len(config.angles)))]
        elements.append(Element(kind, el_paths, charge=charge, angle=angle))
    return Circuit(config.space, tuple(elements))


def candidate_sets(space: ModeSpace, target: Target) -> list[tuple[int, ...]]:
    if target.ells is not None:
        return [target.ells]
    limit = max(-space.l_min, space.l_max)
    n_pol = len(target.pols) if target.pols else (2 if space.pol_enabled else 1)
    sets = [c for c in enumerate_cycles(max(limit, 2))
            if all(space.in_window(l) for l in c) and len(c) * n_pol == target.n]
    return sets


def evaluate(circuit: Circuit, target: Target, tol: float = DEFAULT_TOL,
             strict_phase: bool = False) -> CycleReport:
    """Check ``circuit`` against ``target``; for open targets the first passing family wins."""
    op = build_circuit(circuit)
    sets = candidate_sets(circuit.space, target)
    if not sets:
        raise ValueError(f"no {target.n}-mode candidate set fits the window")
    first = None
    for ells in sets:
        rep = check_cycle(op, target.input_path, ells, target.output_path, tol,
                          pols=target.pols, strict_phase=strict_phase)
        if rep.is_cycle:
            return rep
        if first is None:
            first = rep
    return first


def passes(circuit: Circuit, target: Target, tol: float = DEFAULT_TOL) -> bool:
    return evaluate(circuit, target, tol).is_cycle


def _drop_singles(circuit: Circuit, target: Target, tol: float) -> Circuit:
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(circuit):
            candidate = circuit.without(i)
            if passes(candidate, target, tol):
                circuit = candidate
                changed = True
            else:
                i += 1
    return circuit


def _drop_pair(circuit: Circuit, target: Target, tol: float) -> Circuit | None:
    for i in range(len(circuit)):
        for j in range(i + 1, len(circuit)):
            candidate = circuit.without(j).without(i)
            if passes(candidate, target, tol):
                return candidate
    return None


def simplify(circuit: Circuit, target: Target, tol: float = DEFAULT_TOL,
             pairs: bool = True) -> Circuit:
    """Greedy deletion down to a 1-minimal circuit.

    Left-to-right single-element sweeps run until one full sweep deletes
    nothing.  With ``pairs`` the result is then also tried without every pair
    of elements (e.g. two mirrors that only cancel together), and single
    sweeps resume after each successful pair deletion.
    """
    if not passes(circuit, target, tol):
        raise ValueError("circuit does not meet the target; nothing to simplify")
    circuit = _drop_singles(circuit, target, tol)
    while pairs:
        smaller = _drop_pair(circuit, target, tol)
        if smaller is None:
            break
        circuit = _drop_singles(smaller, target, tol)
    return circuit


def is_one_minimal(circuit: Circuit, target: Target, tol: float = DEFAULT_TOL) -> bool:
    return passes(circuit, target, tol) and not any(
        passes(circuit.without(i), target, tol) for i in range(len(circuit)))


def scan(config: SearchConfig, start: int, stop: int) -> int | None:
    """Lowest passing trial index in ``[start, stop)``, or None."""
    for k in range(start, stop):
        if passes(sample_setup(config, k), config.target, config.tol):
            return k
    return None


def _first_hit(config: SearchConfig, workers: int, block: int) -> int | None:
    if workers <= 1:
        return scan(config, 0, config.trials)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for lo in range(0, config.trials, block * workers):
            bounds = [(s, min(s + block, config.trials))
                      for s in range(lo, min(lo + block * workers, config.trials), block)]
            hits = [h for h in pool.map(scan, [config] * len(bounds), *zip(*bounds))
                    if h is not None]
            if hits:
                return min(hits)
    return None


def run_search(config: SearchConfig, workers: int = 1, block: int = 2000) -> SearchReport:
    """Sample trials until one meets the target, then simplify and re-verify it.

    The result does not depend on ``workers``.
    """
    hit = _first_hit(config, workers, block) if config.trials > 0 else None
    if hit is None:
        log.info("no hit in %d trials (seed %d)", config.trials, config.seed)
        return SearchReport(False, None, config.trials, None, config.seed)
    raw = sample_setup(config, hit)
    simple = simplify(raw, config.target, config.tol)
    # re-verify from the serialized form, independent of the in-memory objects
    reparsed = parse_setup(serialize_setup(simple))
    report = evaluate(reparsed, config.target, config.tol)
    if not report.is_cycle:
        raise RuntimeError("simplified circuit failed re-verification")
    log.info("hit at trial %d: %d elements -> %d after simplification", hit, len(raw), len(simple))
    return SearchReport(True, reparsed, hit + 1, report, config.seed, hit, len(raw))
