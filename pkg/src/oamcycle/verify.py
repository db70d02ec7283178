"""Cycle verification: permutation structure, cycle order, phases and loss."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .modespace import ModeLabel, ModeSpaceError, Operator

DEFAULT_TOL = 1e-9
IMPERFECT_TOL = 1e-3


def cycle_successor(l_in: int) -> int:
    """Output OAM of the two-sorter cycle circuit for input ``l_in``."""
    if l_in % 2 == 0:
        return l_in + 1
    return -(l_in + 1)


def _canonical_rotation(cycle: list[int]) -> tuple[int, ...]:
    # start at the even member closest to zero, skipping ell = 0
    evens = [l for l in cycle if l % 2 == 0 and l != 0]
    start = min(evens, key=lambda l: (abs(l), l))
    k = cycle.index(start)
    return tuple(cycle[k:] + cycle[:k])


def enumerate_cycles(l_limit: int) -> list[tuple[int, ...]]:
    """All closed four-step orbits of :func:`cycle_successor` inside ``[-l_limit, l_limit]``.

    Orbits that leave the range are dropped.  Cycles are returned innermost
    first, each rotated to start at its nonzero even member closest to zero.
    """
    if l_limit < 2:
        raise ValueError("l_limit must be at least 2")
    seen: set[int] = set()
    found = []
    for start in range(-l_limit, l_limit + 1):
        if start in seen:
            continue
        orbit = [start]
        l = cycle_successor(start)
        while l != start and abs(l) <= l_limit and len(orbit) <= 4:
            orbit.append(l)
            l = cycle_successor(l)
        seen.update(orbit)
        if l == start and all(abs(x) <= l_limit for x in orbit):
            found.append(_canonical_rotation(orbit))
    found.sort(key=lambda c: max(abs(x) for x in c))
    return found


def extract_submatrix(op: Operator, inputs: Sequence[ModeLabel],
                      outputs: Sequence[ModeLabel]) -> np.ndarray:
    """Block ``op[outputs, inputs]`` (rows follow ``outputs``)."""
    if len(inputs) != len(outputs):
        raise ValueError("inputs and outputs must have the same length")
    rows = [op.space.index(lab) for lab in outputs]
    cols = [op.space.index(lab) for lab in inputs]
    return op.matrix[np.ix_(rows, cols)]


def cycle_decomposition(perm: Sequence[int]) -> list[tuple[int, ...]]:
    """Disjoint cycles of ``i -> perm[i]``, fixed points included."""
    seen = [False] * len(perm)
    cycles = []
    for i in range(len(perm)):
        if seen[i]:
            continue
        cyc = []
        j = i
        while not seen[j]:
            seen[j] = True
            cyc.append(j)
            j = perm[j]
        cycles.append(tuple(cyc))
    return cycles


@dataclass(frozen=True)
class PermutationVerdict:
    is_permutation: bool
    perm: tuple[int | None, ...]
    cycles: tuple[tuple[int, ...], ...]
    phases: tuple[complex, ...]

    @property
    def cycle_lengths(self) -> list[int]:
        return [len(c) for c in self.cycles]


def classify_permutation(m: np.ndarray, tol: float = DEFAULT_TOL) -> PermutationVerdict:
    """Check that ``m`` is a phase-permutation matrix.

    Every column needs exactly one entry of modulus at least ``1 - tol``
    with all others at most ``tol``, and no two columns may hit the same row.
    ``perm[j]`` is the row that column ``j`` lands on (None if undecided).
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    mod = np.abs(m)
    n = m.shape[0]
    perm: list[int | None] = []
    phases = []
    ok = True
    for j in range(n):
        big = np.flatnonzero(mod[:, j] >= 1 - tol)
        small = mod[:, j] <= tol
        if len(big) == 1 and small.sum() == n - 1:
            i = int(big[0])
            perm.append(i)
            phases.append(complex(m[i, j] / mod[i, j]))
        else:
            ok = False
            perm.append(None)
            phases.append(complex("nan"))
    if ok and len(set(perm)) != n:
        ok = False
    cycles = tuple(cycle_decomposition(perm)) if ok else ()
    return PermutationVerdict(ok, tuple(perm), cycles, tuple(phases))


@dataclass
class CycleReport:
    is_cycle: bool
    order: int
    inputs: list[ModeLabel]
    mapping: dict[ModeLabel, ModeLabel | None]
    phases: dict[ModeLabel, complex]
    worst_leak: float
    nth_power_deviation: float
    identity_deviation: float
    strict_phase: bool = False
    reasons: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        def lab(x):
            return None if x is None else str(x)

        return {
            "is_cycle": self.is_cycle,
            "order": self.order,
            "strict_phase": self.strict_phase,
            "inputs": [str(x) for x in self.inputs],
            "mapping": {str(k): lab(v) for k, v in self.mapping.items()},
            "phases": {str(k): [round(v.real, 12) + 0.0, round(v.imag, 12) + 0.0]
                       for k, v in self.phases.items()},
            "worst_leak": float(self.worst_leak),
            "nth_power_deviation": float(self.nth_power_deviation),
            "identity_deviation": float(self.identity_deviation),
            "reasons": list(self.reasons),
        }


def check_cycle(op: Operator, input_path: str, input_ells: Sequence[int],
                output_path: str | None = None, tol: float = DEFAULT_TOL,
                pols: Sequence[str] | None = None,
                strict_phase: bool = False) -> CycleReport:
    """Decide whether ``op`` cycles the designated modes losslessly.

    The designated set is ``input_path x input_ells (x pols)``; the candidate
    outputs are the same ``(ell, pol)`` pairs on ``output_path``.  Each input
    must put at least ``1 - tol`` of its probability on one candidate and the
    induced map must be a single cycle through all of them.  For a
    polarization-enabled space ``pols`` defaults to ``("H", "V")``.
    """
    space = op.space
    output_path = input_path if output_path is None else output_path
    if len(input_ells) < 2:
        raise ValueError("a cycle needs at least two modes")
    if pols is None:
        pols = space.pols
    elif not space.pol_enabled:
        raise ModeSpaceError("pols given for a space without polarization")
    for l in input_ells:
        if not space.in_window(l):
            raise ModeSpaceError(f"input ell={l} outside window [{space.l_min}, {space.l_max}]")
    space.check_path(input_path)
    space.check_path(output_path)

    keys = [(l, p) for l in input_ells for p in pols]
    inputs = [ModeLabel(input_path, l, p) for l, p in keys]
    outputs = [ModeLabel(output_path, l, p) for l, p in keys]
    n = len(inputs)
    block = extract_submatrix(op, inputs, outputs)
    m = op.matrix
    sink = space.sink_index
    reasons = []

    mapping: dict[ModeLabel, ModeLabel | None] = {}
    phases: dict[ModeLabel, complex] = {}
    perm: list[int | None] = []
    worst_leak = 0.0
    for j, lab in enumerate(inputs):
        col = m[:, space.index(lab)]
        probs = np.abs(col[:sink]) ** 2
        best = int(np.argmax(probs))
        target = space.label(best)
        k = outputs.index(target) if target in outputs else None
        if k is None:
            # concentrated elsewhere or spread out: leak counts everything off the candidates
            on_candidates = np.abs(block[:, j]) ** 2
            worst_leak = max(worst_leak, 1.0 - float(on_candidates.max()))
            mapping[lab] = target if probs[best] >= 1 - tol else None
            perm.append(None)
            reasons.append(f"{lab} -> {target} (p={probs[best]:.6g}) is not a designated output"
                           if probs[best] >= 1 - tol else f"{lab} is not concentrated on one mode")
            continue
        leak = 1.0 - float(probs[best])
        worst_leak = max(worst_leak, leak)
        amp = complex(col[best])
        phases[lab] = amp / abs(amp) if abs(amp) > 0 else complex("nan")
        if leak > tol:
            mapping[lab] = None
            perm.append(None)
            reasons.append(f"{lab} loses {leak:.3g} of its probability")
            continue
        mapping[lab] = target
        perm.append(k)

    is_cycle = all(p is not None for p in perm)
    if is_cycle and len(set(perm)) != n:
        is_cycle = False
        reasons.append("two inputs share an output")
    if is_cycle:
        cycles = cycle_decomposition(perm)
        if len(cycles) != 1:
            is_cycle = False
            reasons.append(f"permutation splits into cycles of lengths {[len(c) for c in cycles]}")

    power = np.linalg.matrix_power(block, n)
    diag = np.diag(power)
    mod = np.abs(diag)
    unit = np.where(mod > 0, diag / np.where(mod > 0, mod, 1.0), 1.0)
    nth_dev = float(np.max(np.abs(power - np.diag(unit))))
    id_dev = float(np.max(np.abs(power - np.eye(n))))
    if strict_phase and is_cycle:
        bad = [lab for lab, ph in phases.items() if abs(ph - 1) > tol]
        if bad:
            is_cycle = False
            reasons.append(f"strict phase: nontrivial phases on {[str(b) for b in bad]}")

    return CycleReport(is_cycle, n, inputs, mapping, phases, worst_leak, nth_dev, id_dev,
                       strict_phase, reasons)
