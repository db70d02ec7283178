"""Truncated discrete mode basis and the state/operator algebra on top of it.

A :class:`ModeSpace` enumerates ``(path, ell, pol)`` labels in a fixed order
(path-major, then ``ell`` ascending, then H before V) followed by one loss
sink.  Operators are dense complex matrices over that basis.  Amplitude that
an element would push outside the ``ell`` window is routed to the sink so the
probability budget stays auditable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

POLARIZATIONS = ("H", "V")

DEFAULT_L_MIN = -8
DEFAULT_L_MAX = 8


class ModeSpaceError(ValueError):
    """Invalid mode space, label or operand mismatch."""


class ModeLabel(NamedTuple):
    path: str
    ell: int
    pol: str | None = None

    def __str__(self) -> str:
        if self.pol is None:
            return f"{self.path}:{self.ell}"
        return f"{self.path}:{self.ell}:{self.pol}"


SINK = ModeLabel("<sink>", 0, None)


@dataclass(frozen=True)
class ModeSpace:
    l_min: int = DEFAULT_L_MIN
    l_max: int = DEFAULT_L_MAX
    paths: tuple[str, ...] = ("a", "b")
    pol_enabled: bool = False
    _index: dict = field(init=False, repr=False, compare=False, hash=False)
    _labels: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        paths = tuple(self.paths)
        object.__setattr__(self, "paths", paths)
        if not paths:
            raise ModeSpaceError("mode space needs at least one path")
        if len(set(paths)) != len(paths):
            raise ModeSpaceError(f"duplicate path names in {paths!r}")
        if self.l_min >= self.l_max:
            raise ModeSpaceError(f"l_min={self.l_min} must be below l_max={self.l_max}")
        pols = POLARIZATIONS if self.pol_enabled else (None,)
        labels = [ModeLabel(p, l, s) for p in paths
                  for l in range(self.l_min, self.l_max + 1) for s in pols]
        object.__setattr__(self, "_labels", tuple(labels))
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(labels)})

    @property
    def ells(self) -> range:
        return range(self.l_min, self.l_max + 1)

    @property
    def pols(self) -> tuple:
        return POLARIZATIONS if self.pol_enabled else (None,)

    @property
    def sink_index(self) -> int:
        return len(self._index)

    @property
    def dim(self) -> int:
        return len(self._index) + 1

    @property
    def labels(self) -> tuple[ModeLabel, ...]:
        return self._labels

    def in_window(self, ell: int) -> bool:
        return self.l_min <= ell <= self.l_max

    def __contains__(self, label) -> bool:
        return label in self._index

    def index(self, label: ModeLabel) -> int:
        """Basis index of ``label``; raises ModeSpaceError when it is not in the space."""
        label = ModeLabel(*label)
        try:
            return self._index[label]
        except KeyError:
            pass
        if label.path not in self.paths:
            raise ModeSpaceError(f"unknown path {label.path!r}")
        if not self.in_window(label.ell):
            raise ModeSpaceError(
                f"ell={label.ell} outside window [{self.l_min}, {self.l_max}]")
        if self.pol_enabled:
            raise ModeSpaceError(f"polarization must be one of H/V, got {label.pol!r}")
        raise ModeSpaceError("polarization given for a space without polarization")

    def label(self, index: int) -> ModeLabel:
        if index == self.sink_index:
            return SINK
        return self._labels[index]

    def target_index(self, path: str, ell: int, pol: str | None) -> int:
        """Index for an element's output mode; out-of-window ``ell`` goes to the sink."""
        if not self.in_window(ell):
            return self.sink_index
        return self._index[ModeLabel(path, ell, pol)]

    def check_path(self, path: str) -> None:
        if path not in self.paths:
            raise ModeSpaceError(f"unknown path {path!r}; space has {list(self.paths)}")


def make_mode_space(l_min: int = DEFAULT_L_MIN, l_max: int = DEFAULT_L_MAX,
                    paths: Sequence[str] = ("a", "b"), pol_enabled: bool = False) -> ModeSpace:
    return ModeSpace(int(l_min), int(l_max), tuple(paths), bool(pol_enabled))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StateVector:
    space: ModeSpace
    amps: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amps)
        if amps.shape != (self.space.dim,):
            raise ModeSpaceError(f"amplitude vector has shape {amps.shape}, expected ({self.space.dim},)")
        object.__setattr__(self, "amps", amps)

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    @property
    def sink_probability(self) -> float:
        return float(abs(self.amps[self.space.sink_index]) ** 2)

    def amplitude(self, label: ModeLabel) -> complex:
        return complex(self.amps[self.space.index(label)])


@dataclass(frozen=True, eq=False)
class Operator:
    space: ModeSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        d = self.space.dim
        if m.shape != (d, d):
            raise ModeSpaceError(f"operator has shape {m.shape}, expected ({d}, {d})")
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return compose(self, other)
        if isinstance(other, StateVector):
            return apply(self, other)
        return NotImplemented

    def element(self, out: ModeLabel, inp: ModeLabel) -> complex:
        return complex(self.matrix[self.space.index(out), self.space.index(inp)])


def identity(space: ModeSpace) -> Operator:
    return Operator(space, np.eye(space.dim, dtype=complex))


def operator_from_map(space: ModeSpace, column) -> Operator:
    """Build an operator column by column.

    ``column(label)`` returns ``[(path, ell, pol, amplitude), ...]``; targets
    outside the window land in the sink with their probabilities summed so a
    basis input never loses norm.  The sink maps to itself.
    """
    m = np.zeros((space.dim, space.dim), dtype=complex)
    sink = space.sink_index
    for j, lab in enumerate(space.labels):
        leaked = 0.0
        for path, ell, pol, amp in column(lab):
            i = space.target_index(path, ell, pol)
            if i == sink:
                leaked += abs(amp) ** 2
            else:
                m[i, j] += amp
        if leaked:
            m[sink, j] = np.sqrt(leaked)
    m[sink, sink] = 1.0
    return Operator(space, m)


def basis_state(space: ModeSpace, label: ModeLabel | tuple) -> StateVector:
    amps = np.zeros(space.dim, dtype=complex)
    amps[space.index(label)] = 1.0
    return StateVector(space, amps)


def superposition(space: ModeSpace, weights: Mapping[ModeLabel, complex],
                  normalize: bool = True) -> StateVector:
    amps = np.zeros(space.dim, dtype=complex)
    for lab, w in weights.items():
        amps[space.index(lab)] += w
    if normalize:
        n = np.linalg.norm(amps)
        if n == 0:
            raise ModeSpaceError("superposition has zero norm")
        amps = amps / n
    return StateVector(space, amps)


def _same_space(a, b) -> None:
    if a.space != b.space:
        raise ModeSpaceError(f"space mismatch: {a.space} vs {b.space}")


def apply(op: Operator, s: StateVector) -> StateVector:
    _same_space(op, s)
    return StateVector(op.space, op.matrix @ s.amps)


def compose(second: Operator, first: Operator) -> Operator:
    """``second . first``: ``first`` acts on the beam before ``second``."""
    _same_space(second, first)
    return Operator(second.space, second.matrix @ first.matrix)


def compose_all(space: ModeSpace, ops: Iterable[Operator]) -> Operator:
    """Left fold in beam order; the first operator in ``ops`` acts first."""
    m = np.eye(space.dim, dtype=complex)
    for op in ops:
        if op.space != space:
            raise ModeSpaceError("space mismatch in compose_all")
        m = op.matrix @ m
    return Operator(space, m)


@dataclass(frozen=True)
class UnitarityReport:
    is_unitary: bool
    max_deviation: float
    leaked_probability: float


def is_unitary(op: Operator, tol: float = 1e-12) -> UnitarityReport:
    """Check ``U^dagger U = I`` on the non-sink block.

    ``leaked_probability`` is the worst per-column probability that leaves
    the window (or is otherwise lost), reported separately from the verdict.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = op.space.sink_index
    block = op.matrix[:n, :n]
    dev = float(np.max(np.abs(block.conj().T @ block - np.eye(n)))) if n else 0.0
    kept = np.sum(np.abs(block) ** 2, axis=0)
    leak = float(np.max(1.0 - kept)) if n else 0.0
    return UnitarityReport(dev <= tol, dev, max(leak, 0.0))


def mode_probabilities(s: StateVector, threshold: float = 0.0) -> dict[ModeLabel, float]:
    """Probability per basis mode (sink included under :data:`SINK`).

    Entries at or below ``threshold`` are dropped; the default keeps every
    nonzero entry.
    """
    p = np.abs(s.amps) ** 2
    out = {}
    for i, pi in enumerate(p):
        if pi > threshold:
            out[s.space.label(i)] = float(pi)
    return out


def operators_close(a: Operator, b: Operator, tol: float = 1e-12,
                    strict_phase: bool = False) -> bool:
    """Compare elementwise moduli, or raw entries when ``strict_phase`` is set."""
    _same_space(a, b)
    if strict_phase:
        return bool(np.max(np.abs(a.matrix - b.matrix)) <= tol)
    return bool(np.max(np.abs(np.abs(a.matrix) - np.abs(b.matrix))) <= tol)
