"""Imperfect hardware: aperture clipping, splitting-ratio and phase errors,
mode-dependent fiber coupling, and the resulting crosstalk/efficiency figures.

The coupling model (``c ** |ell|``) is a heuristic stand-in for
phase-flattening overlap losses; no closed form is implied.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, fields, replace
from importlib import resources
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammainc

from .components import Circuit, Kind, beamsplitter, element_operator
from .modespace import ModeLabel, ModeSpace, ModeSpaceError, Operator, compose_all, operator_from_map
from .verify import cycle_successor

INNER_CYCLE = (-2, -1, 0, 1)


@dataclass(frozen=True)
class ImperfectionParams:
    """Imperfection knobs.  ``aperture_radius`` is in units of the beam waist."""

    aperture_radius: float = math.inf
    bs_ratio_error: float = 0.0
    phase_error: float = 0.0
    coupling_decay: float = 1.0

    def __post_init__(self):
        if not self.aperture_radius > 0:
            raise ValueError("aperture_radius must be positive")
        if not 0 <= self.bs_ratio_error < 0.5:
            raise ValueError("bs_ratio_error must lie in [0, 0.5)")
        if not 0 < self.coupling_decay <= 1:
            raise ValueError("coupling_decay must lie in (0, 1]")

    @staticmethod
    def waist_scale(ell: int, w0: float = 1.0) -> float:
        """Characteristic radius ``w0 sqrt(|ell| + 1)`` of an LG(p=0, ell) beam."""
        return w0 * math.sqrt(abs(ell) + 1)

    @property
    def is_ideal(self) -> bool:
        return (math.isinf(self.aperture_radius) and self.bs_ratio_error == 0
                and self.phase_error == 0 and self.coupling_decay == 1)


def aperture_transmission(ell: int, R: float, w: float = 1.0) -> float:
    """Power fraction of an LG(p=0, ell) beam of waist ``w`` passing a circular aperture of radius ``R``.

    Equals the regularized lower incomplete gamma function ``P(|ell| + 1, 2 R^2 / w^2)``.
    """
    if not R > 0 or not w > 0:
        raise ValueError("aperture radius and waist must be positive")
    if math.isinf(R):
        return 1.0
    return float(gammainc(abs(ell) + 1, 2.0 * R * R / (w * w)))


def clipping(space: ModeSpace, path: str, R: float, w: float = 1.0) -> Operator:
    """Diagonal attenuation ``sqrt(T(ell))`` on ``path``; the clipped power goes to the sink."""
    space.check_path(path)
    sink = space.sink_index
    m = np.eye(space.dim, dtype=complex)
    for lab in space.labels:
        if lab.path != path:
            continue
        j = space.index(lab)
        t = aperture_transmission(lab.ell, R, w)
        m[j, j] = math.sqrt(t)
        m[sink, j] = math.sqrt(max(0.0, 1.0 - t))
    return Operator(space, m)


def _mzi_sector(ell: int, ratio_error: float, phase_error: float) -> np.ndarray:
    # 2x2 (a, b) transfer of BS . diag(e^{i phi}, (-1)^ell) . BS, ell preserved
    t = math.sqrt(0.5 + ratio_error)
    r = 1j * math.sqrt(0.5 - ratio_error)
    bs = np.array([[t, r], [r, t]])
    arms = np.diag([np.exp(1j * phase_error), (-1.0) ** ell])
    return bs @ arms @ bs


def _sector_calibration(ell: int) -> np.ndarray:
    # output-port phases that turn the ideal sector transfer into the black-box sorter
    ideal = _mzi_sector(ell, 0.0, 0.0)
    if ell % 2:
        target = np.eye(2)
    else:
        target = -np.array([[0, 1], [1, 0]])
    return target @ np.linalg.inv(ideal)


def oam_bs_mzi(space: ModeSpace, path_a: str, path_b: str,
               ratio_error: float = 0.0, phase_error: float = 0.0) -> Operator:
    """Parity sorter as an interferometer with a splitting-ratio error and an
    extra phase in arm ``a``.

    Per ``ell`` sector the transfer is two beamsplitters around a relative
    arm phase ``ell * pi``, followed by fixed output phases chosen so the
    error-free limit is exactly :func:`~oamcycle.components.oam_bs_blackbox`.
    """
    space.check_path(path_a)
    space.check_path(path_b)
    if path_a == path_b:
        raise ModeSpaceError("two-path element needs distinct paths")
    port = {path_a: 0, path_b: 1}
    names = (path_a, path_b)
    cache = {}

    def col(lab):
        if lab.path not in port:
            return [(lab.path, lab.ell, lab.pol, 1.0)]
        if lab.ell not in cache:
            cache[lab.ell] = _sector_calibration(lab.ell) @ _mzi_sector(lab.ell, ratio_error, phase_error)
        u = cache[lab.ell]
        k = port[lab.path]
        return [(names[i], lab.ell, lab.pol, u[i, k]) for i in (0, 1)]

    return operator_from_map(space, col)


def imperfect_circuit(circuit: Circuit, params: ImperfectionParams,
                      waist: float = 1.0) -> Operator:
    """Operator of ``circuit`` with every element replaced by its imperfect version.

    Beamsplitters get the ratio error, each parity sorter gets the ratio error
    and the arm phase error, and each spiral phase plate is preceded by
    aperture clipping on its path.  Lost probability ends in the sink.
    """
    space = circuit.space
    ops = []
    for el in circuit.elements:
        if el.kind is Kind.BS:
            ops.append(beamsplitter(space, *el.paths, ratio_error=params.bs_ratio_error))
        elif el.kind is Kind.OAMBS:
            if params.bs_ratio_error == 0 and params.phase_error == 0:
                ops.append(element_operator(space, el))
            else:
                ops.append(oam_bs_mzi(space, *el.paths, params.bs_ratio_error, params.phase_error))
        elif el.kind is Kind.SPP:
            if not math.isinf(params.aperture_radius):
                ops.append(clipping(space, el.paths[0], params.aperture_radius, waist))
            ops.append(element_operator(space, el))
        else:
            ops.append(element_operator(space, el))
    return compose_all(space, ops)


def crosstalk_matrix(op: Operator, input_set: Sequence[ModeLabel],
                     output_set: Sequence[ModeLabel], coupling_decay: float = 1.0) -> np.ndarray:
    """Detected power ``c**|ell_o| * |<o|U|i>|**2``; rows follow ``output_set``."""
    space = op.space
    rows = [space.index(lab) for lab in output_set]
    cols = [space.index(lab) for lab in input_set]
    p = np.abs(op.matrix[np.ix_(rows, cols)]) ** 2
    scale = np.array([coupling_decay ** abs(ModeLabel(*lab).ell) for lab in output_set])
    return p * scale[:, None]


def efficiency(crosstalk: np.ndarray, input_index: int, correct_index: int) -> float:
    """``I_c / I_total`` for one input column."""
    column = crosstalk[:, input_index]
    total = float(column.sum())
    if total <= 0:
        raise ZeroDivisionError(f"input column {input_index} collects no power")
    return float(column[correct_index]) / total


@dataclass
class EfficiencyReport:
    ells: tuple[int, ...]
    crosstalk: np.ndarray
    efficiencies: dict[int, float]
    throughput: dict[int, float]

    def to_dict(self) -> dict:
        return {
            "ells": list(self.ells),
            "crosstalk": self.crosstalk.tolist(),
            "efficiency": {str(k): v for k, v in self.efficiencies.items()},
            "throughput": {str(k): v for k, v in self.throughput.items()},
        }


def efficiency_report(op: Operator, ells: Sequence[int] = INNER_CYCLE, in_path: str = "a",
                      out_path: str = "a", coupling_decay: float = 1.0) -> EfficiencyReport:
    """Crosstalk and per-input efficiency for the cycle on ``ells``.

    Outputs are indexed in the same ``ell`` order as the inputs; the correct
    output for ``ell`` is ``cycle_successor(ell)``.  ``throughput`` is the
    detected correct-mode power relative to the input power.
    """
    ells = tuple(ells)
    pol = "H" if op.space.pol_enabled else None
    inputs = [ModeLabel(in_path, l, pol) for l in ells]
    outputs = [ModeLabel(out_path, l, pol) for l in ells]
    xt = crosstalk_matrix(op, inputs, outputs, coupling_decay)
    effs = {}
    thru = {}
    for j, l in enumerate(ells):
        succ = cycle_successor(l)
        if succ not in ells:
            raise ValueError(f"successor {succ} of {l} is not among the designated modes")
        k = ells.index(succ)
        effs[l] = efficiency(xt, j, k)
        thru[l] = float(xt[k, j])
    return EfficiencyReport(ells, xt, effs, thru)


SWEEP_PARAMS = tuple(f.name for f in fields(ImperfectionParams))


def sweep(circuit: Circuit, param: str, values: Iterable[float],
          base: ImperfectionParams | None = None, ells: Sequence[int] = INNER_CYCLE,
          in_path: str = "a", out_path: str = "a") -> list[dict]:
    """One row per grid point: every parameter plus ``E_<ell>`` per input."""
    if param not in SWEEP_PARAMS:
        raise ValueError(f"unknown parameter {param!r}; choose from {SWEEP_PARAMS}")
    base = base or ImperfectionParams()
    rows = []
    for v in values:
        params = replace(base, **{param: float(v)})
        op = imperfect_circuit(circuit, params)
        rep = efficiency_report(op, ells, in_path, out_path, params.coupling_decay)
        row = {name: getattr(params, name) for name in SWEEP_PARAMS}
        row.update({f"E_{l}": rep.efficiencies[l] for l in ells})
        rows.append(row)
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (f"{v:.12g}" if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def reference_efficiencies() -> dict:
    """Measured efficiencies shipped as experimental reference data (not model output)."""
    text = resources.files("oamcycle").joinpath("data/measured_efficiency.json").read_text()
    return json.loads(text)
