"""Optical elements as operators on a :class:`~oamcycle.modespace.ModeSpace`.

Conventions used throughout:

* every physical reflection (mirror, beamsplitter reflection, PBS
  reflection) maps ``ell -> -ell``; beamsplitter reflections also carry ``i``;
* a Dove prism rotated by ``beta`` maps ``|ell> -> exp(2i ell beta) |-ell>``;
* circuits list elements in beam order, first element first.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .modespace import ModeSpace, ModeSpaceError, Operator, compose_all, operator_from_map

SQRT_HALF = 1.0 / math.sqrt(2.0)


class Kind(str, enum.Enum):
    SPP = "spp"
    MIRROR = "mirror"
    DOVE = "dove"
    BS = "bs"
    OAMBS = "oambs"
    HWP = "hwp"
    QWP = "qwp"
    PBS = "pbs"

    def __str__(self) -> str:
        return self.value


TWO_PATH_KINDS = frozenset({Kind.BS, Kind.OAMBS, Kind.PBS})
ANGLE_KINDS = frozenset({Kind.DOVE, Kind.HWP, Kind.QWP})
POL_KINDS = frozenset({Kind.HWP, Kind.QWP, Kind.PBS})


class ElementError(ValueError):
    pass


@dataclass(frozen=True)
class Element:
    """One optical element.  ``angle`` is in radians; ``charge`` only for SPP."""

    kind: Kind
    paths: tuple[str, ...]
    charge: int | None = None
    angle: float | None = None

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "paths", tuple(self.paths))
        arity = 2 if kind in TWO_PATH_KINDS else 1
        if len(self.paths) != arity:
            raise ElementError(f"{kind} takes {arity} path(s), got {len(self.paths)}")
        if arity == 2 and self.paths[0] == self.paths[1]:
            raise ElementError(f"{kind} needs two distinct paths")
        if kind is Kind.SPP:
            if self.charge is None or int(self.charge) != self.charge or self.charge == 0:
                raise ElementError("spiral phase plate needs a nonzero integer charge")
            object.__setattr__(self, "charge", int(self.charge))
        elif self.charge is not None:
            raise ElementError(f"{kind} takes no charge")
        if kind in ANGLE_KINDS:
            if self.angle is None:
                raise ElementError(f"{kind} needs an angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ElementError(f"{kind} takes no angle")


def spp(path: str, charge: int) -> Element:
    return Element(Kind.SPP, (path,), charge=charge)


def mirror_el(path: str) -> Element:
    return Element(Kind.MIRROR, (path,))


def dove_el(path: str, angle: float) -> Element:
    return Element(Kind.DOVE, (path,), angle=angle)


def bs_el(a: str, b: str) -> Element:
    return Element(Kind.BS, (a, b))


def oambs_el(a: str, b: str) -> Element:
    return Element(Kind.OAMBS, (a, b))


def hwp_el(path: str, angle: float) -> Element:
    return Element(Kind.HWP, (path,), angle=angle)


def qwp_el(path: str, angle: float) -> Element:
    return Element(Kind.QWP, (path,), angle=angle)


def pbs_el(a: str, b: str) -> Element:
    return Element(Kind.PBS, (a, b))


@dataclass(frozen=True)
class Circuit:
    space: ModeSpace
    elements: tuple[Element, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        for el in self.elements:
            for p in el.paths:
                if p not in self.space.paths:
                    raise ElementError(f"{el.kind} references unknown path {p!r}")
            if el.kind in POL_KINDS and not self.space.pol_enabled:
                raise ElementError(f"{el.kind} requires a polarization-enabled space")

    def __len__(self) -> int:
        return len(self.elements)

    def without(self, index: int) -> "Circuit":
        return Circuit(self.space, self.elements[:index] + self.elements[index + 1:])

    def extended(self, *elements: Element) -> "Circuit":
        return Circuit(self.space, self.elements + tuple(elements))


def _check_two(space: ModeSpace, a: str, b: str) -> None:
    space.check_path(a)
    space.check_path(b)
    if a == b:
        raise ModeSpaceError("two-path element needs distinct paths")


def spiral_phase(space: ModeSpace, path: str, charge: int) -> Operator:
    space.check_path(path)
    if charge == 0 or int(charge) != charge:
        raise ModeSpaceError("spiral phase charge must be a nonzero integer")

    def col(lab):
        if lab.path == path:
            return [(path, lab.ell + charge, lab.pol, 1.0)]
        return [(lab.path, lab.ell, lab.pol, 1.0)]

    return operator_from_map(space, col)


def mirror(space: ModeSpace, path: str) -> Operator:
    space.check_path(path)

    def col(lab):
        if lab.path == path:
            return [(path, -lab.ell, lab.pol, 1.0)]
        return [(lab.path, lab.ell, lab.pol, 1.0)]

    return operator_from_map(space, col)


def dove_prism(space: ModeSpace, path: str, beta: float) -> Operator:
    space.check_path(path)

    def col(lab):
        if lab.path == path:
            return [(path, -lab.ell, lab.pol, np.exp(2j * lab.ell * beta))]
        return [(lab.path, lab.ell, lab.pol, 1.0)]

    return operator_from_map(space, col)


def beamsplitter(space: ModeSpace, path_a: str, path_b: str,
                 ratio_error: float = 0.0) -> Operator:
    """Symmetric beamsplitter; transmission ``sqrt(0.5 + ratio_error)``, reflection ``i sqrt(0.5 - ratio_error)``."""
    _check_two(space, path_a, path_b)
    t = math.sqrt(0.5 + ratio_error)
    r = 1j * math.sqrt(0.5 - ratio_error)
    other = {path_a: path_b, path_b: path_a}

    def col(lab):
        if lab.path in other:
            return [(lab.path, lab.ell, lab.pol, t),
                    (other[lab.path], -lab.ell, lab.pol, r)]
        return [(lab.path, lab.ell, lab.pol, 1.0)]

    return operator_from_map(space, col)


def oam_bs_blackbox(space: ModeSpace, path_a: str, path_b: str,
                    flip_cross: bool = False) -> Operator:
    """Ideal OAM parity sorter.

    Odd ``ell`` stays on its input path; even ``ell`` crosses to the other
    path with amplitude -1.  With ``flip_cross`` the crossing mode also has
    its OAM sign inverted, which is what an interferometer built from
    reflecting beamsplitters actually produces.
    """
    _check_two(space, path_a, path_b)
    other = {path_a: path_b, path_b: path_a}

    def col(lab):
        if lab.path not in other:
            return [(lab.path, lab.ell, lab.pol, 1.0)]
        if lab.ell % 2:
            return [(lab.path, lab.ell, lab.pol, 1.0)]
        ell = -lab.ell if flip_cross else lab.ell
        return [(other[lab.path], ell, lab.pol, -1.0)]

    return operator_from_map(space, col)


def oam_bs_composed(space: ModeSpace, path_a: str, path_b: str, beta: float = 0.0) -> Operator:
    """Mach-Zehnder sorter assembled from two beamsplitters, two Dove prisms
    (rotated ``pi/2`` relative to each other) and one mirror per arm."""
    _check_two(space, path_a, path_b)
    return compose_all(space, [
        beamsplitter(space, path_a, path_b),
        dove_prism(space, path_a, beta),
        dove_prism(space, path_b, beta + math.pi / 2),
        mirror(space, path_a),
        mirror(space, path_b),
        beamsplitter(space, path_a, path_b),
    ])


def _rot(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def jones_matrix(kind: Kind | str, angle: float) -> np.ndarray:
    """Jones matrix in the (H, V) basis for a wave plate with fast axis at ``angle``."""
    kind = Kind(kind)
    if kind is Kind.HWP:
        retarder = np.diag([1.0, -1.0])
    elif kind is Kind.QWP:
        retarder = np.diag([1.0, 1j])
    else:
        raise ModeSpaceError(f"{kind} is not a wave plate")
    return _rot(angle) @ retarder @ _rot(-angle)


def polarization_element(space: ModeSpace, kind: Kind | str, paths: Sequence[str],
                         angle: float | None = None) -> Operator:
    """HWP/QWP on one path, or a PBS (H transmits, V reflects with ``ell -> -ell``)."""
    kind = Kind(kind)
    if not space.pol_enabled:
        raise ModeSpaceError(f"{kind} needs a polarization-enabled space")
    paths = tuple(paths)
    if kind is Kind.PBS:
        if len(paths) != 2:
            raise ModeSpaceError("pbs takes two paths")
        _check_two(space, *paths)
        other = {paths[0]: paths[1], paths[1]: paths[0]}

        def col(lab):
            if lab.path in other and lab.pol == "V":
                return [(other[lab.path], -lab.ell, "V", 1.0)]
            return [(lab.path, lab.ell, lab.pol, 1.0)]

        return operator_from_map(space, col)
    if kind not in (Kind.HWP, Kind.QWP):
        raise ModeSpaceError(f"{kind} is not a polarization element")
    if len(paths) != 1 or angle is None:
        raise ModeSpaceError(f"{kind} takes one path and an angle")
    (path,) = paths
    space.check_path(path)
    j = jones_matrix(kind, angle)
    pidx = {"H": 0, "V": 1}

    def col(lab):
        if lab.path != path:
            return [(lab.path, lab.ell, lab.pol, 1.0)]
        k = pidx[lab.pol]
        return [(path, lab.ell, "H", j[0, k]), (path, lab.ell, "V", j[1, k])]

    return operator_from_map(space, col)


@lru_cache(maxsize=4096)
def element_operator(space: ModeSpace, el: Element) -> Operator:
    kind = el.kind
    if kind in POL_KINDS:
        return polarization_element(space, kind, el.paths, el.angle)
    if kind is Kind.SPP:
        return spiral_phase(space, el.paths[0], el.charge)
    if kind is Kind.MIRROR:
        return mirror(space, el.paths[0])
    if kind is Kind.DOVE:
        return dove_prism(space, el.paths[0], el.angle)
    if kind is Kind.BS:
        return beamsplitter(space, *el.paths)
    if kind is Kind.OAMBS:
        return oam_bs_blackbox(space, *el.paths)
    raise ElementError(f"unhandled element kind {kind}")


def build_circuit(circuit: Circuit) -> Operator:
    space = circuit.space
    return compose_all(space, (element_operator(space, el) for el in circuit.elements))


def paper_cycle_circuit(space: ModeSpace | None = None) -> Circuit:
    """Hologram (+1), parity sorter, one mirror in the even arm, parity sorter.

    Input and output on path ``a``; both paths ``a`` and ``b`` are used
    between the two sorters.
    """
    if space is None:
        space = ModeSpace()
    if "a" not in space.paths or "b" not in space.paths:
        raise ModeSpaceError("the cycle circuit needs paths 'a' and 'b'")
    if space.l_min > -3 or space.l_max < 3:
        raise ModeSpaceError("the cycle circuit needs an ell window covering [-3, 3]")
    return Circuit(space, (spp("a", 1), oambs_el("a", "b"), mirror_el("b"), oambs_el("a", "b")))


def hybrid_cycle_circuit(space: ModeSpace | None = None) -> Circuit:
    """Eight-step cycle over ``ell in {-2,-1,0,1}`` x ``{H, V}`` on path ``a``.

    V light is diverted by a PBS to path ``c``, cycled there with the
    four-step cycle (using ``b`` as the second sorter arm), returned, and a
    half-wave plate at 45 degrees swaps H and V.  Net map:
    ``(ell, H) -> (ell, V) -> (next(ell), H)``.
    """
    if space is None:
        space = ModeSpace(-8, 8, ("a", "b", "c"), pol_enabled=True)
    if not space.pol_enabled or not {"a", "b", "c"} <= set(space.paths):
        raise ModeSpaceError("hybrid cycle needs a polarization space with paths a, b, c")
    return Circuit(space, (
        pbs_el("a", "c"), mirror_el("c"),
        spp("c", 1), oambs_el("c", "b"), mirror_el("b"), oambs_el("c", "b"),
        mirror_el("c"), pbs_el("a", "c"),
        hwp_el("a", math.pi / 4),
    ))
