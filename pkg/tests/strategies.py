import math

from hypothesis import strategies as st

from oamcycle.components import ANGLE_KINDS, POL_KINDS, TWO_PATH_KINDS, Circuit, Element, Kind
from oamcycle.modespace import ModeSpace

PATH_NAMES = ["a", "b", "c", "arm_1", "X"]


@st.composite
def spaces(draw):
    n = draw(st.integers(1, 4))
    paths = draw(st.lists(st.sampled_from(PATH_NAMES), min_size=n, max_size=n, unique=True))
    lo = draw(st.integers(-9, 0))
    hi = draw(st.integers(lo + 1, 9))
    return ModeSpace(lo, hi, tuple(paths), draw(st.booleans()))


@st.composite
def elements(draw, space):
    kinds = [k for k in Kind if space.pol_enabled or k not in POL_KINDS]
    if len(space.paths) < 2:
        kinds = [k for k in kinds if k not in TWO_PATH_KINDS]
    kind = draw(st.sampled_from(kinds))
    if kind in TWO_PATH_KINDS:
        paths = tuple(draw(st.lists(st.sampled_from(space.paths), min_size=2, max_size=2, unique=True)))
    else:
        paths = (draw(st.sampled_from(space.paths)),)
    charge = angle = None
    if kind is Kind.SPP:
        charge = draw(st.integers(-9, 9).filter(bool))
    elif kind in ANGLE_KINDS:
        # degrees with at most 6 significant digits
        angle = math.radians(draw(st.integers(-36000, 36000)) / 100)
    return Element(kind, paths, charge=charge, angle=angle)


@st.composite
def circuits(draw, max_size=12):
    space = draw(spaces())
    els = draw(st.lists(elements(space), max_size=max_size))
    return Circuit(space, tuple(els))
