import math

import numpy as np
import pytest

from oamcycle.components import (Circuit, Element, ElementError, Kind, beamsplitter,
                                 build_circuit, dove_prism, element_operator, hybrid_cycle_circuit,
                                 mirror, mirror_el, oam_bs_blackbox, oam_bs_composed,
                                 paper_cycle_circuit, polarization_element, spiral_phase, spp)
from oamcycle.modespace import (ModeLabel, ModeSpace, ModeSpaceError, apply, basis_state,
                                compose, compose_all, is_unitary, mode_probabilities)
from oamcycle.verify import check_cycle, cycle_successor

S2 = 1 / math.sqrt(2)
L = ModeLabel


def out_of(op, label):
    return {k: v for k, v in enumerate(apply(op, basis_state(op.space, label)).amps) if abs(v) > 1e-14}


def single(op, label):
    """(label, amplitude) of a column that must land on exactly one mode."""
    nz = out_of(op, label)
    assert len(nz) == 1
    (i, amp), = nz.items()
    return op.space.label(i), amp


def test_spiral_phase(space):
    u = spiral_phase(space, "a", 1)
    assert single(u, ("a", -2)) == (L("a", -1), 1)
    assert single(u, ("a", 0)) == (L("a", 1), 1)
    back = compose(spiral_phase(space, "a", -1), u)
    for l in range(space.l_min, space.l_max):
        assert single(back, ("a", l)) == (L("a", l), 1)
    with pytest.raises(ModeSpaceError):
        spiral_phase(space, "a", 0)
    with pytest.raises(ModeSpaceError):
        spiral_phase(space, "q", 1)


def test_mirror(space):
    m = mirror(space, "a")
    assert single(m, ("a", 2)) == (L("a", -2), 1)
    assert single(m, ("a", 0)) == (L("a", 0), 1)
    three = compose_all(space, [m, m, m])
    assert np.array_equal(three.matrix, m.matrix)


def test_dove(space):
    d = dove_prism(space, "a", 0.0)
    assert single(d, ("a", 1)) == (L("a", -1), 1)
    lab, amp = single(dove_prism(space, "a", math.pi), ("a", 2))
    assert lab == L("a", -2) and abs(amp - 1) < 1e-12
    # relative rotation pi/2 between two arms -> relative phase (-1)^ell
    for l in range(-4, 5):
        _, pa = single(dove_prism(space, "a", 0.3), ("a", l))
        _, pb = single(dove_prism(space, "a", 0.3 + math.pi / 2), ("a", l))
        assert abs(pb / pa - (-1) ** l) < 1e-12


def test_beamsplitter(space):
    u = beamsplitter(space, "a", "b")
    nz = out_of(u, ("a", 0))
    assert nz == pytest.approx({space.index(("a", 0)): S2, space.index(("b", 0)): 1j * S2})
    nz = out_of(u, ("a", 1))
    assert nz == pytest.approx({space.index(("a", 1)): S2, space.index(("b", -1)): 1j * S2})
    assert is_unitary(u, 1e-12).is_unitary
    with pytest.raises(ModeSpaceError):
        beamsplitter(space, "a", "a")


def test_blackbox_examples(space):
    u = oam_bs_blackbox(space, "a", "b")
    assert single(u, ("a", 1)) == (L("a", 1), 1)
    assert single(u, ("a", 0)) == (L("b", 0), -1)
    assert single(u, ("b", 2)) == (L("a", 2), -1)
    flip = oam_bs_blackbox(space, "a", "b", flip_cross=True)
    assert single(flip, ("b", 2)) == (L("a", -2), -1)


def test_parity_sorting_contract(space):
    u = oam_bs_blackbox(space, "a", "b")
    for l in space.ells:
        for p, q in (("a", "b"), ("b", "a")):
            lab, amp = single(u, (p, l))
            assert lab.path == (p if l % 2 else q)
            assert abs(amp) == 1


def test_composed_matches_flip_reading(space):
    comp = oam_bs_composed(space, "a", "b")
    ref = oam_bs_blackbox(space, "a", "b", flip_cross=True)
    assert np.max(np.abs(np.abs(comp.matrix) - np.abs(ref.matrix))) <= 1e-12
    assert single(comp, ("a", 3))[0].path == "a"
    assert single(comp, ("a", -2))[0].path == "b"


def test_composed_path_powers_match_default_blackbox(space):
    comp = oam_bs_composed(space, "a", "b")
    ref = oam_bs_blackbox(space, "a", "b")
    for lab in space.labels:
        pc, pr = {}, {}
        for k, v in mode_probabilities(apply(comp, basis_state(space, lab)), 1e-20).items():
            pc[k.path] = pc.get(k.path, 0) + v
        for k, v in mode_probabilities(apply(ref, basis_state(space, lab)), 1e-20).items():
            pr[k.path] = pr.get(k.path, 0) + v
        assert pc == pytest.approx(pr, abs=1e-12)


def test_paper_circuit_with_either_reading_or_composed_sorter(space):
    readings = {
        "amplitude": lambda: oam_bs_blackbox(space, "a", "b"),
        "flip": lambda: oam_bs_blackbox(space, "a", "b", flip_cross=True),
        "composed": lambda: oam_bs_composed(space, "a", "b"),
    }
    for name, sorter in readings.items():
        op = compose_all(space, [spiral_phase(space, "a", 1), sorter(), mirror(space, "b"), sorter()])
        rep = check_cycle(op, "a", [-2, -1, 0, 1])
        assert rep.is_cycle, name


def _pol_space():
    return ModeSpace(-2, 2, ("a", "b"), pol_enabled=True)


def test_waveplates():
    sp = _pol_space()
    h0 = polarization_element(sp, Kind.HWP, ["a"], 0.0)
    assert single(h0, ("a", 1, "H")) == (("a", 1, "H"), 1)
    lab, amp = single(h0, ("a", 1, "V"))
    assert lab == ("a", 1, "V") and abs(amp + 1) < 1e-15
    h45 = polarization_element(sp, "hwp", ["a"], math.pi / 4)
    assert single(h45, ("a", 0, "H"))[0] == ("a", 0, "V")
    assert single(h45, ("a", 0, "V"))[0] == ("a", 0, "H")
    for ang in np.linspace(0, math.pi, 7):
        for kind in ("hwp", "qwp"):
            assert is_unitary(polarization_element(sp, kind, ["a"], ang), 1e-12).is_unitary


def test_pbs():
    sp = _pol_space()
    u = polarization_element(sp, "pbs", ["a", "b"])
    assert single(u, ("a", 1, "V")) == (("b", -1, "V"), 1)
    assert single(u, ("a", 1, "H")) == (("a", 1, "H"), 1)
    assert is_unitary(u, 1e-12).is_unitary


def test_polarization_errors(space):
    with pytest.raises(ModeSpaceError):
        polarization_element(space, "hwp", ["a"], 0.0)
    sp = _pol_space()
    with pytest.raises(ModeSpaceError):
        polarization_element(sp, "pbs", ["a"])
    with pytest.raises(ModeSpaceError):
        polarization_element(sp, "hwp", ["a", "b"], 0.0)


def test_element_validation(space):
    with pytest.raises(ElementError):
        Element(Kind.SPP, ("a",), charge=0)
    with pytest.raises(ElementError):
        Element(Kind.BS, ("a", "a"))
    with pytest.raises(ElementError):
        Element(Kind.MIRROR, ("a", "b"))
    with pytest.raises(ElementError):
        Element(Kind.DOVE, ("a",))
    with pytest.raises(ElementError):
        Circuit(space, (mirror_el("z"),))
    with pytest.raises(ElementError):
        Circuit(space, (Element(Kind.HWP, ("a",), angle=0.0),))


def test_off_target_paths_untouched():
    sp = ModeSpace(-3, 3, ("a", "b", "c"))
    for op in (spiral_phase(sp, "a", 2), mirror(sp, "a"), dove_prism(sp, "a", 0.7),
               beamsplitter(sp, "a", "b"), oam_bs_blackbox(sp, "a", "b")):
        idx = [sp.index(l) for l in sp.labels if l.path == "c"]
        block = op.matrix[np.ix_(idx, idx)]
        assert np.array_equal(block, np.eye(len(idx)))
        others = [i for i in range(sp.dim) if i not in idx]
        assert not op.matrix[np.ix_(others, idx)].any()
        assert not op.matrix[np.ix_(idx, others)].any()


def test_elements_unitary_inside_window(space):
    for op in (mirror(space, "a"), dove_prism(space, "b", 1.1), beamsplitter(space, "a", "b"),
               oam_bs_blackbox(space, "a", "b"), oam_bs_composed(space, "a", "b")):
        assert is_unitary(op, 1e-12).is_unitary


def test_build_circuit(space):
    assert np.array_equal(build_circuit(Circuit(space)).matrix, np.eye(space.dim))
    double = build_circuit(Circuit(space, (mirror_el("a"), mirror_el("a"))))
    assert np.array_equal(double.matrix, np.eye(space.dim))


def test_fold_equivalence(space, paper_op):
    c = paper_cycle_circuit(space)
    brute = np.eye(space.dim, dtype=complex)
    for el in c.elements:
        brute = element_operator(space, el).matrix @ brute
    assert np.max(np.abs(brute - paper_op.matrix)) <= 1e-12


@pytest.mark.parametrize("l_in, l_out", [(-2, -1), (1, -2), (0, 1), (-1, 0)])
def test_paper_circuit_examples(space, paper_op, l_in, l_out):
    lab, amp = single(paper_op, ("a", l_in))
    assert lab == L("a", l_out)
    assert abs(amp) ** 2 >= 1 - 1e-12
    assert l_out == cycle_successor(l_in)


def test_paper_circuit_structure(space):
    c = paper_cycle_circuit(space)
    assert [e.kind for e in c.elements] == [Kind.SPP, Kind.OAMBS, Kind.MIRROR, Kind.OAMBS]
    assert c.elements[0] == spp("a", 1)
    with pytest.raises(ModeSpaceError):
        paper_cycle_circuit(ModeSpace(-2, 2, ("a", "b")))
    with pytest.raises(ModeSpaceError):
        paper_cycle_circuit(ModeSpace(-4, 4, ("a", "c")))


def test_hybrid_eight_cycle():
    sp = ModeSpace(-8, 8, ("a", "b", "c"), pol_enabled=True)
    op = build_circuit(hybrid_cycle_circuit(sp))
    rep = check_cycle(op, "a", [-2, -1, 0, 1])
    assert rep.is_cycle and rep.order == 8
    assert rep.mapping[ModeLabel("a", 1, "V")] == ("a", -2, "H")
    assert rep.mapping[ModeLabel("a", -2, "H")] == ("a", -2, "V")
