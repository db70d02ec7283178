"""Discrete-mode OAM linear optics: simulate, verify and search for cyclic mode transformations."""

from .components import (Circuit, Element, Kind, build_circuit, hybrid_cycle_circuit,
                         paper_cycle_circuit)
from .modespace import ModeLabel, ModeSpace, apply, basis_state, compose, make_mode_space
from .verify import check_cycle, cycle_successor, enumerate_cycles

__all__ = [
    "Circuit", "Element", "Kind", "ModeLabel", "ModeSpace", "apply", "basis_state",
    "build_circuit", "check_cycle", "compose", "cycle_successor", "enumerate_cycles",
    "hybrid_cycle_circuit", "make_mode_space", "paper_cycle_circuit",
]

__version__ = "0.1.0"
