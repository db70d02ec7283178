"""LG(p=0) intensity/phase images and phase-winding measurement."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping

import numpy as np


def lg_field(ell: int, x: np.ndarray, y: np.ndarray, waist: float = 1.0) -> np.ndarray:
    """Normalized LG(p=0, ell) field at ``z = 0``."""
    r2 = x * x + y * y
    a = abs(ell)
    norm = math.sqrt(2.0 / (math.pi * math.factorial(a))) / waist
    radial = (np.sqrt(2.0 * r2) / waist) ** a * np.exp(-r2 / waist ** 2)
    return norm * radial * np.exp(1j * ell * np.arctan2(y, x))


def grid_coords(grid: int, extent: float) -> tuple[np.ndarray, np.ndarray]:
    # pixel grid//2 sits exactly on the optical axis
    step = 2.0 * extent / grid
    c = (np.arange(grid) - grid // 2) * step
    return np.meshgrid(c, -c)


def render_mode(ell: int | Mapping[int, complex], grid: int = 128, waist: float = 1.0,
                extent: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(intensity, phase)`` arrays of shape ``(grid, grid)``.

    ``ell`` may be a single OAM value or a mapping ``{ell: amplitude}`` for a
    superposition; fields are summed before taking modulus and argument.
    Intensity is scaled to peak 1; phase lies in ``(-pi, pi]``.  ``extent``
    is the half-width of the field of view and defaults to ``3 * waist``.
    """
    if grid < 16:
        raise ValueError("grid must be at least 16 pixels")
    if not waist > 0:
        raise ValueError("waist must be positive")
    if extent is None:
        extent = 3.0 * waist
    if not extent > 0:
        raise ValueError("extent must be positive")
    weights = {int(ell): 1.0} if isinstance(ell, (int, np.integer)) else dict(ell)
    x, y = grid_coords(grid, extent)
    field = np.zeros((grid, grid), dtype=complex)
    for l, w in weights.items():
        field += w * lg_field(l, x, y, waist)
    intensity = np.abs(field) ** 2
    peak = intensity.max()
    if peak > 0:
        intensity = intensity / peak
    return intensity, np.angle(field)


def accumulated_phase(phase: np.ndarray, radius: float | None = None, samples: int = 720) -> float:
    """Unwrapped phase gathered once around a centered ring (counter-clockwise)."""
    n = phase.shape[0]
    c = n // 2
    if radius is None:
        radius = n / 4
    if radius < 1 or c + radius > n - 1 or c - radius < 0:
        raise ValueError(f"ring of radius {radius} px exits the {n}x{n} grid")
    t = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    cols = np.rint(c + radius * np.cos(t)).astype(int)
    rows = np.rint(c - radius * np.sin(t)).astype(int)
    ring = phase[rows, cols]
    steps = np.diff(np.append(ring, ring[0]))
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    return float(steps.sum())


def phase_winding(phase: np.ndarray, radius: float | None = None) -> int:
    return int(round(accumulated_phase(phase, radius) / (2 * np.pi)))


def write_pgm(path: str | Path, values: np.ndarray, lo: float, hi: float) -> None:
    """Plain (P2) 16-bit PGM with ``[lo, hi]`` mapped to ``[0, 65535]``."""
    scaled = np.clip((np.asarray(values, dtype=float) - lo) / (hi - lo), 0.0, 1.0)
    data = np.rint(scaled * 65535).astype(int)
    h, w = data.shape
    lines = ["P2", f"{w} {h}", "65535"]
    lines.extend(" ".join(map(str, row)) for row in data)
    Path(path).write_text("\n".join(lines) + "\n")


def read_pgm(path: str | Path) -> np.ndarray:
    tokens = [t for line in Path(path).read_text().splitlines()
              if not line.startswith("#") for t in line.split()]
    if tokens[0] != "P2":
        raise ValueError("not a plain PGM file")
    w, h, _ = int(tokens[1]), int(tokens[2]), int(tokens[3])
    return np.array(tokens[4:4 + w * h], dtype=int).reshape(h, w)


def save_mode_images(prefix: str | Path, intensity: np.ndarray, phase: np.ndarray,
                     csv: bool = False) -> list[Path]:
    prefix = str(prefix)
    out = [Path(prefix + "_intensity.pgm"), Path(prefix + "_phase.pgm")]
    write_pgm(out[0], intensity, 0.0, 1.0)
    write_pgm(out[1], phase, -np.pi, np.pi)
    if csv:
        for name, arr in (("intensity", intensity), ("phase", phase)):
            p = Path(f"{prefix}_{name}.csv")
            np.savetxt(p, arr, delimiter=",", fmt="%.10g")
            out.append(p)
    return out
