"""Line-oriented setup files.

Example (the two-sorter cycle)::

    # space lmin=-8 lmax=8 paths=a,b pol=off
    spp a charge=+1
    oambs a b
    mirror b
    oambs a b

The ``# space`` header is required and may appear once.  Other lines
starting with ``#`` are comments.  Angles are written in degrees.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .components import ANGLE_KINDS, POL_KINDS, TWO_PATH_KINDS, Circuit, Element, Kind
from .modespace import ModeSpace, ModeSpaceError

_HEADER_RE = re.compile(r"^#\s*space\b")
_TOKEN_RE = re.compile(r"\S+")
_PATH_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class ParseError:
    line: int
    column: int
    message: str
    token: str = ""

    def __str__(self) -> str:
        tok = f" (at {self.token!r})" if self.token else ""
        return f"{self.line}:{self.column}: {self.message}{tok}"


class SetupParseError(ValueError):
    """Raised by :func:`parse_setup`; ``errors`` holds every problem found."""

    def __init__(self, errors: list[ParseError]):
        self.errors = list(errors)
        super().__init__("\n".join(str(e) for e in self.errors))


def _tokens(text: str):
    return [(m.group(0), m.start() + 1) for m in _TOKEN_RE.finditer(text)]


def _parse_header(lineno: int, raw: str, errors: list[ParseError]) -> ModeSpace | None:
    body = raw[raw.index("space") + len("space"):]
    offset = raw.index("space") + len("space")
    fields = {}
    for tok, col in _tokens(body):
        col += offset
        if "=" not in tok:
            errors.append(ParseError(lineno, col, "expected key=value in space header", tok))
            continue
        k, v = tok.split("=", 1)
        if k in fields:
            errors.append(ParseError(lineno, col, f"duplicate header key {k!r}", tok))
        fields[k] = (v, col, tok)
    missing = [k for k in ("lmin", "lmax", "paths") if k not in fields]
    if missing:
        errors.append(ParseError(lineno, 1, f"space header missing {', '.join(missing)}", raw.strip()))
        return None
    n_err = len(errors)
    ints = {}
    for k in ("lmin", "lmax"):
        v, col, tok = fields[k]
        try:
            ints[k] = int(v)
        except ValueError:
            errors.append(ParseError(lineno, col, f"{k} must be an integer", tok))
    paths = fields["paths"][0].split(",")
    for p in paths:
        if not _PATH_RE.match(p):
            errors.append(ParseError(lineno, fields["paths"][1], f"bad path name {p!r}", fields["paths"][2]))
    pol = False
    if "pol" in fields:
        v, col, tok = fields["pol"]
        if v not in ("on", "off"):
            errors.append(ParseError(lineno, col, "pol must be 'on' or 'off'", tok))
        pol = v == "on"
    for k, (v, col, tok) in fields.items():
        if k not in ("lmin", "lmax", "paths", "pol"):
            errors.append(ParseError(lineno, col, f"unknown header key {k!r}", tok))
    if len(errors) > n_err:
        return None
    try:
        return ModeSpace(ints["lmin"], ints["lmax"], tuple(paths), pol)
    except ModeSpaceError as exc:
        errors.append(ParseError(lineno, 1, str(exc), raw.strip()))
        return None


def _parse_element(lineno: int, toks, space: ModeSpace | None,
                   errors: list[ParseError]) -> Element | None:
    (kw, kcol), rest = toks[0], toks[1:]
    try:
        kind = Kind(kw)
    except ValueError:
        errors.append(ParseError(lineno, kcol, "unknown keyword", kw))
        return None
    positional = [(t, c) for t, c in rest if "=" not in t]
    options = [(t, c) for t, c in rest if "=" in t]
    n_paths = 2 if kind in TWO_PATH_KINDS else 1
    n_err = len(errors)
    if len(positional) != n_paths:
        col = positional[n_paths][1] if len(positional) > n_paths else kcol
        tok = positional[n_paths][0] if len(positional) > n_paths else kw
        errors.append(ParseError(lineno, col,
                                 f"{kind} takes {n_paths} path(s), got {len(positional)}", tok))
    paths = tuple(t for t, _ in positional[:n_paths])
    if space is not None:
        for t, c in positional[:n_paths]:
            if t not in space.paths:
                errors.append(ParseError(lineno, c, "unknown path", t))
        if kind in POL_KINDS and not space.pol_enabled:
            errors.append(ParseError(lineno, kcol, f"{kind} needs pol=on in the space header", kw))
    if n_paths == 2 and len(paths) == 2 and paths[0] == paths[1]:
        errors.append(ParseError(lineno, positional[1][1], f"{kind} needs two distinct paths", paths[1]))

    want = "charge" if kind is Kind.SPP else "angle_deg" if kind in ANGLE_KINDS else None
    charge = angle = None
    seen = set()
    for t, c in options:
        k, v = t.split("=", 1)
        if k != want:
            errors.append(ParseError(lineno, c, f"{kind} does not take {k!r}", t))
            continue
        if k in seen:
            errors.append(ParseError(lineno, c, f"repeated parameter {k!r}", t))
            continue
        seen.add(k)
        if k == "charge":
            if not re.fullmatch(r"[+-]?\d+", v):
                errors.append(ParseError(lineno, c, "charge must be an integer", t))
            elif int(v) == 0:
                errors.append(ParseError(lineno, c, "charge must be nonzero", t))
            else:
                charge = int(v)
        else:
            try:
                deg = float(v)
            except ValueError:
                errors.append(ParseError(lineno, c, "angle_deg must be a number", t))
                continue
            if not math.isfinite(deg):
                errors.append(ParseError(lineno, c, "angle_deg must be finite", t))
                continue
            angle = math.radians(deg)
    if want is not None and want not in seen:
        errors.append(ParseError(lineno, kcol, f"{kind} needs {want}=", kw))
    if len(errors) > n_err:
        return None
    return Element(kind, paths, charge=charge, angle=angle)


def parse_setup(text: str) -> Circuit:
    """Parse a setup file; raises :class:`SetupParseError` listing all errors."""
    errors: list[ParseError] = []
    space = None
    header_line = None
    pending = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        if _HEADER_RE.match(stripped):
            if header_line is not None:
                errors.append(ParseError(lineno, raw.index("#") + 1,
                                         f"duplicate space declaration (first on line {header_line})",
                                         stripped))
                continue
            header_line = lineno
            space = _parse_header(lineno, raw, errors)
            continue
        if stripped.startswith("#"):
            continue
        pending.append((lineno, _tokens(raw.split("#", 1)[0])))
    if header_line is None:
        errors.append(ParseError(1, 1, "missing '# space ...' header"))
    elements = []
    for lineno, toks in pending:
        el = _parse_element(lineno, toks, space, errors)
        if el is not None:
            elements.append(el)
    errors.sort(key=lambda e: (e.line, e.column))
    if errors:
        raise SetupParseError(errors)
    return Circuit(space, tuple(elements))


def _fmt_angle(rad: float) -> str:
    deg = math.degrees(rad)
    s = f"{deg:.6g}"
    return "0" if s in ("-0", "0") else s


def serialize_element(el: Element) -> str:
    parts = [el.kind.value, *el.paths]
    if el.kind is Kind.SPP:
        parts.append(f"charge={el.charge:+d}")
    elif el.kind in ANGLE_KINDS:
        parts.append(f"angle_deg={_fmt_angle(el.angle)}")
    return " ".join(parts)


def serialize_setup(circuit: Circuit) -> str:
    sp = circuit.space
    lines = [f"# space lmin={sp.l_min} lmax={sp.l_max} paths={','.join(sp.paths)} "
             f"pol={'on' if sp.pol_enabled else 'off'}"]
    lines.extend(serialize_element(el) for el in circuit.elements)
    return "\n".join(lines) + "\n"
