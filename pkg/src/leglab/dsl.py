"""The line-oriented variety definition format.

Parametrized varieties:

    variety "twisted_cubic"
    params t
    ambient 4
    coord 1
    coord t
    coord t^2
    coord t^3
    form fit

`params` may annotate fiber-linear parameters: ``params t, s [fiber: s]``.
`form` is ``standard``, ``fit`` (default) or ``explicit <json matrix>``
with entries integers or "p/q" strings.  Implicit hypersurfaces use an
alternative stanza (needed for the lift pipeline's quartic sources):

    variety "kummer"
    hvars x, y, z, w
    hypersurface <polynomial>
    singular 0 0 0 1

Polynomials follow the shared grammar (see the poly module).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .linalg import Matrix
from .poly import PolyError, parse_poly
from .scalars import format_rational, parse_rational_text
from .symplectic import SymplecticForm
from .variety import ImplicitHypersurface, ParamVariety


class DslError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass
class DslDocument:
    """A parsed definition: exactly one of `variety` or `hypersurface` is set."""

    name: str
    variety: Optional[ParamVariety] = None
    hypersurface: Optional[ImplicitHypersurface] = None
    form_mode: str = "fit"  # standard | fit | explicit
    explicit_form: Optional[SymplecticForm] = None
    singular_points: tuple = ()
    fiber_annotation: tuple = ()

    @property
    def kind(self) -> str:
        return "parametrized" if self.variety is not None else "hypersurface"


def _parse_params(body: str, lineno: int):
    fiber = ()
    if "[" in body:
        base, _, ann = body.partition("[")
        ann = ann.strip()
        if not ann.endswith("]"):
            raise DslError("unterminated fiber annotation", lineno)
        ann = ann[:-1].strip()
        if not ann.startswith("fiber:"):
            raise DslError("expected 'fiber:' inside the annotation", lineno)
        fiber = tuple(p.strip() for p in ann[len("fiber:"):].split(",") if p.strip())
        body = base
    names = tuple(p.strip() for p in body.split(",") if p.strip())
    if not names:
        raise DslError("empty parameter list", lineno)
    return names, fiber


def load_text(text: str) -> DslDocument:
    name = None
    params = None
    fiber = ()
    ambient = None
    coords = []
    hvars = None
    hpoly_src = None
    form_mode = None
    explicit_rows = None
    singular = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, _, body = line.partition(" ")
        body = body.strip()
        if head == "variety":
            if not (body.startswith('"') and body.endswith('"') and len(body) >= 2):
                raise DslError("variety name must be double-quoted", lineno)
            name = body[1:-1]
        elif head == "params":
            params, fiber = _parse_params(body, lineno)
        elif head == "ambient":
            ambient = int(body)
        elif head == "coord":
            if params is None:
                raise DslError("coord before params", lineno)
            try:
                coords.append(parse_poly(body, params))
            except PolyError as err:
                raise DslError(f"bad coordinate: {err}", lineno) from err
        elif head == "hvars":
            hvars = tuple(p.strip() for p in body.split(",") if p.strip())
        elif head == "hypersurface":
            if hvars is None:
                raise DslError("hypersurface before hvars", lineno)
            try:
                hpoly_src = parse_poly(body, hvars)
            except PolyError as err:
                raise DslError(f"bad hypersurface polynomial: {err}", lineno) from err
        elif head == "singular":
            try:
                singular.append(tuple(parse_rational_text(v) for v in body.split()))
            except ValueError as err:
                raise DslError(f"bad singular point: {err}", lineno) from err
        elif head == "form":
            mode, _, rest = body.partition(" ")
            if mode not in ("standard", "fit", "explicit"):
                raise DslError(f"unknown form mode {mode!r}", lineno)
            form_mode = mode
            if mode == "explicit":
                try:
                    explicit_rows = json.loads(rest)
                except json.JSONDecodeError as err:
                    raise DslError(f"bad form matrix: {err}", lineno) from err
        else:
            raise DslError(f"unknown directive {head!r}", lineno)
    if name is None:
        raise DslError("missing variety line")
    doc = DslDocument(name=name)
    if hpoly_src is not None:
        doc.hypersurface = ImplicitHypersurface(name, hpoly_src)
        doc.singular_points = tuple(singular)
        for p in doc.singular_points:
            if len(p) != doc.hypersurface.ambient_dim:
                raise DslError("singular point has the wrong length")
        return doc
    if params is None or not coords:
        raise DslError("parametrized variety needs params and coord lines")
    if ambient is not None and ambient != len(coords):
        raise DslError(f"ambient {ambient} but {len(coords)} coord lines")
    doc.variety = ParamVariety(name, params, tuple(coords),
                               fiber_linear=fiber if fiber else None)
    doc.fiber_annotation = fiber
    doc.form_mode = form_mode or "fit"
    if doc.form_mode == "explicit":
        if explicit_rows is None:
            raise DslError("explicit form mode needs a matrix")
        rows = [[parse_rational_text(str(v)) for v in row] for row in explicit_rows]
        doc.explicit_form = SymplecticForm(Matrix(rows))
    return doc


def load_file(path: str) -> DslDocument:
    with open(path, "r", encoding="utf-8") as fh:
        return load_text(fh.read())


def _form_matrix_json(form: SymplecticForm) -> str:
    rows = [[format_rational(v) for v in row] for row in form.matrix.entries]
    return json.dumps(rows, separators=(",", ":"))


def dump_parametrized(x: ParamVariety, form_mode: str = "fit",
                      explicit_form: Optional[SymplecticForm] = None) -> str:
    lines = [f'variety "{x.name}"']
    params = ", ".join(x.params)
    if x.fiber_linear:
        params += f" [fiber: {', '.join(x.fiber_linear)}]"
    lines.append(f"params {params}")
    lines.append(f"ambient {x.ambient_dim}")
    for c in x.coords:
        lines.append(f"coord {c.to_text()}")
    if form_mode == "explicit":
        lines.append(f"form explicit {_form_matrix_json(explicit_form)}")
    else:
        lines.append(f"form {form_mode}")
    return "\n".join(lines) + "\n"


def dump_hypersurface(z: ImplicitHypersurface, singular_points=()) -> str:
    lines = [f'variety "{z.name}"']
    lines.append(f"hvars {', '.join(z.vars)}")
    lines.append(f"hypersurface {z.poly.to_text()}")
    for p in singular_points:
        lines.append("singular " + " ".join(format_rational(v) for v in p))
    return "\n".join(lines) + "\n"


def dump_entry(entry) -> str:
    """Export a catalog entry in the definition format."""
    if entry.kind == "hypersurface":
        return dump_hypersurface(entry.variety, entry.singular_points)
    if entry.attached_form is not None:
        return dump_parametrized(entry.variety, "explicit", entry.attached_form)
    return dump_parametrized(entry.variety, "fit")
