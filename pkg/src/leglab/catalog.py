"""Built-in varieties: the cubic-form family and demo sources.

The subadjoint-type entries all come from one recipe: a homogeneous
cubic N on u variables yields the parametrization

    w  |->  (1, w, grad N(w), N(w))

in ambient dimension 2u + 2.  No symplectic form is assumed for these:
the attached form is fitted from sampled frames on first use, and an
entry is only served when the fit is one-dimensional with a
nondegenerate generator and the Legendrian check passes.  The demo
sources back the conormal-lift pipeline; the Kummer quartic is derived
exactly from a genus-2 sextic with rational branch points, and its 16
nodes ship in the entry metadata (verified singular at build time).
"""

from __future__ import annotations

import re
import threading
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .conormal import ConormalLiftVariety, build_conormal_lift
from .linalg import primitive_vector
from .poly import MultiPoly, parse_poly, poly_det
from .rng import child_seed
from .scalars import EXACT
from .symplectic import FitResult, SymplecticForm, fit_symplectic_form, standard_form
from .variety import (
    ImplicitHypersurface,
    ParamVariety,
    SampleBudgetError,
    dimension_estimate,
    sample_points,
)
from .verify import VerificationReport, check_legendrian


class CatalogError(ValueError):
    pass


def cubic_form_variety(name: str, cubic: MultiPoly) -> ParamVariety:
    """The uniform recipe (1, w, grad N(w), N(w)) for a homogeneous cubic N.

    Correctness as a Legendrian variety is established afterwards by
    fitting a form and running the Legendrian check, never assumed.
    """
    if not cubic or cubic.is_constant():
        raise CatalogError("cubic form must be nonzero and nonconstant")
    if not cubic.is_homogeneous() or cubic.total_degree() != 3:
        raise CatalogError("the recipe needs a homogeneous cubic")
    params = cubic.vars
    coords = [MultiPoly.const(params, 1)]
    coords += [MultiPoly.variable(params, p) for p in params]
    coords += [cubic.partial(p) for p in params]
    coords.append(cubic)
    return ParamVariety(name, params, tuple(coords))


# ---------------------------------------------------------------------------
# cubic forms for the named entries


def _det3_vars(names) -> MultiPoly:
    vs = tuple(names)
    m = [[MultiPoly.variable(vs, names[3 * i + j]) for j in range(3)] for i in range(3)]
    return poly_det(m)


def _sym_det3() -> MultiPoly:
    names = ("d1", "d2", "d3", "o1", "o2", "o3")
    v = {n: MultiPoly.variable(names, n) for n in names}
    m = [
        [v["d1"], v["o3"], v["o2"]],
        [v["o3"], v["d2"], v["o1"]],
        [v["o2"], v["o1"], v["d3"]],
    ]
    return poly_det(m)


def _pfaffian6() -> MultiPoly:
    names = tuple(f"p{i}{j}" for i in range(1, 7) for j in range(i + 1, 7))
    entry = {}
    for i in range(1, 7):
        for j in range(i + 1, 7):
            entry[(i, j)] = MultiPoly.variable(names, f"p{i}{j}")

    def a(i, j):
        if i == j:
            return MultiPoly.zero(names)
        if i < j:
            return entry[(i, j)]
        return -entry[(j, i)]

    def pf(idx):
        if not idx:
            return MultiPoly.const(names, 1)
        i0 = idx[0]
        rest = idx[1:]
        acc = MultiPoly.zero(names)
        for k, j in enumerate(rest):
            term = a(i0, j) * pf(tuple(x for x in rest if x != j))
            if k % 2:
                term = -term
            acc = acc + term
        return acc

    return pf(tuple(range(1, 7)))


def _p1xq_cubic(m: int) -> MultiPoly:
    if m < 1:
        raise CatalogError("quadric factor needs at least one variable")
    names = ("t0",) + tuple(f"x{i}" for i in range(1, m + 1))
    t0 = MultiPoly.variable(names, "t0")
    q = MultiPoly.zero(names)
    for i in range(1, m + 1):
        xi = MultiPoly.variable(names, f"x{i}")
        q = q + xi * xi
    return t0 * q


# ---------------------------------------------------------------------------
# the Kummer quartic family


def _divide_by_x_minus_u(p: MultiPoly) -> MultiPoly:
    """Exact quotient of a polynomial in (x, u) by (x - u); remainder must vanish."""
    xi = p.vars.index("x")
    by_x: dict = {}
    for exp, c in p.terms.items():
        k = exp[xi]
        rest = list(exp)
        rest[xi] = 0
        by_x.setdefault(k, {})[tuple(rest)] = c
    top = max(by_x) if by_x else 0
    u = MultiPoly.variable(p.vars, "u")

    def coeff(k):
        return MultiPoly(p.vars, by_x.get(k, {}))

    q: dict = {}
    carry = MultiPoly.zero(p.vars)
    for k in range(top, 0, -1):
        qk = coeff(k) + u * carry
        q[k - 1] = qk
        carry = qk
    remainder = coeff(0) + u * carry
    if remainder:
        raise CatalogError("polynomial is not divisible by (x - u)")
    x = MultiPoly.variable(p.vars, "x")
    acc = MultiPoly.zero(p.vars)
    for k, qk in q.items():
        acc = acc + qk * x**k
    return acc


def _symmetric_to_xi(p: MultiPoly, degree: int, xi_vars) -> MultiPoly:
    """Rewrite a symmetric polynomial in (x, u) as a homogeneous form in
    (xi1, xi2, xi3) = (1, x + u, x u) of the given degree, by exact linear solve."""
    from .linalg import Matrix, solve_linear

    two = p.vars
    x = MultiPoly.variable(two, "x")
    u = MultiPoly.variable(two, "u")
    s, pr = x + u, x * u
    monos = []
    expansions = []
    for b in range(degree + 1):
        for c in range(degree + 1 - b):
            a = degree - b - c
            monos.append((a, b, c))
            expansions.append(s**b * pr**c)
    keys = sorted({e for q in expansions + [p] for e in q.terms})
    a_rows = [[q.terms.get(k, Fraction(0)) for q in expansions] for k in keys]
    rhs = [p.terms.get(k, Fraction(0)) for k in keys]
    sol = solve_linear(Matrix(a_rows), rhs)
    if sol.kind == "none":
        raise CatalogError("symmetric rewrite failed")
    coeffs = sol.particular
    out = {}
    for (a, b, c), coeff in zip(monos, coeffs):
        if coeff:
            out[(a, b, c, 0)] = coeff
    return MultiPoly(xi_vars, out)


def kummer_quartic(a=1, b=2, c=3):
    """A Kummer quartic surface with sixteen rational nodes.

    Derived from the genus-2 curve Y^2 = prod (X - r) over the six
    rational branch points (a, -a, b, -b, c, -c): the image quartic of
    the Jacobian's two-torsion quotient, in coordinates
    (1, sum, product, secant-slope) of unordered point pairs.  Returns
    (hypersurface, nodes); every node is verified singular exactly.
    """
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    roots = [a, -a, b, -b, c, -c]
    if len({abs(r) for r in roots}) != 3 or any(r == 0 for r in roots):
        raise CatalogError("parameters must have three distinct nonzero absolute values")
    # f = prod (X - r), by convolution; f[k] is the X^k coefficient
    dense = [Fraction(1)]
    for r in roots:
        nxt = [Fraction(0)] * (len(dense) + 1)
        for i, ci in enumerate(dense):
            nxt[i + 1] += ci
            nxt[i] -= r * ci
        dense = nxt
    f = dense  # f[k] = coefficient of X^k, degree 6, monic

    two = ("x", "u")
    x = MultiPoly.variable(two, "x")
    u = MultiPoly.variable(two, "u")
    s, pr = x + u, x * u
    f0, f1, f2, f3, f4, f5, f6 = f
    big_f0 = (
        MultiPoly.const(two, 2 * f0)
        + s * f1
        + pr * (2 * f2)
        + s * pr * f3
        + pr**2 * (2 * f4)
        + s * pr**2 * f5
        + pr**3 * (2 * f6)
    )
    fx = MultiPoly.zero(two)
    fu = MultiPoly.zero(two)
    for k, ck in enumerate(f):
        fx = fx + x**k * ck
        fu = fu + u**k * ck
    g = big_f0 * big_f0 - fx * fu * 4
    h = _divide_by_x_minus_u(_divide_by_x_minus_u(g))

    xi = ("x", "y", "z", "w")
    k2 = parse_poly("y^2 - 4*x*z", xi)
    k1 = _symmetric_to_xi(-(big_f0 + big_f0), 3, xi)
    k0 = _symmetric_to_xi(h, 4, xi)
    w_var = MultiPoly.variable(xi, "w")
    quartic = k2 * w_var**2 + k1 * w_var + k0
    surface = ImplicitHypersurface("kummer", quartic)

    def f0_at(p_, q_):
        return big_f0.evaluate({"x": p_, "u": q_})

    nodes = [(0, 0, 0, 1)]
    for i in range(6):
        for j in range(i + 1, 6):
            ri, rj = roots[i], roots[j]
            xi4 = f0_at(ri, rj) / (ri - rj) ** 2
            nodes.append(primitive_vector((1, ri + rj, ri * rj, xi4)))
    if len(nodes) != 16:
        raise CatalogError("expected sixteen nodes")
    for node in nodes:
        if surface.value_at(node) != 0:
            raise CatalogError(f"node {node} is not on the quartic")
        if any(gv != 0 for gv in surface.gradient_at(node)):
            raise CatalogError(f"node {node} is not singular")
    return surface, tuple(nodes)


# ---------------------------------------------------------------------------
# entries


@dataclass
class CatalogEntry:
    """A served variety with its expected dimensions and attached form."""

    name: str
    kind: str  # parametrized | hypersurface | lift
    variety: object
    expected_dim: int
    expected_ambient: int
    builder_params: dict = field(default_factory=dict)
    attached_form: Optional[SymplecticForm] = None
    lift: Optional[ConormalLiftVariety] = None
    source: Optional[object] = None
    singular_points: tuple = ()
    notes: str = ""
    _fit: Optional[FitResult] = None
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def fit_result(self, seed: int = 0) -> FitResult:
        if self.kind != "parametrized":
            raise CatalogError(f"{self.name} carries an attached form; nothing to fit")
        with self._lock:
            if self._fit is None:
                self._fit = _fit_entry_form(self.variety, seed)
            return self._fit

    def form(self, seed: int = 0) -> SymplecticForm:
        if self.attached_form is not None:
            return self.attached_form
        fit = self.fit_result(seed)
        if fit.dim != 1:
            raise CatalogError(
                f"{self.name}: fitted solution space has dimension {fit.dim}, expected 1"
            )
        if not fit.nondegenerate:
            raise CatalogError(f"{self.name}: fitted family is degenerate")
        return fit.generator_form()


FIT_SAMPLE_HEIGHT = 10


def fit_frame_stream(x: ParamVariety, seed: int = 0, budget: Optional[int] = None):
    """Lazy frames for form fitting: up to 3 x (number of unknown entries).

    Low-height samples keep the exact linear algebra small; the fit
    consumes only as many frames as it needs for its rank to settle.
    """
    d = x.ambient_dim
    if budget is None:
        budget = 3 * (d * (d - 1) // 2)
    produced = 0
    index = 0
    while produced < budget and index < budget * 4:
        try:
            pts = sample_points(x, 1, child_seed(seed, index), height_bound=FIT_SAMPLE_HEIGHT)
        except SampleBudgetError:
            break
        index += 1
        produced += 1
        yield x.cone_tangent_frame(pts[0]).vectors


def _fit_entry_form(x: ParamVariety, seed: int) -> FitResult:
    return fit_symplectic_form(fit_frame_stream(x, seed))


_CACHE: dict = {}
_CACHE_LOCK = threading.Lock()

_BASE_NAMES = (
    "twisted_cubic",
    "p1xQ",
    "gr36",
    "lg36",
    "spinor6",
    "conic_conormal_demo",
    "nodal_cubic",
    "kummer",
)


def catalog_names():
    return list(_BASE_NAMES)


def _build_entry(name: str, params: dict) -> CatalogEntry:
    if name == "twisted_cubic":
        coords = tuple(parse_poly(src, ["t"]) for src in ("1", "t", "t^2", "t^3"))
        return CatalogEntry(
            name, "parametrized", ParamVariety("twisted_cubic", ("t",), coords),
            expected_dim=1, expected_ambient=4,
        )
    if name == "p1xQ":
        m = int(params.get("m", 3))
        x = cubic_form_variety(f"p1xQ({m})", _p1xq_cubic(m))
        return CatalogEntry(
            name, "parametrized", x, expected_dim=m + 1, expected_ambient=2 * m + 4,
            builder_params={"m": m},
            notes="one hyperplane reduction is expected to land in dimension m",
        )
    if name == "gr36":
        names = tuple(f"m{i}{j}" for i in range(1, 4) for j in range(1, 4))
        x = cubic_form_variety("gr36", _det3_vars(names))
        return CatalogEntry(name, "parametrized", x, expected_dim=9, expected_ambient=20)
    if name == "lg36":
        x = cubic_form_variety("lg36", _sym_det3())
        return CatalogEntry(name, "parametrized", x, expected_dim=6, expected_ambient=14)
    if name == "spinor6":
        x = cubic_form_variety("spinor6", _pfaffian6())
        return CatalogEntry(name, "parametrized", x, expected_dim=15, expected_ambient=32)
    if name == "conic_conormal_demo":
        conic = ParamVariety(
            "conic", ("t",), tuple(parse_poly(src, ["t"]) for src in ("1", "t", "t^2"))
        )
        lift = build_conormal_lift(conic)
        pv = lift.to_param_variety()
        conic_eq = ImplicitHypersurface(
            "conic", parse_poly("x0*x2 - x1^2", ["x0", "x1", "x2"])
        )
        return CatalogEntry(
            name, "lift", pv, expected_dim=2, expected_ambient=6,
            attached_form=lift.split_form(), lift=lift, source=conic_eq,
            notes="conormal lift of the plane conic; scale is fiber-linear",
        )
    if name == "nodal_cubic":
        nodal = ImplicitHypersurface(
            "nodal_cubic", parse_poly("z*y^2 - x^3 - x^2*z", ["x", "y", "z"])
        )
        points = ParamVariety(
            "nodal_cubic_points", ("t",),
            tuple(parse_poly(src, ["t"]) for src in ("t^2-1", "t^3-t", "1")),
        )
        return CatalogEntry(
            name, "hypersurface", nodal, expected_dim=1, expected_ambient=3,
            singular_points=((0, 0, 1),), source=points,
            notes="rational nodal plane cubic; node at (0,0,1)",
        )
    if name == "kummer":
        a = params.get("a", 1)
        b = params.get("b", 2)
        c = params.get("c", 3)
        surface, nodes = kummer_quartic(a, b, c)
        return CatalogEntry(
            name, "hypersurface", surface, expected_dim=2, expected_ambient=4,
            builder_params={"a": a, "b": b, "c": c}, singular_points=nodes,
            notes="Kummer quartic with sixteen rational nodes; approximate backend recommended",
        )
    raise CatalogError(f"unknown catalog name {name!r}")


_NAME_RE = re.compile(r"^([A-Za-z0-9_]+)(?:\(([^)]*)\))?$")


def parse_catalog_name(text: str):
    m = _NAME_RE.match(text.strip())
    if not m:
        raise CatalogError(f"bad catalog name {text!r}")
    name, arglist = m.group(1), m.group(2)
    params: dict = {}
    if arglist:
        values = [v.strip() for v in arglist.split(",") if v.strip()]
        if name == "p1xQ":
            params["m"] = int(values[0])
        elif name == "kummer":
            keys = ("a", "b", "c")
            for k, v in zip(keys, values):
                params[k] = Fraction(v)
        else:
            raise CatalogError(f"{name} takes no parameters")
    return name, params


def catalog_get(name: str, params: Optional[dict] = None) -> CatalogEntry:
    """Build (or fetch from cache) a named entry and validate its dimensions."""
    if params is None:
        name, params = parse_catalog_name(name)
    if name not in _BASE_NAMES:
        raise CatalogError(f"unknown catalog name {name!r}")
    key = (name, tuple(sorted((k, str(v)) for k, v in params.items())))
    with _CACHE_LOCK:
        if key in _CACHE:
            return _CACHE[key]
    entry = _build_entry(name, params)
    _validate_entry(entry)
    with _CACHE_LOCK:
        _CACHE.setdefault(key, entry)
        return _CACHE[key]


def _validate_entry(entry: CatalogEntry):
    if entry.kind in ("parametrized", "lift"):
        x: ParamVariety = entry.variety
        if x.ambient_dim != entry.expected_ambient:
            raise CatalogError(
                f"{entry.name}: ambient {x.ambient_dim} != expected {entry.expected_ambient}"
            )
        est = dimension_estimate(x)
        if est != entry.expected_dim:
            raise CatalogError(
                f"{entry.name}: dimension estimate {est} != expected {entry.expected_dim}"
            )
    else:
        z: ImplicitHypersurface = entry.variety
        if z.ambient_dim != entry.expected_ambient:
            raise CatalogError(f"{entry.name}: wrong ambient dimension")
        for p in entry.singular_points:
            if z.value_at(p) != 0 or any(g != 0 for g in z.gradient_at(p)):
                raise CatalogError(f"{entry.name}: listed point {p} is not a node")


def self_check(entry: CatalogEntry, nsamples: int = 50, seed: int = 0) -> VerificationReport:
    """The serving gate.

    Parametrized entries: the fitted solution space must be exactly
    one-dimensional with a nondegenerate generator, and the Legendrian
    check must pass at `nsamples` exact samples.  Lift entries run the
    Legendrian check under their attached split form.  Hypersurface
    entries re-verify their singular-point metadata.
    """
    t0 = time.perf_counter()
    if entry.kind == "hypersurface":
        report = VerificationReport(
            operation="self_check",
            variety=entry.name,
            backend="exact",
            seed=seed,
            samples_requested=len(entry.singular_points),
        )
        z: ImplicitHypersurface = entry.variety
        ok = True
        for p in entry.singular_points:
            report.samples_evaluated += 1
            if z.value_at(p) != 0 or any(g != 0 for g in z.gradient_at(p)):
                ok = False
                report.add_witness(kind="bad_node", point=[str(v) for v in p])
        report.details["nodes_checked"] = len(entry.singular_points)
        report.timings["seconds"] = time.perf_counter() - t0
        return report.close(ok)
    if entry.kind == "parametrized":
        fit = entry.fit_result(seed)
        if fit.dim != 1:
            raise CatalogError(
                f"{entry.name}: fit solution space dimension {fit.dim} (expected 1)"
            )
        if not fit.nondegenerate:
            raise CatalogError(f"{entry.name}: fitted family is degenerate")
    form = entry.form(seed)
    report = check_legendrian(entry.variety, form, nsamples, seed)
    report.operation = "self_check"
    if entry.kind == "parametrized":
        fit = entry.fit_result(seed)
        report.details["fit_dimension"] = fit.dim
        report.details["fit_method"] = fit.method
        report.details["fit_frames"] = fit.frames_used
        report.details["fit_nondegenerate"] = fit.nondegenerate
    report.timings["seconds"] = time.perf_counter() - t0
    return report
