"""Geometric objects: parametrized varieties and implicit hypersurfaces.

A parametrized variety holds one polynomial per ambient coordinate; its
affine cone's tangent frame at a parameter value is the point together
with all parameter partials.  Implicit hypersurfaces supply gradient
covectors and Hessians for conormal constructions.  Samplers are seeded
and deterministic; draws where the point vanishes or the frame rank
falls below the recorded generic rank are discarded and redrawn.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .linalg import Matrix, primitive_vector, rank
from .poly import MultiPoly, PolyError
from .rng import spawn
from .scalars import EXACT, ExactBackend


class VarietyError(ValueError):
    pass


class BasePointError(VarietyError):
    pass


class NotOnVarietyError(VarietyError):
    pass


class SingularPointError(VarietyError):
    pass


class SampleBudgetError(VarietyError):
    pass


@dataclass(frozen=True)
class TangentFrame:
    """Affine-cone tangent frame: the point plus all parameter partials."""

    point: tuple
    vectors: tuple  # rows; vectors[0] is the point
    assignment: tuple  # ((param, value), ...)

    def matrix(self, backend=EXACT) -> Matrix:
        return Matrix(self.vectors, backend)

    def assignment_dict(self) -> dict:
        return dict(self.assignment)


class ParamVariety:
    """Projective variety given by a polynomial parametrization of its cone."""

    __slots__ = ("name", "params", "coords", "fiber_linear", "_cache")

    def __init__(self, name: str, params: Sequence[str], coords: Sequence[MultiPoly],
                 fiber_linear: Optional[Sequence[str]] = None):
        params = tuple(params)
        coords = tuple(coords)
        if not coords:
            raise VarietyError("no coordinates")
        for c in coords:
            if c.vars != params:
                raise VarietyError("coordinate variables must equal the parameter list")
        if not any(coords):
            raise VarietyError("all coordinates are zero")
        detected = tuple(
            p for p in params
            if any(c.degree_in(p) == 1 for c in coords)
            and all(c.degree_in(p) <= 1 for c in coords)
        )
        if fiber_linear is None:
            fiber_linear = detected
        else:
            fiber_linear = tuple(fiber_linear)
            bad = set(fiber_linear) - set(detected)
            if bad:
                raise VarietyError(f"parameters {sorted(bad)} are not fiber-linear")
        self.name = name
        self.params = params
        self.coords = coords
        self.fiber_linear = fiber_linear
        self._cache = {}

    @property
    def ambient_dim(self) -> int:
        return len(self.coords)

    @property
    def nparams(self) -> int:
        return len(self.params)

    def joint_fiber_block(self) -> tuple:
        """Largest usable set of fiber-linear parameters that are *jointly* linear.

        Falls back to a single parameter when products between
        fiber-linear parameters occur in some coordinate.
        """
        block = self.fiber_linear
        if not block:
            return ()
        idx = [self.params.index(p) for p in block]
        for c in self.coords:
            for exp in c.terms:
                if sum(exp[i] for i in idx) > 1:
                    return (block[0],)
        return block

    def evaluate_point(self, assignment, backend=EXACT) -> tuple:
        return tuple(c.evaluate(assignment, backend) for c in self.coords)

    def partials(self):
        cached = self._cache.get("partials")
        if cached is None:
            cached = tuple(
                tuple(c.partial(p) for c in self.coords) for p in self.params
            )
            self._cache["partials"] = cached
        return cached

    def cone_tangent_frame(self, assignment, backend=EXACT) -> TangentFrame:
        point = self.evaluate_point(assignment, backend)
        if all(backend.is_zero(x) for x in point):
            raise BasePointError(f"parametrization vanishes at {assignment}")
        rows = [point]
        for prow in self.partials():
            rows.append(tuple(q.evaluate(assignment, backend) for q in prow))
        items = tuple(sorted(assignment.items()))
        return TangentFrame(point, tuple(rows), items)

    def sample_frames(self, count: int, seed: int, backend=EXACT, height_bound: int = 100):
        """Frames at `count` sampled parameter points (the verification protocol)."""
        return [
            self.cone_tangent_frame(a, backend)
            for a in sample_points(self, count, seed, height_bound)
        ]

    def __repr__(self):
        return f"ParamVariety({self.name!r}, dim~{self.nparams}, ambient {self.ambient_dim})"


def cone_tangent_frame(x: ParamVariety, assignment, backend=EXACT) -> TangentFrame:
    return x.cone_tangent_frame(assignment, backend)


def jacobian_rank_at(x: ParamVariety, assignment) -> int:
    frame = x.cone_tangent_frame(assignment)
    return rank(frame.matrix())


def generic_cone_rank(x: ParamVariety, probes: int = 20) -> int:
    """Majority frame rank over seeded probes; recorded once per variety."""
    cached = x._cache.get("generic_rank")
    if cached is not None:
        return cached
    counts: dict = {}
    done = 0
    index = 0
    while done < probes and index < probes * 30:
        rng = spawn(104729, index)
        index += 1
        assignment = {p: rng.fraction(50) for p in x.params}
        try:
            r = jacobian_rank_at(x, assignment)
        except BasePointError:
            continue
        counts[r] = counts.get(r, 0) + 1
        done += 1
    if not counts:
        raise SampleBudgetError(f"could not probe generic rank of {x.name}")
    best = max(counts.items(), key=lambda kv: (kv[1], kv[0]))[0]
    x._cache["generic_rank"] = best
    return best


def sample_points(x: ParamVariety, count: int, seed: int, height_bound: int = 100,
                  max_tries: int = 60):
    """Deterministic parameter assignments at generic-rank points."""
    if count < 1:
        raise VarietyError("count must be at least 1")
    generic = generic_cone_rank(x)
    out = []
    for i in range(count):
        rng = spawn(seed, i)
        for _ in range(max_tries):
            assignment = {p: rng.fraction(height_bound) for p in x.params}
            try:
                frame = x.cone_tangent_frame(assignment)
            except BasePointError:
                continue
            if rank(frame.matrix()) < generic:
                continue
            out.append(assignment)
            break
        else:
            raise SampleBudgetError(f"sampling budget exhausted for {x.name}")
    return out


@dataclass(frozen=True)
class DimensionEstimate:
    value: int
    rank_histogram: tuple  # ((rank, hits), ...) ascending
    evaluated: int
    inconclusive: bool


def dimension_profile(x: ParamVariety, nsamples: int = 20, seed: int = 0) -> DimensionEstimate:
    """Projective dimension estimate: max sampled cone rank, minus one."""
    if nsamples < 1:
        raise VarietyError("nsamples must be at least 1")
    hist: dict = {}
    evaluated = 0
    for i in range(nsamples):
        rng = spawn(seed, i)
        assignment = {p: rng.fraction(100) for p in x.params}
        try:
            r = jacobian_rank_at(x, assignment)
        except BasePointError:
            continue
        hist[r] = hist.get(r, 0) + 1
        evaluated += 1
    if evaluated == 0:
        return DimensionEstimate(-1, (), 0, True)
    value = max(hist) - 1
    return DimensionEstimate(value, tuple(sorted(hist.items())), evaluated, False)


def dimension_estimate(x: ParamVariety, nsamples: int = 20, seed: int = 0) -> int:
    return dimension_profile(x, nsamples, seed).value


class ImplicitHypersurface:
    """Hypersurface cut out by one homogeneous polynomial."""

    __slots__ = ("name", "poly", "_cache")

    def __init__(self, name: str, poly: MultiPoly):
        if not poly:
            raise VarietyError("zero polynomial")
        if not poly.is_homogeneous():
            raise VarietyError("polynomial must be homogeneous")
        if poly.is_constant():
            raise VarietyError("polynomial must be nonconstant")
        self.name = name
        self.poly = poly
        self._cache = {}

    @property
    def vars(self):
        return self.poly.vars

    @property
    def ambient_dim(self) -> int:
        return len(self.poly.vars)

    @property
    def degree(self) -> int:
        return self.poly.total_degree()

    def gradient(self):
        g = self._cache.get("grad")
        if g is None:
            g = tuple(self.poly.partial(v) for v in self.vars)
            self._cache["grad"] = g
        return g

    def hessian(self):
        h = self._cache.get("hess")
        if h is None:
            g = self.gradient()
            h = tuple(tuple(gi.partial(v) for v in self.vars) for gi in g)
            self._cache["hess"] = h
        return h

    def value_at(self, w, backend=EXACT):
        assignment = dict(zip(self.vars, w))
        return self.poly.evaluate(assignment, backend)

    def gradient_at(self, w, backend=EXACT) -> tuple:
        assignment = dict(zip(self.vars, w))
        return tuple(g.evaluate(assignment, backend) for g in self.gradient())

    def hessian_at(self, w, backend=EXACT) -> Matrix:
        assignment = dict(zip(self.vars, w))
        return Matrix(
            [[e.evaluate(assignment, backend) for e in row] for row in self.hessian()],
            backend,
        )

    def __repr__(self):
        return f"ImplicitHypersurface({self.name!r}, deg {self.degree}, P^{self.ambient_dim - 1})"


def conormal_covector(z: ImplicitHypersurface, w, backend=EXACT) -> tuple:
    """Gradient covector at a smooth point of the hypersurface.

    Annihilates the point itself (the defining polynomial is
    homogeneous) and every tangent direction at it.
    """
    value = z.value_at(w, backend)
    if not backend.is_zero(value):
        raise NotOnVarietyError(f"point is not on {z.name}: residual {value}")
    grad = z.gradient_at(w, backend)
    if all(backend.is_zero(g) for g in grad):
        raise SingularPointError(f"gradient vanishes at {tuple(w)}")
    return grad


def _line_restriction(z: ImplicitHypersurface, u, v) -> MultiPoly:
    lam = MultiPoly.variable(("lam",), "lam")
    bindings = {}
    for name, ui, vi in zip(z.vars, u, v):
        bindings[name] = MultiPoly.const(("lam",), ui) + lam * vi
    return z.poly.substitute(bindings)


def hypersurface_point_sampler(z: ImplicitHypersurface, count: int, seed: int,
                               backend=EXACT, height_bound: int = 100):
    """Points on the hypersurface from random rational line slices.

    The exact backend keeps only rational roots of the sliced
    polynomial; the approximate backend refines every isolated real
    root and keeps points whose scaled residual is below tolerance.
    Smooth points only: draws with vanishing gradient are discarded.
    """
    from .poly import isolate_real_roots, newton_refine
    from .linalg import normalize_approx_vector

    if count < 1:
        raise VarietyError("count must be at least 1")
    exact = isinstance(backend, ExactBackend)
    points = []
    seen = set()
    budget = max(count * 20, 60)
    for i in range(budget):
        if len(points) >= count:
            break
        rng = spawn(seed, i)
        u = [rng.fraction(height_bound) for _ in range(z.ambient_dim)]
        v = [rng.fraction(height_bound) for _ in range(z.ambient_dim)]
        if not any(u) or not any(v):
            continue
        restricted = _line_restriction(z, u, v)
        if not restricted or restricted.is_constant():
            continue
        try:
            roots = isolate_real_roots(restricted)
        except PolyError:
            continue
        for record in roots:
            if len(points) >= count:
                break
            if exact:
                if record.value is None:
                    continue
                w = tuple(ui + record.value * vi for ui, vi in zip(u, v))
                if not any(w):
                    continue
                w = primitive_vector(w)
                grad = z.gradient_at(w)
                if all(g == 0 for g in grad):
                    continue
                if w in seen:
                    continue
                seen.add(w)
                points.append(w)
            else:
                lam0 = record.approx(backend)
                lam = newton_refine(restricted, lam0, backend)
                w = tuple(
                    backend.add(backend.convert(ui), backend.mul(lam, backend.convert(vi)))
                    for ui, vi in zip(u, v)
                )
                w = normalize_approx_vector(w, backend)
                grad = z.gradient_at(w, backend)
                gnorm = max((abs(g) for g in grad), default=backend.zero())
                if backend.is_zero(gnorm):
                    continue
                residual = abs(z.value_at(w, backend))
                if residual < backend.mul(backend.tolerance, gnorm):
                    points.append(w)
    if len(points) < count:
        raise SampleBudgetError(
            f"found {len(points)}/{count} points on {z.name} within the slice budget"
        )
    return points
