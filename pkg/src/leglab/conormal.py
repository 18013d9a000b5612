"""Conormal lifts: extending a source variety to a Legendrian one.

A source Z in P(W) lifts to X in P(W + W*), the closure of the pairs
(w, alpha) with w on Z and alpha annihilating the embedded tangent
space at w, taken up to a single overall scale.  Every lift point lands
on the incidence quadric sum_i w_i alpha_i = 0 and the lift is
Legendrian for the split form

    omega((w1, a1), (w2, a2)) = a2(w1) - a1(w2),

which in split coordinates is the standard block form.  For sources of
codimension >= 2 the conormal fiber directions are computed per sample
as a kernel basis (no global frame); for parametrized plane-curve-like
sources (codimension one) the lift is also available globally as a
parametrized variety, with the conormal given by signed maximal minors
and the relative scale as an explicit fiber-linear parameter.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .linalg import (
    Matrix,
    kernel_basis,
    normalize_approx_vector,
    primitive_vector,
    rank,
    solve_linear,
)
from .poly import MultiPoly, poly_det
from .rng import spawn
from .scalars import EXACT, ExactBackend, format_rational
from .symplectic import SymplecticForm, omega_eval, standard_form
from .variety import (
    ImplicitHypersurface,
    ParamVariety,
    SampleBudgetError,
    TangentFrame,
    VarietyError,
    generic_cone_rank,
    hypersurface_point_sampler,
    sample_points,
)
from .verify import (
    ReductionError,
    SectionSample,
    VerificationReport,
    hyperplane_reduce,
    section_sampler,
)


class ChartError(VarietyError):
    pass


@dataclass(frozen=True)
class LiftSample:
    """One sampled lift point (w, alpha) with its fiber data."""

    w: tuple
    alpha: tuple
    fiber_coords: tuple
    kernel_rows: tuple  # conormal directions at w, one row per fiber coordinate
    source_assignment: Optional[tuple]  # parameter values, when the source is parametrized
    index: int

    @property
    def point(self) -> tuple:
        return self.w + self.alpha

    def labels(self) -> tuple:
        items = list(self.source_assignment or ())
        items += [(f"s{j + 1}", v) for j, v in enumerate(self.fiber_coords)]
        return tuple(items)


class ConormalLiftVariety:
    """The conormal lift of a parametrized variety or implicit hypersurface."""

    __slots__ = ("source", "name", "sampling_points", "_cache")

    def __init__(self, source: Union[ParamVariety, ImplicitHypersurface],
                 name: Optional[str] = None,
                 sampling_points: Optional[ParamVariety] = None):
        self.source = source
        self.name = name or f"{source.name}~conormal"
        # optional rational parametrization used only to generate points of an
        # implicit source (the conormal data still comes from the gradient)
        self.sampling_points = sampling_points
        self._cache = {}

    # -- structure -----------------------------------------------------

    @property
    def dim_w(self) -> int:
        return self.source.ambient_dim

    @property
    def ambient_dim(self) -> int:
        return 2 * self.dim_w

    @property
    def is_hypersurface(self) -> bool:
        return isinstance(self.source, ImplicitHypersurface)

    @property
    def codim(self) -> int:
        if self.is_hypersurface:
            return 1
        return self.dim_w - generic_cone_rank(self.source)

    @property
    def lift_dim(self) -> int:
        """The lift is always a (dim P(W))-fold."""
        return self.dim_w - 1

    def split_form(self) -> SymplecticForm:
        form = self._cache.get("form")
        if form is None:
            form = standard_form(self.dim_w)
            self._cache["form"] = form
        return form

    # -- sampling -------------------------------------------------------

    def sample(self, count: int, seed: int, backend=EXACT, fiber_height: int = 10):
        if self.is_hypersurface:
            return self._sample_hypersurface(count, seed, backend, fiber_height)
        return self._sample_parametrized(count, seed, backend, fiber_height)

    def _fiber_draw(self, rng, c: int, fiber_height: int):
        while True:
            coords = tuple(rng.fraction(fiber_height) for _ in range(c))
            if any(coords):
                return coords

    def _sample_hypersurface(self, count, seed, backend, fiber_height):
        z: ImplicitHypersurface = self.source
        exact = isinstance(backend, ExactBackend)
        if self.sampling_points is not None and exact:
            points = []
            assignments = sample_points(self.sampling_points, count * 2, seed)
            for a in assignments:
                w = primitive_vector(self.sampling_points.evaluate_point(a))
                if any(g != 0 for g in z.gradient_at(w)):
                    points.append(w)
                if len(points) >= count:
                    break
            if len(points) < count:
                raise SampleBudgetError(f"not enough smooth points on {z.name}")
        else:
            points = hypersurface_point_sampler(z, count, seed, backend)
        out = []
        for i, w in enumerate(points):
            rng = spawn(seed ^ 0x5EED, i)
            s = rng.nonzero_fraction(fiber_height)
            grad = z.gradient_at(w, backend)
            if exact:
                alpha = tuple(Fraction(s) * g for g in grad)
            else:
                sc = backend.convert(s)
                alpha = tuple(backend.mul(sc, g) for g in grad)
            out.append(LiftSample(tuple(w), alpha, (s,), (tuple(grad),), None, i))
        return out

    def _sample_parametrized(self, count, seed, backend, fiber_height):
        x: ParamVariety = self.source
        c = self.codim
        if c < 1:
            raise VarietyError(f"{x.name} already fills its ambient space; no conormal fiber")
        assignments = sample_points(x, count, seed)
        out = []
        for i, a in enumerate(assignments):
            frame = x.cone_tangent_frame(a)
            kern = kernel_basis(frame.matrix())
            if len(kern) != c:
                # non-immersive point: kernel dimension jumped; skip, flagged later
                continue
            kern = [primitive_vector(v) for v in kern]
            rng = spawn(seed ^ 0x5EED, i)
            coords = self._fiber_draw(rng, c, fiber_height)
            alpha = [Fraction(0)] * self.dim_w
            for s, row in zip(coords, kern):
                if s:
                    alpha = [av + s * rv for av, rv in zip(alpha, row)]
            if not any(alpha):
                continue
            w = tuple(Fraction(v) for v in frame.point)
            if not isinstance(backend, ExactBackend):
                w = tuple(backend.convert(v) for v in w)
                alpha = [backend.convert(v) for v in alpha]
            out.append(
                LiftSample(w, tuple(alpha), coords, tuple(kern), tuple(sorted(a.items())), i)
            )
        if len(out) < count:
            raise SampleBudgetError(
                f"only {len(out)}/{count} immersive lift samples on {self.name}"
            )
        return out

    # -- frames ----------------------------------------------------------

    def _second_partials(self):
        cached = self._cache.get("d2")
        if cached is None:
            x: ParamVariety = self.source
            rows = {}
            for i, pi in enumerate(x.params):
                for j, pj in enumerate(x.params):
                    if j < i:
                        continue
                    rows[(i, j)] = tuple(c.partial(pi).partial(pj) for c in x.coords)
            cached = rows
            self._cache["d2"] = cached
        return cached

    def lift_tangent_frame(self, sample: LiftSample, backend=EXACT) -> TangentFrame:
        """Frame spanning the lift's cone tangent at the sample.

        The point, the fiber (conormal) directions padded with a zero
        w-part, and one mixed row per source direction whose alpha-part
        solves the differentiated conormal constraints.
        """
        if self.is_hypersurface:
            return self._hypersurface_frame(sample, backend)
        return self._parametrized_frame(sample, backend)

    def _hypersurface_frame(self, sample, backend):
        z: ImplicitHypersurface = self.source
        zero = backend.zero()
        w, alpha = sample.w, sample.alpha
        grad = sample.kernel_rows[0]
        grad = tuple(backend.convert(g) for g in grad)
        s = backend.convert(sample.fiber_coords[0])
        rows = [tuple(backend.convert(v) for v in w) + tuple(backend.convert(a) for a in alpha)]
        rows.append(tuple([zero] * self.dim_w) + grad)
        hess = z.hessian_at(w, backend)
        tangents = kernel_basis(Matrix([grad], backend))
        for v in tangents:
            hv = hess.mat_vec(v)
            rows.append(tuple(v) + tuple(backend.mul(s, x) for x in hv))
        point = rows[0]
        return TangentFrame(point, tuple(rows), sample.labels())

    def _parametrized_frame(self, sample, backend):
        x: ParamVariety = self.source
        zero = backend.zero()
        assignment = dict(sample.source_assignment)
        frame = x.cone_tangent_frame(assignment, backend)
        z = frame.vectors[0]
        partials = frame.vectors[1:]
        alpha = tuple(backend.convert(a) for a in sample.alpha)
        rows = [tuple(backend.convert(v) for v in z) + alpha]
        for kern_row in sample.kernel_rows:
            rows.append(tuple([zero] * self.dim_w) + tuple(backend.convert(v) for v in kern_row))
        d2 = self._second_partials()
        m = Matrix(frame.vectors, backend)
        for i in range(len(x.params)):
            rhs = [zero]
            for j in range(len(x.params)):
                key = (min(i, j), max(i, j))
                second = tuple(p.evaluate(assignment, backend) for p in d2[key])
                acc = zero
                for av, sv in zip(alpha, second):
                    acc = backend.add(acc, backend.mul(av, sv))
                rhs.append(backend.neg(acc))
            sol = solve_linear(m, rhs)
            if sol.kind not in ("unique", "family"):
                raise VarietyError("mixed tangent solve failed at a lift sample")
            gamma = sol.particular
            rows.append(tuple(partials[i]) + tuple(gamma))
        point = rows[0]
        return TangentFrame(point, tuple(rows), sample.labels())

    def sample_frames(self, count: int, seed: int, backend=EXACT):
        return [self.lift_tangent_frame(s, backend) for s in self.sample(count, seed, backend)]

    # -- global parametrized realization ---------------------------------

    def to_param_variety(self) -> ParamVariety:
        """Explicit lift parametrization (codimension-one parametrized sources).

        Coordinates (z(t), s * minors(t)) where the conormal direction is
        the vector of signed maximal minors of the tangent frame; the
        scale s is fiber-linear, so hyperplane sections solve linearly.
        """
        cached = self._cache.get("param")
        if cached is not None:
            return cached
        if self.is_hypersurface or self.codim != 1:
            raise VarietyError(
                "global lift parametrization needs a parametrized codimension-one source"
            )
        x: ParamVariety = self.source
        params = x.params + ("s",)
        coords = [c.restrict_vars(params) for c in x.coords]
        rows = [list(x.coords)] + [
            [c.partial(p) for c in x.coords] for p in x.params
        ]
        s_poly = MultiPoly.variable(params, "s")
        for j in range(self.dim_w):
            minor_rows = [
                [row[k] for k in range(self.dim_w) if k != j] for row in rows
            ]
            det = poly_det(minor_rows)
            sign = 1 if j % 2 == 0 else -1
            coords.append(s_poly * (det * sign).restrict_vars(params))
        cached = ParamVariety(self.name, params, tuple(coords))
        self._cache["param"] = cached
        return cached

    def __repr__(self):
        return f"ConormalLiftVariety({self.name!r}, P^{self.ambient_dim - 1})"


def build_conormal_lift(source, name=None, sampling_points=None) -> ConormalLiftVariety:
    """Validate the source and wrap it as a conormal lift.

    Parametrized sources must be immersive at generic points and leave
    a nonzero conormal fiber; hypersurface sources must be nonconstant
    homogeneous (already enforced by their type).
    """
    if isinstance(source, ParamVariety):
        r = generic_cone_rank(source)
        if r != source.nparams + 1:
            raise VarietyError(f"{source.name} is not immersive at generic points")
        if source.ambient_dim - r < 1:
            raise VarietyError(f"{source.name} has no conormal directions")
    elif not isinstance(source, ImplicitHypersurface):
        raise VarietyError("source must be a parametrized variety or implicit hypersurface")
    return ConormalLiftVariety(source, name, sampling_points)


def incidence_quadric_residual(point: Sequence, backend=EXACT):
    """The pairing sum_i w_i alpha_i on W + W*; zero on every lift point."""
    n2 = len(point)
    if n2 % 2:
        raise VarietyError("point must live in a split even-dimensional space")
    half = n2 // 2
    acc = backend.zero()
    for i in range(half):
        acc = backend.add(
            acc, backend.mul(backend.convert(point[i]), backend.convert(point[half + i]))
        )
    return acc


def torus_action_check(lift: ConormalLiftVariety, sample: LiftSample, t,
                       backend=EXACT) -> bool:
    """Does scaling (w, alpha) -> (t w, alpha/t) stay on the lift?

    Verified by re-evaluating the lift at the same source point with
    fiber coordinates divided by t^2 and comparing projectively.
    """
    t = Fraction(t) if isinstance(backend, ExactBackend) else backend.convert(t)
    if isinstance(backend, ExactBackend):
        if t == 0:
            raise VarietyError("scale must be nonzero")
        candidate = tuple(t * Fraction(v) for v in sample.w) + tuple(
            Fraction(a) / t for a in sample.alpha
        )
        rescaled_alpha = [Fraction(0)] * lift.dim_w
        t2 = t * t
        for s, row in zip(sample.fiber_coords, sample.kernel_rows):
            c = Fraction(s) / t2
            if c:
                rescaled_alpha = [av + c * rv for av, rv in zip(rescaled_alpha, row)]
        rebuilt = tuple(Fraction(v) for v in sample.w) + tuple(rescaled_alpha)
        rebuilt = tuple(t * v for v in rebuilt)
        return primitive_vector(candidate) == primitive_vector(rebuilt)
    if backend.is_zero(t):
        raise VarietyError("scale must be nonzero")
    candidate = tuple(backend.mul(t, backend.convert(v)) for v in sample.w) + tuple(
        backend.div(backend.convert(a), t) for a in sample.alpha
    )
    t2 = backend.mul(t, t)
    rescaled = [backend.zero()] * lift.dim_w
    for s, row in zip(sample.fiber_coords, sample.kernel_rows):
        c = backend.div(backend.convert(s), t2)
        for k, rv in enumerate(row):
            rescaled[k] = backend.add(rescaled[k], backend.mul(c, backend.convert(rv)))
    rebuilt = tuple(backend.mul(t, backend.convert(v)) for v in sample.w) + tuple(
        backend.mul(t, v) for v in rescaled
    )
    cn = normalize_approx_vector(candidate, backend)
    rn = normalize_approx_vector(rebuilt, backend)
    diff = max(abs(backend.sub(a, b)) for a, b in zip(cn, rn))
    neg = max(abs(backend.add(a, b)) for a, b in zip(cn, rn))
    return min(diff, neg) < backend.tolerance


def phi_chart_map(n: int, point: Sequence, backend=EXACT) -> tuple:
    """The explicit chart projection to P^(2n-1).

    Input: a point of W + W* (coordinates x_0..x_n, y_0..y_n) on the
    chart where both x_0 and y_n are nonzero and equal after scaling.
    Output coordinates: [y_1, ..., y_{n-1}, y_0 - x_n, x_1, ..., x_{n-1}, 1].
    """
    if n < 1:
        raise ChartError("chart needs n >= 1")
    if len(point) != 2 * n + 2:
        raise ChartError("point has the wrong ambient dimension")
    x0 = backend.convert(point[0])
    yn = backend.convert(point[2 * n + 1])
    if backend.is_zero(x0) or backend.is_zero(yn):
        raise ChartError("point lies outside the chart (x0 = 0 or y_n = 0)")
    inv = backend.div(backend.one(), x0)
    v = [backend.mul(inv, backend.convert(c)) for c in point]
    if not backend.is_zero(backend.sub(v[2 * n + 1], backend.one())):
        raise ChartError("point is not on the hyperplane x0 = y_n")
    xs = v[: n + 1]
    ys = v[n + 1 :]
    out = list(ys[1:n]) + [backend.sub(ys[0], xs[n])] + list(xs[1:n]) + [backend.one()]
    return tuple(out)


def canonical_split_chart(n: int):
    """Hyperplane covector x0 - y_n and the chart section matched to phi's target order."""
    d = 2 * n + 2
    cov = [0] * d
    cov[0] = 1
    cov[2 * n + 1] = -1

    def unit(i):
        e = [Fraction(0)] * d
        e[i] = Fraction(1)
        return e

    cols = []
    for j in range(1, n):  # y_1 .. y_{n-1}
        cols.append(unit(n + 1 + j))
    cols.append(unit(n + 1))  # y_0 row carries y_0 - x_n on the quotient
    for i in range(1, n):  # x_1 .. x_{n-1}
        cols.append(unit(i))
    last = unit(0)
    last[2 * n + 1] = Fraction(1)  # x_0 + y_n: the chart's trailing coordinate
    cols.append(last)
    return tuple(cov), tuple(tuple(c) for c in cols)


def reduction_agreement_check(lift: ConormalLiftVariety, nsamples: int = 20, seed: int = 0,
                              target_permutation: Optional[Sequence[int]] = None
                              ) -> VerificationReport:
    """Slice the lift with x0 = y_n, project from the center, compare with phi.

    Exact section points inside the chart must project (in the
    canonical chart basis) to exactly the phi image, as projective
    points.  `target_permutation` reorders phi's output and exists as a
    negative control: any nontrivial permutation must break agreement.
    """
    t0 = time.perf_counter()
    n = lift.dim_w - 1
    if n < 1:
        raise ChartError("agreement needs dim P(W) >= 1")
    x = lift.to_param_variety()
    form = lift.split_form()
    cov, cols = canonical_split_chart(n)
    reduced = hyperplane_reduce(x, form, cov, section_columns=cols)
    report = VerificationReport(
        operation="reduction_agreement_check",
        variety=lift.name,
        backend="exact",
        seed=seed,
        samples_requested=nsamples,
        ambient_dim=2 * n,
    )
    samples = section_sampler(reduced, nsamples, seed)
    agreements = 0
    off_chart = 0
    for s in samples:
        point = s.point
        try:
            phi = phi_chart_map(n, point)
        except ChartError:
            off_chart += 1
            continue
        if target_permutation is not None:
            phi = tuple(phi[i] for i in target_permutation)
        report.samples_evaluated += 1
        lhs = primitive_vector(s.projected_point)
        rhs = primitive_vector(phi)
        if lhs == rhs:
            agreements += 1
        else:
            report.add_witness(
                kind="disagreement",
                assignment=_sample_labels(s),
                projected=[format_rational(v) for v in lhs],
                chart_image=[format_rational(v) for v in rhs],
            )
    report.details["agreements"] = agreements
    report.details["off_chart"] = off_chart
    report.timings["seconds"] = time.perf_counter() - t0
    return report.close(agreements == report.samples_evaluated and agreements > 0)


def _sample_labels(s: SectionSample) -> dict:
    return {k: format_rational(v) for k, v in s.assignment}


# ---------------------------------------------------------------------------
# singularity classification


def singularity_classification_probe(lift: ConormalLiftVariety, nsamples: int = 50,
                                     seed: int = 0, backend=EXACT,
                                     singular_points: Sequence = ()
                                     ) -> VerificationReport:
    """Rank-probe the lift's three strata.

    (A) limits [w, 0]: the tangent/conormal block dimensions at w must
    be the generic ones; at supplied singular source points the
    conormal block collapses and a rank drop is flagged.  (B) limits
    [0, alpha]: for hypersurface sources, the dual-map frame assembled
    from second derivatives is rank-probed against its sampled generic
    value; skipped otherwise.  (C) general lift points: full frame rank
    against the Lagrangian dimension.  Flagged probes are clustered by
    location.
    """
    t0 = time.perf_counter()
    report = VerificationReport(
        operation="singularity_classification_probe",
        variety=lift.name,
        backend=backend.name,
        precision_bits=backend.precision,
        seed=seed,
        samples_requested=nsamples,
        ambient_dim=lift.ambient_dim,
    )
    exact = isinstance(backend, ExactBackend)
    records = []
    clusters = set()

    def cluster_key(vec):
        if exact:
            return primitive_vector(vec)
        normalized = normalize_approx_vector(vec, backend)
        return tuple(f"{float(v):.6e}" for v in normalized)

    samples = lift.sample(nsamples, seed, backend)
    n = lift.dim_w - 1

    if lift.is_hypersurface:
        z: ImplicitHypersurface = lift.source
        expected_ker = n
        generic_dual = None
        dual_ranks = []

        def probe_a(w, label):
            grad = z.gradient_at(w, backend)
            if exact:
                conormal_rank = 1 if any(g != 0 for g in grad) else 0
            else:
                gmax = max((abs(g) for g in grad), default=backend.zero())
                conormal_rank = 0 if backend.is_zero(gmax) else 1
            if conormal_rank:
                ker_dim = len(kernel_basis(Matrix([list(grad)], backend)))
            else:
                ker_dim = lift.dim_w
            ok = conormal_rank == 1 and ker_dim == expected_ker
            rec = {
                "stratum": "A",
                "label": label,
                "point": [backend.to_text(backend.convert(v)) for v in w],
                "tangent_dim": ker_dim,
                "tangent_expected": expected_ker,
                "conormal_rank": conormal_rank,
                "conormal_expected": 1,
                "verdict": "smooth" if ok else "rank_drop",
            }
            records.append(rec)
            if not ok:
                clusters.add(("A", cluster_key(w)))
            return ok

        def probe_b(w):
            grad = z.gradient_at(w, backend)
            if all(backend.is_zero(g) for g in grad):
                return None
            hess = z.hessian_at(w, backend)
            tangents = kernel_basis(Matrix([list(grad)], backend))
            rows = [list(grad)] + [list(hess.mat_vec(v)) for v in tangents]
            if not exact:
                rows = [list(normalize_approx_vector(r, backend)) for r in rows]
            return rank(Matrix(rows, backend))

        for s in samples:
            probe_a(s.w, "sample")
            r = probe_b(s.w)
            if r is not None:
                dual_ranks.append((s.w, r))
        if dual_ranks:
            counts = {}
            for _, r in dual_ranks:
                counts[r] = counts.get(r, 0) + 1
            generic_dual = max(counts.items(), key=lambda kv: (kv[1], kv[0]))[0]
            for w, r in dual_ranks:
                ok = r == generic_dual
                records.append({
                    "stratum": "B",
                    "label": "sample",
                    "point": [backend.to_text(backend.convert(v)) for v in w],
                    "dual_rank": r,
                    "dual_expected": generic_dual,
                    "verdict": "smooth" if ok else "rank_drop",
                })
                if not ok:
                    clusters.add(("B", cluster_key(w)))
        for w in singular_points:
            probe_a(tuple(w), "provided-singular")
    else:
        x: ParamVariety = lift.source
        expected_tangent = x.nparams + 1
        expected_fiber = lift.codim
        for s in samples:
            assignment = dict(s.source_assignment)
            frame = x.cone_tangent_frame(assignment, backend)
            tr = rank(frame.matrix(backend))
            kd = len(s.kernel_rows)
            ok = tr == expected_tangent and kd == expected_fiber
            records.append({
                "stratum": "A",
                "label": "sample",
                "point": [backend.to_text(backend.convert(v)) for v in s.w],
                "tangent_dim": tr,
                "tangent_expected": expected_tangent,
                "conormal_rank": kd,
                "conormal_expected": expected_fiber,
                "verdict": "smooth" if ok else "rank_drop",
            })
            if not ok:
                clusters.add(("A", cluster_key(s.w)))
        if singular_points:
            report.details["provided_points_skipped"] = (
                "source is parametrized; implicit data unavailable for stratum A drops"
            )
        report.details["stratum_b"] = "skipped: dual data unavailable for parametrized sources"

    expected_rank = lift.dim_w  # Lagrangian dimension of the lift cone
    for s in samples:
        frame = lift.lift_tangent_frame(s, backend)
        rows = frame.vectors
        if not exact:
            rows = [normalize_approx_vector(r, backend) for r in rows]
        r = rank(Matrix(rows, backend))
        ok = r == expected_rank
        records.append({
            "stratum": "C",
            "label": "sample",
            "rank": r,
            "expected": expected_rank,
            "verdict": "smooth" if ok else "rank_drop",
        })
        if not ok:
            clusters.add(("C", cluster_key(s.point)))
        report.samples_evaluated += 1
        report.record_rank(r)

    sampled_drops = sum(
        1 for rec in records if rec["label"] == "sample" and rec["verdict"] == "rank_drop"
    )
    provided = [rec for rec in records if rec["label"] == "provided-singular"]
    provided_drops = sum(1 for rec in provided if rec["verdict"] == "rank_drop")
    report.details["records"] = records
    report.details["sampled_rank_drops"] = sampled_drops
    report.details["provided_singular_points"] = len(provided)
    report.details["provided_rank_drops"] = provided_drops
    report.details["flagged_clusters"] = len(clusters)
    passed = sampled_drops == 0 and provided_drops == len(provided)
    report.timings["seconds"] = time.perf_counter() - t0
    return report.close(passed)
