"""Legendrian verification and hyperplane reduction.

`check_legendrian` samples affine-cone tangent frames and tests the
Lagrangian conditions: frame rank equal to half the ambient dimension,
and vanishing of the form on every intra-frame pair.  Reduction slices
a variety with a hyperplane, projects from the hyperplane's center
line, and re-verifies in the quotient chart, where the induced form
makes the projection form-preserving.  Iterated reduction chains
stages, each with a fresh hyperplane in the current ambient space.

Reports are deterministic functions of (seed, backend, budgets); sample
work is split per index so thread count cannot change any result.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .linalg import (
    Matrix,
    intersect_rowspan,
    dot,
    normalize_approx_vector,
    primitive_vector,
    rank,
    solve_linear,
)
from .poly import MultiPoly, isolate_real_roots
from .rng import spawn
from .runtime import parallel_map, resolve_threads
from .scalars import EXACT, ExactBackend
from .symplectic import (
    QuotientChart,
    SymplecticForm,
    hyperplane,
    induced_form,
    omega_eval,
)
from .variety import (
    BasePointError,
    ParamVariety,
    SampleBudgetError,
    TangentFrame,
    VarietyError,
    generic_cone_rank,
)


class ReductionError(VarietyError):
    pass


class VertexHyperplaneError(ReductionError):
    """The chosen hyperplane's center is a cone vertex of the variety."""


class SectionBackendError(ReductionError):
    """Exact section sampling is not available for this configuration."""


@dataclass
class VerificationReport:
    """Structured verdict for one verification or probe run."""

    operation: str
    variety: str
    backend: str
    seed: int
    samples_requested: int
    precision_bits: Optional[int] = None
    samples_evaluated: int = 0
    ambient_dim: int = 0
    rank_histogram: dict = field(default_factory=dict)
    isotropy_violations: int = 0
    worst_residual: Optional[str] = None
    witnesses: list = field(default_factory=list)
    verdict: str = "inconclusive"
    details: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def record_rank(self, r: int):
        self.rank_histogram[r] = self.rank_histogram.get(r, 0) + 1

    def add_witness(self, **data):
        if len(self.witnesses) < 10:
            self.witnesses.append(data)

    def close(self, passed: bool, inconclusive: bool = False):
        if inconclusive or self.samples_evaluated == 0:
            self.verdict = "inconclusive"
        else:
            self.verdict = "pass" if passed else "fail"
        return self


def _fmt_assignment(assignment) -> dict:
    from .scalars import format_rational

    out = {}
    for k, v in sorted(assignment.items()) if isinstance(assignment, dict) else assignment:
        out[k] = format_rational(v) if isinstance(v, (int, Fraction)) else str(v)
    return out


def _residual_str(value, backend) -> str:
    return backend.to_text(value) if value is not None else None


def _to_backend(m: Matrix, backend) -> Matrix:
    if m.backend is backend:
        return m
    return Matrix(m.entries, backend)


# ---------------------------------------------------------------------------
# Legendrian check


def check_legendrian(variety, form: SymplecticForm, nsamples: int = 50, seed: int = 0,
                     backend=EXACT, threads=None) -> VerificationReport:
    """Sampled test that the affine cone's tangent spaces are Lagrangian.

    Each sampled frame must have rank equal to half the ambient
    dimension and pair to zero under the form.  `variety` is anything
    with `name`, `ambient_dim` and `sample_frames(count, seed, backend)`.
    """
    t0 = time.perf_counter()
    if variety.ambient_dim != form.dim:
        raise ReductionError("form size does not match the ambient dimension")
    report = VerificationReport(
        operation="check_legendrian",
        variety=variety.name,
        backend=backend.name,
        precision_bits=backend.precision,
        seed=seed,
        samples_requested=nsamples,
        ambient_dim=form.dim,
    )
    expected = form.half_dim
    report.details["expected_rank"] = expected
    frames = variety.sample_frames(nsamples, seed, backend)
    exact = isinstance(backend, ExactBackend)

    def examine(frame: TangentFrame):
        rows = frame.vectors
        if not exact:
            rows = [normalize_approx_vector(r, backend) for r in rows]
        r = rank(Matrix(rows, backend))
        bad_pairs = []
        worst = None
        for i in range(len(rows)):
            for j in range(i + 1, len(rows)):
                val = omega_eval(form, rows[i], rows[j], backend)
                if exact:
                    if val != 0:
                        bad_pairs.append((i, j, val))
                else:
                    mag = abs(val)
                    if worst is None or mag > worst:
                        worst = mag
                    if not backend.is_zero(val):
                        bad_pairs.append((i, j, val))
        return frame, r, bad_pairs, worst

    worst_global = None
    results = parallel_map(examine, frames, resolve_threads(threads))
    for frame, r, bad_pairs, worst in results:
        report.samples_evaluated += 1
        report.record_rank(r)
        if r != expected:
            report.add_witness(kind="rank", assignment=_fmt_assignment(frame.assignment),
                               rank=r, expected=expected)
        for i, j, val in bad_pairs:
            report.isotropy_violations += 1
            report.add_witness(kind="isotropy", assignment=_fmt_assignment(frame.assignment),
                               pair=[i, j], value=backend.to_text(val))
        if worst is not None and (worst_global is None or worst > worst_global):
            worst_global = worst
    if worst_global is not None:
        report.worst_residual = _residual_str(worst_global, backend)
    rank_ok = set(report.rank_histogram) == {expected} if report.rank_histogram else False
    report.timings["seconds"] = time.perf_counter() - t0
    return report.close(rank_ok and report.isotropy_violations == 0)


@dataclass(frozen=True)
class WitnessResult:
    found: bool
    assignments: Optional[tuple]
    value: Optional[Fraction]
    draws: int


def witness_nonisotropic_pair(x: ParamVariety, form: SymplecticForm, budget: int = 100,
                              seed: int = 0) -> WitnessResult:
    """Search for two points whose cone representatives do not pair to zero.

    A found witness certifies that the locus of bad centers is a proper
    subvariety, so a general hyperplane reduction is available; linear
    (already-Lagrangian) varieties legitimately return "not found".
    """
    for i in range(budget):
        rng = spawn(seed, i)
        a1 = {p: rng.fraction(100) for p in x.params}
        a2 = {p: rng.fraction(100) for p in x.params}
        try:
            p1 = x.evaluate_point(a1)
            p2 = x.evaluate_point(a2)
        except Exception:
            continue
        if not any(p1) or not any(p2):
            continue
        val = omega_eval(form, p1, p2)
        if val != 0:
            return WitnessResult(True, (a1, a2), val, i + 1)
    return WitnessResult(False, None, None, budget)


# ---------------------------------------------------------------------------
# reduction


@dataclass(frozen=True)
class Stage:
    covector: tuple  # primitive, in the coordinates current at this stage
    chart: QuotientChart
    pullback: tuple  # the same constraint expressed on the source ambient space


class ReducedVariety:
    """A variety sliced and projected through one or more quotient stages."""

    __slots__ = ("source", "form", "stages", "_cache")

    def __init__(self, source: ParamVariety, form: SymplecticForm, stages: Sequence[Stage]):
        self.source = source
        self.form = form
        self.stages = tuple(stages)
        if not self.stages:
            raise ReductionError("at least one reduction stage is required")
        self._cache = {}

    @property
    def name(self) -> str:
        return f"{self.source.name}~reduced{len(self.stages)}"

    @property
    def num_stages(self) -> int:
        return len(self.stages)

    @property
    def final_form(self) -> SymplecticForm:
        return self.stages[-1].chart.induced

    @property
    def ambient_dim(self) -> int:
        return self.final_form.dim

    def composed_projection(self) -> Matrix:
        q = self._cache.get("projection")
        if q is None:
            q = self.stages[0].chart.q
            for stage in self.stages[1:]:
                q = stage.chart.q.mat_mul(q)
            self._cache["projection"] = q
        return q

    def prefix_projection(self) -> Optional[Matrix]:
        """Composition of all but the last stage (None for a single stage)."""
        if len(self.stages) == 1:
            return None
        q = self.stages[0].chart.q
        for stage in self.stages[1:-1]:
            q = stage.chart.q.mat_mul(q)
        return q

    def constraint_polys(self) -> tuple:
        polys = self._cache.get("constraints")
        if polys is None:
            out = []
            for stage in self.stages:
                acc = MultiPoly.zero(self.source.params)
                for c, coord in zip(stage.pullback, self.source.coords):
                    if c:
                        acc = acc + coord * c
                out.append(acc)
            polys = tuple(out)
            self._cache["constraints"] = polys
        return polys

    def source_dimension(self) -> int:
        return generic_cone_rank(self.source) - 1

    def expected_projected_rank(self) -> int:
        return self.source_dimension() - self.num_stages + 1

    def project_frame(self, frame_rows: Matrix) -> Matrix:
        """Slice the frame by every stage constraint and push it down the charts."""
        rows = frame_rows
        backend = frame_rows.backend
        for stage in self.stages:
            rows = intersect_rowspan(rows, [stage.covector])
            rows = rows.mat_mul(_to_backend(stage.chart.q, backend).transpose())
        return rows


def _vertex_probe_frames(frames, center) -> bool:
    """True when every sampled tangent span contains the center line."""
    h = list(center)
    for frame in frames:
        m = Matrix(frame.vectors)
        if rank(m.vstack(Matrix([h]))) != rank(m):
            return False
    return True


def hyperplane_reduce(x: ParamVariety, form: SymplecticForm, covector,
                      *, section_columns=None, vertex_probe_samples: int = 10,
                      skip_vertex_probe: bool = False) -> ReducedVariety:
    """One hyperplane slice + center projection, with the induced chart.

    Lazy: no section points are computed here.  Errors if the covector
    is zero or if a sampled probe shows the variety is a cone with the
    center as vertex (projection would then collapse the dimension).
    """
    if x.ambient_dim != form.dim:
        raise ReductionError("form size does not match the ambient dimension")
    hyp = hyperplane(form, covector)
    if not skip_vertex_probe:
        try:
            frames = x.sample_frames(vertex_probe_samples, seed=424243)
        except (SampleBudgetError, BasePointError):
            frames = []
        if frames and _vertex_probe_frames(frames, hyp.center):
            raise VertexHyperplaneError(
                f"{x.name} appears to be a cone with vertex at the chosen center"
            )
    chart = induced_form(form, hyp, section_columns)
    stage = Stage(hyp.covector, chart, hyp.covector)
    return ReducedVariety(x, form, (stage,))


def extend_reduction(r: ReducedVariety, covector, *, section_columns=None,
                     probe_backend=None, vertex_probe_samples: int = 6,
                     probe_seed: int = 515151) -> ReducedVariety:
    """Add one more hyperplane stage in the current ambient coordinates."""
    current = r.final_form
    hyp = hyperplane(current, covector)
    if probe_backend is not None:
        try:
            samples = section_sampler(r, vertex_probe_samples, probe_seed, probe_backend)
        except (SampleBudgetError, SectionBackendError):
            samples = []
        if samples:
            all_contain = True
            for s in samples:
                m = s.projected_frame
                hrow = Matrix([list(hyp.center)], m.backend)
                if rank(m.vstack(hrow)) != rank(m):
                    all_contain = False
                    break
            if all_contain:
                raise VertexHyperplaneError(
                    f"stage {r.num_stages + 1}: reduced variety looks like a cone with "
                    "vertex at the chosen center"
                )
    chart = induced_form(current, hyp, section_columns)
    pullback = primitive_vector(r.composed_projection().transpose().mat_vec(hyp.covector))
    stage = Stage(hyp.covector, chart, pullback)
    return ReducedVariety(r.source, r.form, r.stages + (stage,))


def coisotropic_reduce(x: ParamVariety, form: SymplecticForm, k: int, seed: int,
                       backend=EXACT) -> ReducedVariety:
    """k successive hyperplane stages with fresh seeded random hyperplanes.

    Equivalent to slicing by a random coisotropic subspace of
    codimension k, realized stage by stage; the final ambient dimension
    is the source's minus 2k.
    """
    dim_x = generic_cone_rank(x) - 1
    if not 1 <= k <= dim_x:
        raise ReductionError(f"codimension {k} out of range for a {dim_x}-fold")
    reduced: Optional[ReducedVariety] = None
    for j in range(k):
        current_dim = form.dim if reduced is None else reduced.ambient_dim
        last_error = None
        for attempt in range(8):
            rng = spawn(seed, j * 1009 + attempt)
            cov = [rng.int_in(-9, 9) for _ in range(current_dim)]
            if not any(cov):
                continue
            try:
                if reduced is None:
                    reduced = hyperplane_reduce(x, form, cov)
                else:
                    reduced = extend_reduction(
                        reduced, cov,
                        probe_backend=backend if j >= 1 else None,
                    )
                last_error = None
                break
            except (VertexHyperplaneError, ReductionError) as err:
                last_error = err
                continue
        if last_error is not None:
            raise last_error
    return reduced


# ---------------------------------------------------------------------------
# section sampling


@dataclass(frozen=True)
class SectionSample:
    """One point of the sliced variety with its source and projected frames."""

    assignment: tuple  # ((param, value), ...)
    point: tuple  # source ambient coordinates
    projected_point: tuple
    source_frame: TangentFrame
    projected_frame: Matrix

    def assignment_dict(self):
        return dict(self.assignment)


def _linear_system_from(restricted, block):
    """Affine-linear system (A, rhs) for constraint polys in the block vars."""
    a_rows, rhs = [], []
    for p in restricted:
        if p.total_degree() > 1:
            return None
        row = []
        for var in block:
            coeff = p.terms.get(tuple(1 if v == var else 0 for v in p.vars), Fraction(0))
            row.append(coeff)
        const = p.terms.get((0,) * len(p.vars), Fraction(0))
        a_rows.append(row)
        rhs.append(-const)
    return Matrix(a_rows), rhs


def _finish_sample(r: ReducedVariety, assignment, backend) -> Optional[SectionSample]:
    exact = isinstance(backend, ExactBackend)
    try:
        frame = r.source.cone_tangent_frame(assignment, backend)
    except BasePointError:
        return None
    point = frame.point
    if exact:
        point = primitive_vector(point)
    else:
        point = normalize_approx_vector(point, backend)
    projected = _to_backend(r.composed_projection(), backend).mat_vec(point)
    if exact:
        if not any(projected):
            return None
        projected = primitive_vector(projected)
    else:
        projected = normalize_approx_vector(projected, backend)
    rows = Matrix([list(v) for v in frame.vectors], backend)
    projected_frame = r.project_frame(rows)
    return SectionSample(
        assignment=tuple(sorted(assignment.items())),
        point=tuple(point),
        projected_point=tuple(projected),
        source_frame=frame,
        projected_frame=projected_frame,
    )


def _exact_linear_sections(r: ReducedVariety, count, seed, height, block):
    constraints = r.constraint_polys()
    others = [p for p in r.source.params if p not in block]
    out = []
    for i in range(count):
        rng = spawn(seed, i)
        sample = None
        for _ in range(60):
            vals = {p: rng.fraction(height) for p in others}
            restricted = [c.substitute(vals) if others else c for c in constraints]
            system = _linear_system_from(restricted, block)
            if system is None:
                break  # not actually jointly linear: caller falls back
            a, rhs = system
            sol = solve_linear(a, rhs)
            if sol.kind == "none":
                continue
            block_vals = list(sol.particular)
            for kvec in sol.kernel:
                c = rng.fraction(height)
                block_vals = [b + c * kv for b, kv in zip(block_vals, kvec)]
            assignment = dict(vals)
            assignment.update({p: v for p, v in zip(block, block_vals)})
            for c in constraints:
                if c.evaluate(assignment) != 0:
                    raise ReductionError("internal error: section constraint not satisfied")
            sample = _finish_sample(r, assignment, EXACT)
            if sample is not None:
                break
        if sample is None:
            raise SampleBudgetError(
                f"exact section sampling budget exhausted for {r.name}"
            )
        out.append(sample)
    return out


def _exact_univariate_sections(r: ReducedVariety, count, seed, height):
    (constraint,) = r.constraint_polys()
    params = r.source.params
    out = []
    for i in range(count):
        rng = spawn(seed, i)
        sample = None
        for attempt in range(80):
            pivot = params[(i + attempt) % len(params)]
            vals = {p: rng.fraction(height) for p in params if p != pivot}
            restricted = constraint.substitute(vals) if len(params) > 1 else constraint
            if not restricted:
                continue
            if restricted.is_constant():
                continue
            roots = [rec.value for rec in isolate_real_roots(restricted) if rec.value is not None]
            for root in roots:
                assignment = dict(vals)
                assignment[pivot] = root
                sample = _finish_sample(r, assignment, EXACT)
                if sample is not None:
                    break
            if sample is not None:
                break
        if sample is None:
            raise SampleBudgetError(
                f"no rational section points found for {r.name} within budget"
            )
        out.append(sample)
    return out


def _approx_sections(r: ReducedVariety, count, seed, backend, height):
    constraints = r.constraint_polys()
    params = r.source.params
    grads = [[c.partial(p) for p in params] for c in constraints]
    cov_scale = max(
        sum(abs(int(e)) for e in stage.pullback) for stage in r.stages
    )
    out = []
    for i in range(count):
        rng = spawn(seed, i)
        sample = None
        for _restart in range(40):
            theta = {p: backend.convert(rng.fraction(4) + Fraction(rng.int_in(-2, 2))) for p in params}
            ok = False
            for _it in range(60):
                res = [c.evaluate(theta, backend) for c in constraints]
                jac = Matrix(
                    [[g.evaluate(theta, backend) for g in row] for row in grads], backend
                )
                jjt = jac.mat_mul(jac.transpose())
                sol = solve_linear(jjt, res)
                if sol.kind != "unique":
                    break
                step = jac.transpose().mat_vec(sol.particular)
                theta = {
                    p: backend.sub(theta[p], s) for p, s in zip(params, step)
                }
                if max(abs(s) for s in step) < backend.tolerance:
                    ok = True
                    break
            if not ok:
                continue
            point = [c.evaluate(theta, backend) for c in r.source.coords]
            scale = max([abs(v) for v in point] + [backend.one()])
            res = [c.evaluate(theta, backend) for c in constraints]
            bound = backend.mul(backend.tolerance, backend.mul(scale, backend.convert(cov_scale)))
            if max(abs(v) for v in res) >= bound:
                continue
            sample = _finish_sample(r, theta, backend)
            if sample is not None:
                break
        if sample is None:
            raise SampleBudgetError(
                f"approximate section sampling budget exhausted for {r.name}"
            )
        out.append(sample)
    return out


def section_sampler(r: ReducedVariety, count: int, seed: int, backend=EXACT,
                    height: int = 100):
    """Points on the sliced variety, with projected points and frames.

    Exact strategy order: solve the stage constraints linearly in a
    jointly fiber-linear parameter block when one is wide enough, else
    (single stage) isolate rational roots of the univariate constraint
    with all other parameters fixed.  The approximate backend runs a
    seeded Gauss-Newton on the full constraint system instead, which
    also covers iterated stages with no usable linear block.
    """
    if count < 1:
        raise VarietyError("count must be at least 1")
    if not isinstance(backend, ExactBackend):
        return _approx_sections(r, count, seed, backend, height)
    block = r.source.joint_fiber_block()
    if block and r.num_stages <= len(block):
        return _exact_linear_sections(r, count, seed, height, block)
    if r.num_stages == 1:
        return _exact_univariate_sections(r, count, seed, height)
    raise SectionBackendError(
        f"{r.name}: exact section sampling needs a fiber-linear block of size >= "
        f"{r.num_stages}; use the approximate backend"
    )


# ---------------------------------------------------------------------------
# reduction verification and probes


def verify_reduction(r: ReducedVariety, nsamples: int = 20, seed: int = 0,
                     backend=EXACT, threads=None) -> VerificationReport:
    """Check projected frames: isotropic for the induced form, expected rank.

    Also records the dimension bookkeeping: ambient drops by two per
    stage and the estimated dimension by one.
    """
    t0 = time.perf_counter()
    report = VerificationReport(
        operation="verify_reduction",
        variety=r.name,
        backend=backend.name,
        precision_bits=backend.precision,
        seed=seed,
        samples_requested=nsamples,
        ambient_dim=r.ambient_dim,
    )
    expected = r.expected_projected_rank()
    report.details["stages"] = r.num_stages
    report.details["source_ambient_dim"] = r.form.dim
    report.details["expected_rank"] = expected
    report.details["ambient_drop_ok"] = r.ambient_dim == r.form.dim - 2 * r.num_stages
    exact = isinstance(backend, ExactBackend)
    try:
        samples = section_sampler(r, nsamples, seed, backend)
    except (SampleBudgetError, SectionBackendError) as err:
        report.details["sampling_error"] = str(err)
        report.timings["seconds"] = time.perf_counter() - t0
        return report.close(False, inconclusive=True)
    form = r.final_form

    def examine(s: SectionSample):
        rows = s.projected_frame.entries
        if not exact:
            rows = [normalize_approx_vector(row, backend) for row in rows]
        rk = rank(Matrix(rows, backend))
        bad = []
        worst = None
        for i in range(len(rows)):
            for j in range(i + 1, len(rows)):
                val = omega_eval(form, rows[i], rows[j], backend)
                if exact:
                    if val != 0:
                        bad.append((i, j, val))
                else:
                    mag = abs(val)
                    if worst is None or mag > worst:
                        worst = mag
                    if not backend.is_zero(val):
                        bad.append((i, j, val))
        return s, rk, bad, worst

    worst_global = None
    for s, rk, bad, worst in parallel_map(examine, samples, resolve_threads(threads)):
        report.samples_evaluated += 1
        report.record_rank(rk)
        if rk != expected:
            report.add_witness(kind="rank", assignment=_fmt_assignment(s.assignment),
                               rank=rk, expected=expected)
        for i, j, val in bad:
            report.isotropy_violations += 1
            report.add_witness(kind="isotropy", assignment=_fmt_assignment(s.assignment),
                               pair=[i, j], value=backend.to_text(val))
        if worst is not None and (worst_global is None or worst > worst_global):
            worst_global = worst
    if worst_global is not None:
        report.worst_residual = _residual_str(worst_global, backend)
    if report.rank_histogram:
        report.details["reduced_dimension_estimate"] = max(report.rank_histogram) - 1
    ranks_ok = set(report.rank_histogram) == {expected} if report.rank_histogram else False
    passed = (
        ranks_ok
        and report.isotropy_violations == 0
        and report.details["ambient_drop_ok"]
    )
    report.timings["seconds"] = time.perf_counter() - t0
    return report.close(passed)


def secant_avoidance_probe(r: ReducedVariety, npairs: int = 100, seed: int = 0,
                           backend=EXACT, extra_pairs=()) -> VerificationReport:
    """Test whether the projection center lies on secants of sampled sections.

    For each pair of distinct section points the center is on their
    secant line exactly when the three stacked vectors have rank two.
    Zero hits on a general hyperplane supports injectivity of the
    projection on the sampled data.
    """
    t0 = time.perf_counter()
    report = VerificationReport(
        operation="secant_avoidance_probe",
        variety=r.name,
        backend=backend.name,
        precision_bits=backend.precision,
        seed=seed,
        samples_requested=npairs,
        ambient_dim=r.ambient_dim,
    )
    pool = 2
    while pool * (pool - 1) // 2 < npairs and pool < 64:
        pool += 1
    try:
        samples = section_sampler(r, pool, seed, backend)
    except (SampleBudgetError, SectionBackendError) as err:
        report.details["sampling_error"] = str(err)
        report.timings["seconds"] = time.perf_counter() - t0
        return report.close(False, inconclusive=True)
    prefix = r.prefix_projection()
    center = list(r.stages[-1].chart.hyperplane.center)

    def current_coords(point):
        if prefix is None:
            return list(point)
        vec = _to_backend(prefix, backend).mat_vec(point)
        return list(vec)

    points = [current_coords(s.point) for s in samples]
    for p1, p2 in extra_pairs:
        points.append(current_coords(p1))
        points.append(current_coords(p2))
    pairs = []
    if extra_pairs:
        base = len(points) - 2 * len(extra_pairs)
        for k in range(len(extra_pairs)):
            pairs.append((base + 2 * k, base + 2 * k + 1))
    for i in range(len(samples)):
        for j in range(i + 1, len(samples)):
            if len(pairs) >= npairs + len(extra_pairs):
                break
            pairs.append((i, j))
    hits = 0
    degenerate = 0
    for i, j in pairs:
        two = Matrix([points[i], points[j]], backend)
        if rank(two) < 2:
            degenerate += 1
            continue
        three = Matrix([points[i], points[j], center], backend)
        report.samples_evaluated += 1
        if rank(three) == 2:
            hits += 1
            report.add_witness(kind="secant_hit", pair=[i, j])
    report.details["pairs_tested"] = report.samples_evaluated
    report.details["degenerate_pairs"] = degenerate
    report.details["hits"] = hits
    report.details["projection_injective_on_samples"] = hits == 0
    report.timings["seconds"] = time.perf_counter() - t0
    return report.close(hits == 0)
