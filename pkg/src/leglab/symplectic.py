"""The symplectic vector space: forms, perpendiculars, quotients, fitting.

A form is an exact antisymmetric nondegenerate matrix on an
even-dimensional space.  Hyperplanes carry their distinguished center
line (the form-perpendicular of the hyperplane, which antisymmetry
forces into the hyperplane), and quotient charts realize the induced
form on hyperplane/center with an explicit projection and section.

`fit_symplectic_form` inverts the verification predicate: given tangent
frames, it solves for all antisymmetric matrices making every
intra-frame pair orthogonal.  Small systems run exact integer
elimination; large ones use a mod-p rank certificate plus rational
reconstruction, with every reconstructed solution re-verified exactly,
so the result is exact either way.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .linalg import (
    IntRowBasis,
    LinalgError,
    Matrix,
    dot,
    kernel_basis,
    primitive_vector,
    rank,
    rref,
)
from .rng import DetRng
from .scalars import EXACT


class SymplecticError(ValueError):
    pass


@dataclass(frozen=True)
class SymplecticForm:
    """Antisymmetric nondegenerate exact matrix of even size."""

    matrix: Matrix

    def __post_init__(self):
        m = self.matrix
        if m.nrows != m.ncols or m.nrows == 0 or m.nrows % 2:
            raise SymplecticError("form must be square of positive even size")
        for i in range(m.nrows):
            for j in range(m.ncols):
                if m.entries[i][j] != -m.entries[j][i]:
                    raise SymplecticError("form must be antisymmetric")
        if rank(m) != m.nrows:
            raise SymplecticError("form is degenerate")

    @property
    def dim(self) -> int:
        return self.matrix.nrows

    @property
    def half_dim(self) -> int:
        return self.matrix.nrows // 2

    def entry(self, i: int, j: int) -> Fraction:
        return self.matrix.entries[i][j]


def standard_form(half_dim: int) -> SymplecticForm:
    """Block form [[0, I], [-I, 0]] of size 2*half_dim."""
    if half_dim < 1:
        raise SymplecticError("half dimension must be at least 1")
    n = half_dim
    rows = [[Fraction(0)] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        rows[i][n + i] = Fraction(1)
        rows[n + i][i] = Fraction(-1)
    return SymplecticForm(Matrix(rows))


def form_from_rows(rows) -> SymplecticForm:
    return SymplecticForm(Matrix(rows))


def omega_eval(form: SymplecticForm, v: Sequence, w: Sequence, backend=EXACT):
    """Pairing v^T . Omega . w."""
    if len(v) != form.dim or len(w) != form.dim:
        raise SymplecticError("dimension mismatch")
    acc = backend.zero()
    for i, vi in enumerate(v):
        vi = backend.convert(vi)
        if backend.name == "exact" and vi == 0:
            continue
        row = form.matrix.entries[i]
        inner = backend.zero()
        for j, wj in enumerate(w):
            cij = row[j]
            if cij == 0:
                continue
            inner = backend.add(inner, backend.mul(backend.convert(cij), backend.convert(wj)))
        acc = backend.add(acc, backend.mul(vi, inner))
    return acc


def _check_independent(basis: Matrix):
    if basis.nrows and rank(basis) != basis.nrows:
        raise SymplecticError("basis rows are dependent")


def symplectic_perp(form: SymplecticForm, basis: Matrix) -> Matrix:
    """Basis of {v : omega(v, w) = 0 for all w in the row span}."""
    _check_independent(basis)
    constraints = basis.mat_mul(form.matrix.transpose())
    kern = kernel_basis(constraints)
    return Matrix(kern, basis.backend)


def _contains(big: Matrix, small: Matrix) -> bool:
    if small.nrows == 0:
        return True
    return rank(big.vstack(small)) == rank(big)


def classify_subspace(form: SymplecticForm, basis: Matrix) -> str:
    """One of isotropic / coisotropic / lagrangian / symplectic / generic."""
    _check_independent(basis)
    perp = symplectic_perp(form, basis)
    iso = _contains(perp, basis)
    coiso = _contains(basis, perp)
    if iso and coiso:
        return "lagrangian"
    if iso:
        return "isotropic"
    if coiso:
        return "coisotropic"
    if basis.nrows + perp.nrows == rank(basis.vstack(perp)):
        return "symplectic"
    return "generic"


@dataclass(frozen=True)
class Hyperplane:
    """Hyperplane covector with its cached center line, both primitive."""

    covector: tuple
    center: tuple

    @property
    def dim(self) -> int:
        return len(self.covector)


def hyperplane(form: SymplecticForm, covector: Sequence) -> Hyperplane:
    cov = primitive_vector(covector)
    if not any(cov):
        raise SymplecticError("hyperplane covector must be nonzero")
    if len(cov) != form.dim:
        raise SymplecticError("dimension mismatch")
    center = primitive_vector(form.matrix.transpose().mat_vec(cov))
    if dot(cov, center) != 0:
        raise SymplecticError("center escaped its hyperplane; form not antisymmetric?")
    return Hyperplane(cov, center)


def covector_for_center(form: SymplecticForm, center: Sequence) -> tuple:
    """The hyperplane covector whose center is the given line."""
    return primitive_vector(form.matrix.mat_vec(center))


@dataclass(frozen=True)
class QuotientChart:
    """Projection q onto hyperplane/center coordinates, section s, induced form."""

    hyperplane: Hyperplane
    q: Matrix
    section: Matrix
    induced: SymplecticForm

    @property
    def reduced_dim(self) -> int:
        return self.q.nrows


def _invert(m: Matrix) -> Matrix:
    aug = Matrix([list(r) + list(i) for r, i in zip(m.entries, Matrix.identity(m.nrows, m.backend).entries)], m.backend)
    red, pivots = rref(aug)
    if pivots != list(range(m.nrows)):
        raise LinalgError("matrix not invertible")
    return Matrix([row[m.nrows :] for row in red.entries], m.backend)


def _complete_basis(vectors, dim):
    """Greedily extend by standard basis vectors to a basis of the full space."""
    rows = [list(v) for v in vectors]
    current = Matrix(rows) if rows else Matrix([[Fraction(0)] * dim]).with_rows([])
    r = rank(current) if rows else 0
    if r != len(rows):
        raise SymplecticError("dependent starting vectors")
    for i in range(dim):
        if len(rows) == dim:
            break
        e = [Fraction(0)] * dim
        e[i] = Fraction(1)
        cand = Matrix(rows + [e])
        if rank(cand) == len(rows) + 1:
            rows.append(e)
    return rows


def induced_form(
    form: SymplecticForm,
    hyp: Hyperplane,
    section_columns: Optional[Sequence[Sequence]] = None,
) -> QuotientChart:
    """Quotient chart on hyperplane/center with the form induced from `form`.

    `section_columns`, when given, fixes the complement basis of the
    center inside the hyperplane (used to pin chart coordinates to an
    externally chosen target order); each column must lie in the
    hyperplane and be independent of the center.
    """
    d = form.dim
    h = list(hyp.center)
    if section_columns is None:
        # hyperplane basis = kernel of the covector, then drop the center
        hyper_basis = kernel_basis(Matrix([list(hyp.covector)]))
        chosen = [h]
        for v in hyper_basis:
            if len(chosen) == d - 1:
                break
            if rank(Matrix(chosen + [list(v)])) == len(chosen) + 1:
                chosen.append(list(v))
        section_columns = chosen[1:]
    else:
        section_columns = [list(c) for c in section_columns]
        for c in section_columns:
            if dot(hyp.covector, c) != 0:
                raise SymplecticError("section column is not inside the hyperplane")
    if len(section_columns) != d - 2:
        raise SymplecticError("section must have dim(V) - 2 columns")
    rows = _complete_basis([h] + section_columns, d)
    if len(rows) != d:
        raise SymplecticError("could not complete chart basis")
    m_cols = Matrix(rows).transpose()  # columns: h, sections..., completion
    inv = _invert(m_cols)
    q = Matrix([inv.entries[1 + i] for i in range(d - 2)])
    s = Matrix(section_columns).transpose()
    omega_prime = s.transpose().mat_mul(form.matrix).mat_mul(s)
    chart = QuotientChart(hyp, q, s, SymplecticForm(omega_prime))
    _validate_chart(form, chart)
    return chart


def _validate_chart(form: SymplecticForm, chart: QuotientChart):
    d = form.dim
    qs = chart.q.mat_mul(chart.section)
    if qs != Matrix.identity(d - 2):
        raise SymplecticError("q . s is not the identity on the quotient")
    qh = chart.q.mat_vec(chart.hyperplane.center)
    if any(x != 0 for x in qh):
        raise SymplecticError("q does not kill the center line")


def random_coisotropic(form: SymplecticForm, k: int, seed: int) -> Matrix:
    """Basis of a codimension-k coisotropic subspace, deterministic in `seed`.

    Builds a random k-dimensional isotropic subspace by drawing vectors
    inside the perpendicular of the span so far, then returns that
    subspace's perpendicular.
    """
    if not 1 <= k <= form.half_dim:
        raise SymplecticError("codimension out of range")
    rng = DetRng(seed)
    iso_rows: list = []
    guard = 0
    while len(iso_rows) < k:
        guard += 1
        if guard > 200 * k:
            raise SymplecticError("failed to draw an isotropic subspace")
        if iso_rows:
            perp = symplectic_perp(form, Matrix(iso_rows))
            combo = [rng.int_in(-9, 9) for _ in range(perp.nrows)]
            v = [Fraction(0)] * form.dim
            for c, row in zip(combo, perp.entries):
                if c:
                    v = [a + c * b for a, b in zip(v, row)]
        else:
            v = [Fraction(rng.int_in(-9, 9)) for _ in range(form.dim)]
        if not any(v):
            continue
        if rank(Matrix(iso_rows + [v])) == len(iso_rows) + 1:
            iso_rows.append([Fraction(x) for x in v])
    result = symplectic_perp(form, Matrix(iso_rows))
    if classify_subspace(form, result) not in ("coisotropic", "lagrangian"):
        raise SymplecticError("internal error: constructed subspace is not coisotropic")
    return result


# ---------------------------------------------------------------------------
# fitting a form to tangent frames


@dataclass(frozen=True)
class FitResult:
    """Solution space of antisymmetric matrices annihilating all frame pairs."""

    dim: int
    basis: tuple  # of Matrix
    ambient_dim: int
    equations_used: int
    frames_used: int
    nondegenerate: bool
    degenerate_family: bool
    method: str

    def generator(self) -> Matrix:
        if self.dim != 1:
            raise SymplecticError("solution space is not one-dimensional")
        return self.basis[0]

    def generator_form(self) -> SymplecticForm:
        return SymplecticForm(self.generator())


def _pair_index(d: int):
    pairs = []
    for i in range(d):
        for j in range(i + 1, d):
            pairs.append((i, j))
    return pairs


def _frame_equations(vectors, pairs):
    """Equation rows (one per vector pair) over the antisymmetric unknowns."""
    ints = [primitive_vector(v) for v in vectors]
    eqs = []
    for a in range(len(ints)):
        for b in range(a + 1, len(ints)):
            u, v = ints[a], ints[b]
            eqs.append([u[i] * v[j] - u[j] * v[i] for (i, j) in pairs])
    return eqs


def _vector_to_form_rows(vec, pairs, d):
    rows = [[Fraction(0)] * d for _ in range(d)]
    for (i, j), c in zip(pairs, vec):
        rows[i][j] = Fraction(c)
        rows[j][i] = Fraction(-c)
    return rows


_FIT_PRIMES = (2147483647, 2147483629, 2147483587)
_FIT_PATIENCE = 3
_EXACT_UNKNOWN_LIMIT = 60


class _ModPBasis:
    """Row-reduced basis over GF(p), vectorized with numpy."""

    def __init__(self, ncols: int, p: int):
        self.p = p
        self.ncols = ncols
        self.rows = np.zeros((0, ncols), dtype=np.int64)
        self.pivots: list = []

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def _reduce(self, vec):
        if self.rows.shape[0]:
            coeffs = vec[self.pivots]
            if coeffs.any():
                # keep each product below p before summing: the sum of
                # rank-many residues stays well inside int64
                terms = (coeffs[:, None] * self.rows) % self.p
                vec = (vec - terms.sum(axis=0)) % self.p
        return vec

    def add(self, eq) -> bool:
        vec = np.array([x % self.p for x in eq], dtype=np.int64)
        vec = self._reduce(vec)
        nz = np.nonzero(vec)[0]
        if nz.size == 0:
            return False
        lead = int(nz[0])
        inv = pow(int(vec[lead]), self.p - 2, self.p)
        vec = (vec * inv) % self.p
        if self.rows.shape[0]:
            col = self.rows[:, lead].copy()
            if col.any():
                self.rows = (self.rows - col[:, None] * vec[None, :]) % self.p
        self.rows = np.vstack([self.rows, vec[None, :]])
        self.pivots.append(lead)
        return True

    def kernel(self):
        # rows are in full RREF: pivot entries are 1 and eliminated elsewhere
        order = np.argsort(self.pivots)
        rows = self.rows[order]
        pivots = sorted(self.pivots)
        free = [c for c in range(self.ncols) if c not in set(pivots)]
        basis = []
        for fc in free:
            v = np.zeros(self.ncols, dtype=np.int64)
            v[fc] = 1
            for r, pc in enumerate(pivots):
                v[pc] = (-int(rows[r][fc])) % self.p
            basis.append(v)
        return basis


def _rational_reconstruct(r: int, p: int) -> Optional[Fraction]:
    """Wang reconstruction of r mod p to a fraction with small numerator/denominator."""
    bound = int(np.sqrt(p / 2))
    v0, v1 = (p, 0), (r % p, 1)
    while v1[0] > bound:
        q = v0[0] // v1[0]
        v0, v1 = v1, (v0[0] - q * v1[0], v0[1] - q * v1[1])
    num, den = v1
    if den == 0 or abs(den) > bound:
        return None
    if den < 0:
        num, den = -num, -den
    from math import gcd as _g

    if _g(abs(num), den) != 1:
        return None
    return Fraction(num, den)


def fit_symplectic_form(frames: Iterable, *, seed: int = 0) -> FitResult:
    """Solve for every antisymmetric matrix annihilating all intra-frame pairs.

    `frames` is an iterable of vector collections sharing one ambient
    dimension; it is consumed lazily and drawing stops once the
    constraint rank has stabilized.  Small systems use exact integer
    elimination; larger ones a mod-p elimination whose kernel is
    reconstructed to rationals and re-verified exactly, with the mod-p
    rank giving a certified upper bound on the solution dimension.
    """
    frames = iter(frames)
    try:
        first = next(frames)
    except StopIteration:
        raise SymplecticError("at least one frame is required") from None
    first_vectors = list(first)
    d = len(first_vectors[0])
    pairs = _pair_index(d)
    unknowns = len(pairs)

    def frame_stream():
        yield first_vectors
        for f in frames:
            yield list(f)

    if unknowns <= _EXACT_UNKNOWN_LIMIT:
        return _fit_exact(frame_stream(), d, pairs)
    return _fit_modp(frame_stream(), d, pairs, seed)


def _frames_until_plateau(stream, on_equation):
    """Feed equations frame by frame; stop after _FIT_PATIENCE rankless frames."""
    stale = 0
    frames_used = 0
    equations = 0
    for vectors in stream:
        frames_used += 1
        grew = False
        for eq in _frame_equations(vectors, on_equation.pairs):
            equations += 1
            if on_equation.add(eq):
                grew = True
        if grew:
            stale = 0
        else:
            stale += 1
            if stale >= _FIT_PATIENCE:
                break
    return frames_used, equations


class _ExactSink:
    def __init__(self, pairs, unknowns):
        self.pairs = pairs
        self.basis = IntRowBasis(unknowns)
        self.stored = []

    def add(self, eq):
        self.stored.append(eq)
        return self.basis.add(eq)


def _finalize(d, pairs, kernel_vectors, frames_used, equations, method) -> FitResult:
    basis_mats = tuple(
        Matrix(_vector_to_form_rows(vec, pairs, d)) for vec in kernel_vectors
    )
    nondeg = False
    if basis_mats:
        rng = DetRng(17)
        candidates = list(basis_mats)
        for _ in range(3):
            combo_rows = [[Fraction(0)] * d for _ in range(d)]
            for m in basis_mats:
                c = rng.int_in(-5, 5)
                if c:
                    for i in range(d):
                        for j in range(d):
                            combo_rows[i][j] += c * m.entries[i][j]
            candidates.append(Matrix(combo_rows))
        for m in candidates:
            if rank(m) == d:
                nondeg = True
                break
    return FitResult(
        dim=len(basis_mats),
        basis=basis_mats,
        ambient_dim=d,
        equations_used=equations,
        frames_used=frames_used,
        nondegenerate=nondeg,
        degenerate_family=bool(basis_mats) and not nondeg,
        method=method,
    )


def _fit_exact(stream, d, pairs) -> FitResult:
    sink = _ExactSink(pairs, len(pairs))
    frames_used, equations = _frames_until_plateau(stream, sink)
    kernel = sink.basis.kernel()
    return _finalize(d, pairs, kernel, frames_used, equations, "exact")


def _fit_modp(stream, d, pairs, seed) -> FitResult:
    unknowns = len(pairs)

    class Sink:
        def __init__(self, p):
            self.pairs = pairs
            self.modp = _ModPBasis(unknowns, p)
            self.stored = []

        def add(self, eq):
            self.stored.append(eq)
            return self.modp.add(eq)

    sink = Sink(_FIT_PRIMES[0])
    frames_used, equations = _frames_until_plateau(stream, sink)
    for p in _FIT_PRIMES:
        if p != _FIT_PRIMES[0]:
            # replay stored equations under a fresh prime
            retry = Sink(p)
            for eq in sink.stored:
                retry.add(eq)
            retry.stored = sink.stored
            sink = retry
        kernel_p = sink.modp.kernel()
        reconstructed = []
        ok = True
        for vec in kernel_p:
            fracs = []
            for r in vec:
                f = _rational_reconstruct(int(r), p)
                if f is None:
                    ok = False
                    break
                fracs.append(f)
            if not ok:
                break
            cand = primitive_vector(fracs)
            if all(_int_dot(eq, cand) == 0 for eq in sink.stored):
                reconstructed.append(cand)
            else:
                ok = False
                break
        if ok and len(reconstructed) == len(kernel_p):
            # dim <= unknowns - rank_p = len(kernel_p); the verified vectors
            # show dim >= len(reconstructed): equality is certified.
            return _finalize(d, pairs, reconstructed, frames_used, equations, f"modp:{p}")
    # fall back to exact elimination on the stored equations
    basis = IntRowBasis(unknowns)
    for eq in sink.stored:
        basis.add(eq)
    return _finalize(d, pairs, basis.kernel(), frames_used, equations, "exact-fallback")


def _int_dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))
