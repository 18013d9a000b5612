"""Dense linear algebra over the exact and approximate scalar backends.

Exact rank uses fraction-free (Bareiss) elimination on an integerized
copy of the matrix, which keeps intermediate entries integral and
controls coefficient growth.  Kernels and solves run a rational RREF.
The approximate path pivots on the entry of largest magnitude and
treats anything below the backend tolerance as zero.

Everything here is immutable after construction and reentrant.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

from .scalars import EXACT, ApproxBackend, ExactBackend


class LinalgError(ValueError):
    pass


class Matrix:
    """Rectangular matrix with backend-homogeneous scalar entries."""

    __slots__ = ("nrows", "ncols", "entries", "backend")

    def __init__(self, rows: Sequence[Sequence], backend=EXACT):
        rows = tuple(tuple(backend.convert(x) for x in row) for row in rows)
        if rows:
            width = len(rows[0])
            if any(len(r) != width for r in rows):
                raise LinalgError("ragged rows")
        else:
            width = 0
        self.nrows = len(rows)
        self.ncols = width
        self.entries = rows
        self.backend = backend

    @classmethod
    def identity(cls, n: int, backend=EXACT) -> "Matrix":
        one, zero = backend.one(), backend.zero()
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)], backend)

    @classmethod
    def zeros(cls, nrows: int, ncols: int, backend=EXACT) -> "Matrix":
        zero = backend.zero()
        return cls([[zero] * ncols for _ in range(nrows)], backend)

    def row(self, i: int):
        return self.entries[i]

    def column(self, j: int):
        return tuple(r[j] for r in self.entries)

    def transpose(self) -> "Matrix":
        return Matrix(list(zip(*self.entries)) if self.entries else [], self.backend)

    def mat_vec(self, v: Sequence):
        b = self.backend
        v = [b.convert(x) for x in v]
        if len(v) != self.ncols:
            raise LinalgError("dimension mismatch")
        out = []
        for row in self.entries:
            acc = b.zero()
            for a, x in zip(row, v):
                acc = b.add(acc, b.mul(a, x))
            out.append(acc)
        return tuple(out)

    def mat_mul(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.nrows:
            raise LinalgError("dimension mismatch")
        b = self.backend
        ot = other.transpose()
        rows = []
        for r in self.entries:
            out = []
            for c in ot.entries:
                acc = b.zero()
                for a, x in zip(r, c):
                    acc = b.add(acc, b.mul(a, x))
                out.append(acc)
            rows.append(out)
        return Matrix(rows, b)

    def vstack(self, other: "Matrix") -> "Matrix":
        if other.nrows and self.nrows and other.ncols != self.ncols:
            raise LinalgError("dimension mismatch")
        return Matrix(self.entries + other.entries, self.backend)

    def with_rows(self, rows) -> "Matrix":
        return Matrix(rows, self.backend)

    def __eq__(self, other):
        return (
            isinstance(other, Matrix)
            and self.entries == other.entries
            and self.backend.name == other.backend.name
        )

    def __hash__(self):
        return hash((self.entries, self.backend.name))

    def __repr__(self):
        return f"Matrix({self.nrows}x{self.ncols}, {self.backend.name})"


@dataclass(frozen=True)
class LinearSolution:
    """Outcome of solve_linear: kind is 'none', 'unique', 'family' or 'inconclusive'."""

    kind: str
    particular: Optional[tuple] = None
    kernel: tuple = ()


def _integerize_rows(rows):
    """Scale each row of Fractions by the lcm of denominators: integer rows."""
    out = []
    for row in rows:
        den = 1
        for x in row:
            f = Fraction(x)
            den = den * f.denominator // gcd(den, f.denominator)
        out.append([int(Fraction(x) * den) for x in row])
    return out


def _bareiss_rank(rows) -> int:
    """Fraction-free elimination; rows must be lists of ints (mutated)."""
    if not rows or not rows[0]:
        return 0
    nrows, ncols = len(rows), len(rows[0])
    prev = 1
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        piv = None
        best = None
        for i in range(r, nrows):
            v = rows[i][c]
            if v != 0 and (best is None or abs(v) < best):
                piv, best = i, abs(v)
        if piv is None:
            continue
        if piv != r:
            rows[piv], rows[r] = rows[r], rows[piv]
        pivot = rows[r][c]
        for i in range(r + 1, nrows):
            ric = rows[i][c]
            for j in range(c + 1, ncols):
                num = pivot * rows[i][j] - ric * rows[r][j]
                q, rem = divmod(num, prev)
                if rem:
                    raise LinalgError("fraction-free elimination lost integrality")
                rows[i][j] = q
            rows[i][c] = 0
        prev = pivot
        r += 1
    return r


def _approx_rref(rows, backend: ApproxBackend, ncols: int):
    """In-place RREF with tolerance pivoting. Returns (pivot columns, ambiguous flag)."""
    tol = backend.tolerance
    nrows = len(rows)
    pivots = []
    ambiguous = False
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        piv, best = None, None
        for i in range(r, nrows):
            v = abs(rows[i][c])
            if best is None or v > best:
                piv, best = i, v
        if piv is None or best < tol:
            if best is not None and 0 < best:
                ambiguous = True
            for i in range(r, nrows):
                rows[i][c] = backend.zero()
            continue
        rows[piv], rows[r] = rows[r], rows[piv]
        inv = backend.div(backend.one(), rows[r][c])
        rows[r] = [backend.mul(inv, x) for x in rows[r]]
        for i in range(nrows):
            if i == r:
                continue
            f = rows[i][c]
            if abs(f) == 0:
                continue
            rows[i] = [backend.sub(x, backend.mul(f, y)) for x, y in zip(rows[i], rows[r])]
            rows[i][c] = backend.zero()
        pivots.append(c)
        r += 1
    return pivots, ambiguous


def _exact_rref(rows, ncols: int):
    """In-place RREF over Fractions. Returns pivot column list."""
    nrows = len(rows)
    pivots = []
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        piv = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[piv], rows[r] = rows[r], rows[piv]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return pivots


def rank(m: Matrix) -> int:
    if m.nrows == 0 or m.ncols == 0:
        return 0
    if isinstance(m.backend, ExactBackend):
        return _bareiss_rank(_integerize_rows(m.entries))
    rows = [list(r) for r in m.entries]
    pivots, _ = _approx_rref(rows, m.backend, m.ncols)
    return len(pivots)


def rref(m: Matrix):
    """(reduced matrix, pivot columns); exact or tolerance-pivoted."""
    rows = [list(r) for r in m.entries]
    if isinstance(m.backend, ExactBackend):
        pivots = _exact_rref(rows, m.ncols)
    else:
        pivots, _ = _approx_rref(rows, m.backend, m.ncols)
    return Matrix(rows, m.backend), pivots


def kernel_basis(m: Matrix):
    """Basis of the right null space, as a list of vectors."""
    if m.ncols == 0:
        return []
    if m.nrows == 0:
        return [tuple(m.backend.one() if i == j else m.backend.zero() for j in range(m.ncols)) for i in range(m.ncols)]
    red, pivots = rref(m)
    b = m.backend
    free = [c for c in range(m.ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [b.zero()] * m.ncols
        v[fc] = b.one()
        for r, pc in enumerate(pivots):
            v[pc] = b.neg(red.entries[r][fc])
        basis.append(tuple(v))
    return basis


def solve_linear(a: Matrix, rhs: Sequence) -> LinearSolution:
    """Describe the affine solution set of a x = rhs."""
    b = a.backend
    rhs = [b.convert(x) for x in rhs]
    if len(rhs) != a.nrows:
        raise LinalgError("dimension mismatch")
    rows = [list(r) + [v] for r, v in zip(a.entries, rhs)]
    if not rows:
        rows = []
    ambiguous = False
    if isinstance(b, ExactBackend):
        pivots = _exact_rref(rows, a.ncols + 1)
    else:
        pivots, ambiguous = _approx_rref(rows, b, a.ncols + 1)
    if a.ncols in pivots:
        return LinearSolution("none")
    if ambiguous:
        return LinearSolution("inconclusive")
    particular = [b.zero()] * a.ncols
    for r, pc in enumerate(pivots):
        particular[pc] = rows[r][a.ncols]
    red = Matrix([row[: a.ncols] for row in rows], b)
    free = [c for c in range(a.ncols) if c not in pivots]
    if not free:
        return LinearSolution("unique", tuple(particular))
    kernel = []
    for fc in free:
        v = [b.zero()] * a.ncols
        v[fc] = b.one()
        for r, pc in enumerate(pivots):
            v[pc] = b.neg(red.entries[r][fc])
        kernel.append(tuple(v))
    return LinearSolution("family", tuple(particular), tuple(kernel))


def intersect_rowspan(m: Matrix, covectors: Sequence[Sequence]) -> Matrix:
    """Rows spanning {v in rowspan(m) : c . v = 0 for every covector c}."""
    b = m.backend
    if not covectors:
        return m
    cons = []
    for row in m.entries:
        entry = []
        for cov in covectors:
            acc = b.zero()
            for x, y in zip(cov, row):
                acc = b.add(acc, b.mul(b.convert(x), y))
            entry.append(acc)
        cons.append(entry)
    combos = kernel_basis(Matrix(cons, b).transpose())
    rows = []
    for combo in combos:
        vec = [b.zero()] * m.ncols
        for coef, row in zip(combo, m.entries):
            if b.is_zero(coef):
                continue
            vec = [b.add(v, b.mul(coef, x)) for v, x in zip(vec, row)]
        rows.append(vec)
    return Matrix(rows, b)


def dot(v: Sequence, w: Sequence, backend=EXACT):
    acc = backend.zero()
    for a, x in zip(v, w):
        acc = backend.add(acc, backend.mul(backend.convert(a), backend.convert(x)))
    return acc


def primitive_vector(vec: Sequence) -> tuple:
    """Integer vector with content removed and first nonzero entry positive."""
    fracs = [Fraction(x) for x in vec]
    den = 1
    for f in fracs:
        den = den * f.denominator // gcd(den, f.denominator)
    ints = [int(f * den) for f in fracs]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g > 1:
        ints = [x // g for x in ints]
    for x in ints:
        if x != 0:
            if x < 0:
                ints = [-y for y in ints]
            break
    return tuple(ints)


def normalize_approx_vector(vec, backend: ApproxBackend):
    """Scale by 1/max|entry| so the largest magnitude is 1 (deterministic)."""
    vec = [backend.convert(x) for x in vec]
    m = None
    for x in vec:
        a = abs(x)
        if m is None or a > m:
            m = a
    if m is None or m == 0:
        return tuple(vec)
    inv = backend.div(backend.one(), m)
    return tuple(backend.mul(x, inv) for x in vec)


class IntRowBasis:
    """Incremental integer row-echelon basis (primitive rows, exact).

    Used to accumulate homogeneous linear constraints one at a time and
    track the rank as it stabilizes; kernel extraction at the end.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows: dict[int, list[int]] = {}

    @property
    def rank(self) -> int:
        return len(self.rows)

    @staticmethod
    def _lead(row):
        for j, x in enumerate(row):
            if x:
                return j
        return None

    @staticmethod
    def _primitive(row):
        g = 0
        for x in row:
            g = gcd(g, abs(x))
        if g > 1:
            row = [x // g for x in row]
        lead = IntRowBasis._lead(row)
        if lead is not None and row[lead] < 0:
            row = [-x for x in row]
        return row

    def add(self, row: Sequence[int]) -> bool:
        """Reduce `row` against the basis; insert if independent. True if rank grew."""
        row = list(row)
        while True:
            lead = self._lead(row)
            if lead is None:
                return False
            piv = self.rows.get(lead)
            if piv is None:
                row = self._primitive(row)
                for other_lead, other in list(self.rows.items()):
                    if other[lead]:
                        c1, c2 = row[lead], other[lead]
                        self.rows[other_lead] = self._primitive(
                            [c1 * a - c2 * b for a, b in zip(other, row)]
                        )
                self.rows[lead] = row
                return True
            c1, c2 = piv[lead], row[lead]
            row = [c1 * a - c2 * b for a, b in zip(row, piv)]

    def kernel(self):
        """Basis of {x : r . x = 0 for all rows r}, as primitive integer vectors."""
        pivots = sorted(self.rows)
        free = [c for c in range(self.ncols) if c not in self.rows]
        basis = []
        for fc in free:
            v = [Fraction(0)] * self.ncols
            v[fc] = Fraction(1)
            for pc in reversed(pivots):
                row = self.rows[pc]
                acc = sum((Fraction(row[j]) * v[j] for j in range(pc + 1, self.ncols)), Fraction(0))
                v[pc] = -acc / row[pc]
            basis.append(primitive_vector(v))
        return basis
