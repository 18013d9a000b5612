"""Sparse multivariate polynomials over exact rationals.

Terms live in a map from exponent vectors to nonzero Fraction
coefficients; printing and equality use graded-lexicographic order.
The module also provides the text grammar shared with the CLI and
Sturm-sequence real root isolation for univariate polynomials:

    poly     := ['-'] term (('+'|'-') term)*
    term     := factor ('*' factor)*
    factor   := rational | var | var '^' uint | '(' poly ')'
    rational := int | int '/' uint
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Optional, Sequence

from .scalars import EXACT, format_rational


class PolyError(ValueError):
    pass


class PolySyntaxError(PolyError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


def _grlex_key(exp):
    return (sum(exp), exp)


class MultiPoly:
    """Immutable sparse polynomial over Q in a fixed ordered variable list."""

    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, vars: Sequence[str], terms=None):
        vars = tuple(vars)
        clean = {}
        if terms:
            for exp, coeff in terms.items():
                coeff = Fraction(coeff)
                if coeff == 0:
                    continue
                exp = tuple(int(e) for e in exp)
                if len(exp) != len(vars) or any(e < 0 for e in exp):
                    raise PolyError("bad exponent vector")
                clean[exp] = coeff
        self.vars = vars
        self.terms = clean
        self._hash = None

    # -- constructors ------------------------------------------------

    @classmethod
    def zero(cls, vars) -> "MultiPoly":
        return cls(vars, {})

    @classmethod
    def const(cls, vars, value) -> "MultiPoly":
        vars = tuple(vars)
        return cls(vars, {(0,) * len(vars): Fraction(value)})

    @classmethod
    def variable(cls, vars, name) -> "MultiPoly":
        vars = tuple(vars)
        if name not in vars:
            raise PolyError(f"unknown variable {name!r}")
        exp = tuple(1 if v == name else 0 for v in vars)
        return cls(vars, {exp: Fraction(1)})

    # -- ring structure ----------------------------------------------

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.vars != self.vars:
                raise PolyError("variable-list mismatch")
            return other
        return MultiPoly.const(self.vars, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for exp, c in other.terms.items():
            s = out.get(exp, Fraction(0)) + c
            if s == 0:
                out.pop(exp, None)
            else:
                out[exp] = s
        return MultiPoly(self.vars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, Fraction(0)) + c1 * c2
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return MultiPoly(self.vars, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise PolyError("exponent must be a nonnegative integer")
        result = MultiPoly.const(self.vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, MultiPoly)
            and self.vars == other.vars
            and self.terms == other.terms
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, tuple(sorted(self.terms.items()))))
        return self._hash

    # -- queries -----------------------------------------------------

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degree_in(self, name: str) -> int:
        i = self._var_index(name)
        return max((e[i] for e in self.terms), default=0)

    def is_homogeneous(self) -> bool:
        degs = {sum(e) for e in self.terms}
        return len(degs) <= 1

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise PolyError("not a constant polynomial")
        return self.terms.get((0,) * len(self.vars), Fraction(0))

    def _var_index(self, name: str) -> int:
        try:
            return self.vars.index(name)
        except ValueError:
            raise PolyError(f"unknown variable {name!r}") from None

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True)

    # -- calculus and composition -------------------------------------

    def evaluate(self, assignment, backend=EXACT):
        """Value at a point; assignment must cover every variable."""
        for v in self.vars:
            if v not in assignment:
                raise PolyError(f"missing variable {v!r} in assignment")
        values = [backend.convert(assignment[v]) for v in self.vars]
        # var -> powers computed once per call
        maxexp = [0] * len(self.vars)
        for e in self.terms:
            for i, k in enumerate(e):
                if k > maxexp[i]:
                    maxexp[i] = k
        powers = []
        for i, m in enumerate(maxexp):
            row = [backend.one()]
            for _ in range(m):
                row.append(backend.mul(row[-1], values[i]))
            powers.append(row)
        acc = backend.zero()
        for exp, coeff in self.sorted_terms():
            term = backend.convert(coeff)
            for i, k in enumerate(exp):
                if k:
                    term = backend.mul(term, powers[i][k])
            acc = backend.add(acc, term)
        return acc

    def partial(self, name: str) -> "MultiPoly":
        """Formal partial derivative."""
        i = self._var_index(name)
        out = {}
        for exp, coeff in self.terms.items():
            k = exp[i]
            if k == 0:
                continue
            e = list(exp)
            e[i] = k - 1
            out[tuple(e)] = coeff * k
        return MultiPoly(self.vars, out)

    def substitute(self, bindings) -> "MultiPoly":
        """Compose with scalar or polynomial bindings.

        Polynomial bindings must all share one variable list, which
        becomes the result's; unbound variables must belong to it.
        """
        poly_vars = None
        for val in bindings.values():
            if isinstance(val, MultiPoly):
                if poly_vars is None:
                    poly_vars = val.vars
                elif val.vars != poly_vars:
                    raise PolyError("variable-list mismatch among bindings")
        unbound = tuple(v for v in self.vars if v not in bindings)
        if poly_vars is None:
            poly_vars = unbound
        for v in unbound:
            if v not in poly_vars:
                raise PolyError("variable-list mismatch")
        table = {}
        for v in self.vars:
            if v in bindings:
                val = bindings[v]
                if isinstance(val, MultiPoly):
                    table[v] = val
                else:
                    table[v] = MultiPoly.const(poly_vars, val)
            else:
                table[v] = MultiPoly.variable(poly_vars, v)
        result = MultiPoly.zero(poly_vars)
        for exp, coeff in self.terms.items():
            term = MultiPoly.const(poly_vars, coeff)
            for v, k in zip(self.vars, exp):
                if k:
                    term = term * table[v] ** k
            result = result + term
        return result

    def restrict_vars(self, vars) -> "MultiPoly":
        """Reindex onto a variable list containing all used variables."""
        vars = tuple(vars)
        idx = []
        for i, v in enumerate(self.vars):
            if v in vars:
                idx.append((i, vars.index(v)))
            elif any(e[i] for e in self.terms):
                raise PolyError(f"variable {v!r} in use, cannot drop")
        out = {}
        for exp, coeff in self.terms.items():
            e = [0] * len(vars)
            for i, j in idx:
                e[j] = exp[i]
            out[tuple(e)] = coeff
        return MultiPoly(vars, out)

    # -- printing ------------------------------------------------------

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for n, (exp, coeff) in enumerate(self.sorted_terms()):
            mono = "*".join(
                v if k == 1 else f"{v}^{k}"
                for v, k in zip(self.vars, exp)
                if k
            )
            mag = abs(coeff)
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{format_rational(mag)}*{mono}"
            else:
                body = format_rational(mag)
            if n == 0:
                parts.append(body if coeff > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if coeff > 0 else f"- {body}")
        return " ".join(parts)

    def __repr__(self):
        return f"MultiPoly({self.to_text()!r})"


# ---------------------------------------------------------------------------
# parsing


class _Parser:
    def __init__(self, text: str, vars: Sequence[str]):
        self.text = text
        self.vars = tuple(vars)
        self.pos = 0

    def error(self, message: str) -> PolySyntaxError:
        return PolySyntaxError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def parse_uint(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise self.error("expected integer")
        return int(self.text[start : self.pos])

    def parse_name(self) -> str:
        self.skip_ws()
        start = self.pos
        if self.pos < len(self.text) and (self.text[self.pos].isalpha() or self.text[self.pos] == "_"):
            self.pos += 1
            while self.pos < len(self.text) and (
                self.text[self.pos].isalnum() or self.text[self.pos] == "_"
            ):
                self.pos += 1
        if self.pos == start:
            raise self.error("expected name")
        return self.text[start : self.pos]

    def parse_factor(self) -> MultiPoly:
        c = self.peek()
        if c == "(":
            self.pos += 1
            inner = self.parse_poly()
            if not self.take(")"):
                raise self.error("expected ')'")
            return inner
        if c.isdigit():
            num = self.parse_uint()
            if self.peek() == "/":
                self.pos += 1
                den = self.parse_uint()
                if den == 0:
                    raise self.error("zero denominator")
                return MultiPoly.const(self.vars, Fraction(num, den))
            return MultiPoly.const(self.vars, num)
        if c.isalpha() or c == "_":
            name = self.parse_name()
            if name not in self.vars:
                raise self.error(f"unknown variable {name!r}")
            p = MultiPoly.variable(self.vars, name)
            if self.peek() == "^":
                self.pos += 1
                k = self.parse_uint()
                p = p**k
            return p
        raise self.error("expected factor")

    def parse_term(self) -> MultiPoly:
        p = self.parse_factor()
        while self.peek() == "*":
            self.pos += 1
            p = p * self.parse_factor()
        return p

    def parse_poly(self) -> MultiPoly:
        sign = -1 if self.take("-") else 1
        p = self.parse_term()
        if sign < 0:
            p = -p
        while True:
            c = self.peek()
            if c == "+":
                self.pos += 1
                p = p + self.parse_term()
            elif c == "-":
                self.pos += 1
                p = p - self.parse_term()
            else:
                return p


def parse_poly(text: str, vars: Sequence[str]) -> MultiPoly:
    """Parse `text` over the ordered variable list `vars`."""
    parser = _Parser(text, vars)
    result = parser.parse_poly()
    parser.skip_ws()
    if parser.pos != len(text):
        raise parser.error("unexpected trailing input")
    return result


# ---------------------------------------------------------------------------
# univariate real root isolation


@dataclass(frozen=True)
class RootRecord:
    """An exact rational root, or an isolating open interval, with multiplicity."""

    value: Optional[Fraction]
    interval: Optional[tuple]
    multiplicity: int

    def position(self) -> Fraction:
        if self.value is not None:
            return self.value
        return (self.interval[0] + self.interval[1]) / 2

    def approx(self, backend):
        if self.value is not None:
            return backend.convert(self.value)
        return backend.div(
            backend.add(backend.convert(self.interval[0]), backend.convert(self.interval[1])),
            backend.convert(2),
        )


@dataclass(frozen=True)
class RootIsolation:
    records: tuple

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def rational_roots(self):
        return [r for r in self.records if r.value is not None]


def _dense_coeffs(p: MultiPoly):
    """Ascending coefficient list of a univariate polynomial."""
    live = [i for i in range(len(p.vars)) if any(e[i] for e in p.terms)]
    if len(live) > 1:
        raise PolyError("polynomial is not univariate")
    i = live[0] if live else 0
    deg = max((e[i] for e in p.terms), default=0)
    coeffs = [Fraction(0)] * (deg + 1)
    for exp, c in p.terms.items():
        coeffs[exp[i]] = c
    return coeffs


def _strip(coeffs):
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def _dense_eval(coeffs, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _dense_derivative(coeffs):
    return [c * k for k, c in enumerate(coeffs)][1:]


def _dense_divmod(num, den):
    num = list(num)
    den = _strip(list(den))
    if not den:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(0, len(num) - len(den) + 1)
    while len(num) >= len(den) and _strip(num):
        shift = len(num) - len(den)
        f = num[-1] / den[-1]
        q[shift] = f
        for i, d in enumerate(den):
            num[shift + i] -= f * d
        num = _strip(num)
    return q, num


def _dense_gcd(a, b):
    a, b = _strip(list(a)), _strip(list(b))
    while b:
        _, r = _dense_divmod(a, b)
        a, b = b, _strip(r)
    if a:
        lead = a[-1]
        a = [c / lead for c in a]
    return a


def _primitive_int(coeffs):
    den = 1
    for c in coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g > 1:
        ints = [x // g for x in ints]
    return ints


def _dense_sub(a, b):
    n = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (n - len(a))
    b = list(b) + [Fraction(0)] * (n - len(b))
    return _strip([x - y for x, y in zip(a, b)])


def _yun_squarefree(coeffs):
    """Yun decomposition: [(squarefree factor, multiplicity)], product = input up to scale."""
    f = _strip(list(coeffs))
    if len(f) <= 1:
        return []
    df = _dense_derivative(f)
    g = _dense_gcd(f, df)
    if len(g) <= 1:
        return [(f, 1)]
    v, _ = _dense_divmod(f, g)
    w, _ = _dense_divmod(df, g)
    out = []
    i = 1
    while len(v) > 1:
        h = _dense_sub(w, _dense_derivative(v))
        s = _dense_gcd(v, h) if h else list(v)
        if len(s) > 1:
            out.append((s, i))
        v, _ = _dense_divmod(v, s)
        w, _ = _dense_divmod(h, s) if h else ([], [])
        i += 1
    return out


_FACTOR_BOUND = 10**6


def _factorize(n: int):
    n = abs(n)
    factors = {}
    if n <= 1:
        return factors
    # huge coefficients get a coarse factorization only; any rational root
    # this misses is still isolated as an interval
    bound = _FACTOR_BOUND if n < 10**12 else 10**4
    for p in (2, 3):
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
    d = 5
    while d <= bound and d * d <= n:
        for p in (d, d + 2):
            while n % p == 0:
                factors[p] = factors.get(p, 0) + 1
                n //= p
        d += 6
    if n > 1:
        factors[n] = factors.get(n, 0) + 1
    return factors


def _divisors(n: int, cap: int = 1024):
    divs = [1]
    for p, k in _factorize(n).items():
        grown = []
        pe = 1
        for _ in range(k + 1):
            grown.extend(d * pe for d in divs)
            pe *= p
            if len(grown) > cap:
                break
        divs = grown
        if len(divs) > cap:
            divs = divs[:cap]
    return sorted(set(divs))


_CANDIDATE_CAP = 200_000


def _rational_roots(int_coeffs):
    """Exact rational roots of a squarefree primitive integer polynomial.

    Candidates p/q with p | a0 and q | an are pruned by the classical
    divisibility tests (p - q) | P(1) and (p + q) | P(-1) before any
    evaluation; a hard cap keeps adversarially smooth coefficients from
    exploding the search (missed roots would still be isolated as
    intervals).
    """
    coeffs = list(int_coeffs)
    roots = []
    if not coeffs:
        return roots, coeffs
    if coeffs[0] == 0:
        roots.append(Fraction(0))
        while coeffs and coeffs[0] == 0:
            coeffs.pop(0)
    if len(coeffs) <= 1:
        return roots, coeffs
    a0, an = coeffs[0], coeffs[-1]
    p_one = sum(coeffs)
    p_minus = sum(c if k % 2 == 0 else -c for k, c in enumerate(coeffs))
    fr = [Fraction(c) for c in coeffs]
    tested = 0
    for q in _divisors(an):
        for p in _divisors(a0):
            if gcd(p, q) != 1:
                continue
            for sp in (p, -p):
                if p_one != 0 and (sp - q) != 0 and p_one % (sp - q):
                    continue
                if p_minus != 0 and (sp + q) != 0 and p_minus % (sp + q):
                    continue
                tested += 1
                if tested > _CANDIDATE_CAP:
                    break
                cand = Fraction(sp, q)
                if _dense_eval(fr, cand) == 0 and cand not in roots:
                    roots.append(cand)
            if tested > _CANDIDATE_CAP:
                break
        if tested > _CANDIDATE_CAP:
            break
    for r in roots:
        if r == 0:
            continue
        fr, rem = _dense_divmod(fr, [-r, Fraction(1)])
        if _strip(rem):
            raise PolyError("root division failed")
    return roots, _primitive_int(fr)


def _sturm_chain(coeffs):
    chain = [_strip([Fraction(c) for c in coeffs])]
    d = _dense_derivative(chain[0])
    if d:
        chain.append(d)
    while len(chain[-1]) > 1:
        _, r = _dense_divmod(chain[-2], chain[-1])
        r = _strip(r)
        if not r:
            break
        chain.append([-c for c in r])
    return chain


def _variations(values):
    signs = [1 if v > 0 else -1 for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _sturm_count(chain, lo: Fraction, hi: Fraction) -> int:
    """Distinct roots in the half-open interval (lo, hi]."""
    vlo = _variations([_dense_eval(c, lo) for c in chain])
    vhi = _variations([_dense_eval(c, hi) for c in chain])
    return vlo - vhi


def _cauchy_bound(coeffs) -> Fraction:
    an = Fraction(coeffs[-1])
    m = max((abs(Fraction(c) / an) for c in coeffs[:-1]), default=Fraction(0))
    return 1 + m


def _refine(coeffs, lo: Fraction, hi: Fraction, width: Fraction):
    """Bisect a sign-change interval; may land exactly on a rational root."""
    flo = _dense_eval(coeffs, lo)
    while hi - lo >= width:
        mid = (lo + hi) / 2
        fmid = _dense_eval(coeffs, mid)
        if fmid == 0:
            return None, mid
        if (flo > 0) != (fmid > 0):
            hi = mid
        else:
            lo, flo = mid, fmid
    return (lo, hi), None


DEFAULT_ROOT_WIDTH = Fraction(1, 2**64)


def isolate_real_roots(p: MultiPoly, width: Fraction = DEFAULT_ROOT_WIDTH) -> RootIsolation:
    """Isolate all real roots of a nonzero univariate polynomial.

    Rational roots are reported exactly (rational-root criterion on the
    primitive integer form); the rest get pairwise-disjoint isolating
    intervals with rational endpoints refined below `width`.
    """
    if not p:
        raise PolyError("zero polynomial has no isolated roots")
    coeffs = _dense_coeffs(p)
    if len(coeffs) <= 1:
        return RootIsolation(())
    records = []
    for factor, mult in _yun_squarefree(coeffs):
        ints = _primitive_int(factor)
        rats, rest = _rational_roots(ints)
        records.extend(RootRecord(r, None, mult) for r in rats)
        rest = _strip([Fraction(c) for c in rest])
        if len(rest) <= 1:
            continue
        if len(rest) == 2:
            records.append(RootRecord(-rest[0] / rest[1], None, mult))
            continue
        chain = _sturm_chain(rest)
        bound = _cauchy_bound(rest)
        stack = [(-bound - 1, bound)]
        while stack:
            lo, hi = stack.pop()
            n = _sturm_count(chain, lo, hi)
            if n == 0:
                continue
            if n == 1:
                interval, exact = _refine(rest, lo, hi, width)
                if exact is not None:
                    records.append(RootRecord(exact, None, mult))
                else:
                    records.append(RootRecord(None, interval, mult))
                continue
            mid = (lo + hi) / 2
            if _dense_eval(rest, mid) == 0:
                records.append(RootRecord(mid, None, mult))
                eps = width / 4
                stack.append((lo, mid - eps))
                stack.append((mid + eps, hi))
            else:
                stack.append((lo, mid))
                stack.append((mid, hi))
    records.sort(key=lambda r: r.position())
    return RootIsolation(tuple(records))


def poly_det(rows) -> MultiPoly:
    """Determinant of a square matrix of polynomials (Laplace expansion)."""
    n = len(rows)
    if n == 1:
        return rows[0][0]
    acc = None
    for j in range(n):
        minor = [[rows[i][k] for k in range(n) if k != j] for i in range(1, n)]
        term = rows[0][j] * poly_det(minor)
        if j % 2:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def newton_refine(p: MultiPoly, x0, backend, max_iter: int = 80):
    """Polish a root estimate of a univariate polynomial on the approx backend."""
    var = None
    for v in p.vars:
        if p.degree_in(v) > 0:
            var = v
            break
    if var is None:
        raise PolyError("constant polynomial")
    dp = p.partial(var)
    x = backend.convert(x0)
    step_floor = backend.convert(Fraction(1, 2 ** (backend.precision - 4)))
    for _ in range(max_iter):
        fx = p.evaluate({v: x if v == var else backend.zero() for v in p.vars}, backend)
        dfx = dp.evaluate({v: x if v == var else backend.zero() for v in p.vars}, backend)
        if backend.is_zero(dfx):
            break
        step = backend.div(fx, dfx)
        x = backend.sub(x, step)
        scale = abs(x) if abs(x) > 1 else backend.one()
        if abs(step) < backend.mul(step_floor, scale):
            break
    return x
