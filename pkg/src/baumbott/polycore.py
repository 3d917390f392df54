"""Exact multivariate polynomials over the Gaussian rationals Q(i).

Polynomials are sparse and immutable.  Terms are stored in a dict keyed by
exponent tuples and iterated in descending graded-reverse-lexicographic order,
so printing and hashing are deterministic.  Numeric evaluation (scalar or
vectorised over numpy arrays) is the only lossy path.
"""

from __future__ import annotations

import enum
import itertools
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import ParseError, VariableCountMismatch


class GaussianRational:
    """Exact complex number ``re + im*i`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            re, im = re.re, re.im + Fraction(im)
        elif isinstance(re, complex):
            raise TypeError("refusing to build an exact value from a complex float")
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @classmethod
    def coerce(cls, x):
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x)
        if isinstance(x, str):
            return parse_scalar(x)
        raise TypeError(f"cannot convert {type(x).__name__} to GaussianRational exactly")

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, complex):
            return complex(self) == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            return GaussianRational(self.re + other, self.im)
        if isinstance(other, GaussianRational):
            return GaussianRational(self.re + other.re, self.im + other.im)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            return GaussianRational(self.re - other, self.im)
        if isinstance(other, GaussianRational):
            return GaussianRational(self.re - other.re, self.im - other.im)
        return NotImplemented

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return GaussianRational(self.re * other, self.im * other)
        if isinstance(other, GaussianRational):
            a, b, c, d = self.re, self.im, other.re, other.im
            if not b and not d:
                return GaussianRational(a * c)
            return GaussianRational(a * c - b * d, a * d + b * c)
        return NotImplemented

    __rmul__ = __mul__

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def norm(self):
        """Squared modulus, a Fraction."""
        return self.re * self.re + self.im * self.im

    def inverse(self):
        if not self:
            raise ZeroDivisionError("GaussianRational division by zero")
        if not self.im:
            return GaussianRational(1 / self.re)
        n = self.norm()
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("GaussianRational division by zero")
            return GaussianRational(self.re / other, self.im / other)
        if isinstance(other, GaussianRational):
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.inverse() * other
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result, base = GaussianRational(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self):
        return self.im == 0

    def __repr__(self):
        return f"GaussianRational({self})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return _imag_str(self.im)
        im = _imag_str(abs(self.im))
        sign = "-" if self.im < 0 else "+"
        return f"{self.re} {sign} {im}"


def _imag_str(v):
    if v == 1:
        return "i"
    if v == -1:
        return "-i"
    return f"{v}*i"


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)


class MonomialOrder(enum.Enum):
    GREVLEX = "grevlex"
    LEX = "lex"

    def key(self, exp):
        """Sort key; a larger key means a larger monomial."""
        if self is MonomialOrder.LEX:
            return exp
        return (sum(exp), tuple(-e for e in reversed(exp)))

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown monomial order {value!r}") from None


DEFAULT_ORDER = MonomialOrder.GREVLEX


def divides(a, b):
    """True when the monomial with exponent ``a`` divides the one with exponent ``b``."""
    return all(x <= y for x, y in zip(a, b))


def exp_lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def exp_sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def exp_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


class Polynomial:
    """Sparse polynomial in ``nvars`` variables with GaussianRational coefficients."""

    __slots__ = ("nvars", "_terms", "__dict__")

    def __init__(self, nvars, terms=None):
        if nvars < 0:
            raise ValueError("nvars must be nonnegative")
        clean = {}
        if terms:
            for exp, c in dict(terms).items():
                exp = tuple(int(e) for e in exp)
                if len(exp) != nvars:
                    raise VariableCountMismatch(
                        f"exponent {exp} has length {len(exp)}, expected {nvars}")
                if any(e < 0 for e in exp):
                    raise ValueError(f"negative exponent in {exp}")
                c = GaussianRational.coerce(c)
                if c:
                    clean[exp] = clean.get(exp, ZERO) + c
                    if not clean[exp]:
                        del clean[exp]
        self.nvars = nvars
        self._terms = clean

    @classmethod
    def _raw(cls, nvars, terms):
        # trusted constructor: terms already clean
        p = cls.__new__(cls)
        p.nvars = nvars
        p._terms = terms
        return p

    @classmethod
    def zero(cls, nvars):
        return cls._raw(nvars, {})

    @classmethod
    def const(cls, nvars, c):
        c = GaussianRational.coerce(c)
        return cls._raw(nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def var(cls, nvars, i):
        if not 0 <= i < nvars:
            raise IndexError(f"variable index {i} out of range for {nvars} variables")
        exp = tuple(1 if j == i else 0 for j in range(nvars))
        return cls._raw(nvars, {exp: ONE})

    @classmethod
    def monomial(cls, exp, c=1):
        c = GaussianRational.coerce(c)
        exp = tuple(exp)
        return cls._raw(len(exp), {exp: c} if c else {})

    @classmethod
    def variables(cls, nvars):
        return [cls.var(nvars, i) for i in range(nvars)]

    @classmethod
    def parse(cls, text, nvars=None, names=None):
        return parse_polynomial(text, nvars=nvars, names=names)

    # -- inspection ---------------------------------------------------------

    @property
    def terms(self):
        """Read-only mapping exponent -> coefficient."""
        return dict(self._terms)

    def items(self, order=DEFAULT_ORDER):
        """Terms in descending order."""
        if order is DEFAULT_ORDER:
            return self._sorted_items
        return sorted(self._terms.items(), key=lambda t: order.key(t[0]), reverse=True)

    @cached_property
    def _sorted_items(self):
        return sorted(self._terms.items(), key=lambda t: DEFAULT_ORDER.key(t[0]), reverse=True)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self):
        return not self._terms

    def is_constant(self):
        return all(not any(e) for e in self._terms)

    def coefficient(self, exp):
        return self._terms.get(tuple(exp), ZERO)

    def constant_term(self):
        return self.coefficient((0,) * self.nvars)

    def total_degree(self):
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def degree_in(self, i):
        return max((e[i] for e in self._terms), default=-1)

    def homogeneous_part(self, d):
        return Polynomial._raw(self.nvars, {e: c for e, c in self._terms.items() if sum(e) == d})

    def leading_term(self, order=DEFAULT_ORDER):
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        exp = max(self._terms, key=order.key)
        return exp, self._terms[exp]

    def leading_monomial(self, order=DEFAULT_ORDER):
        return self.leading_term(order)[0]

    def weighted_degrees(self, weights):
        return {sum(w * e for w, e in zip(weights, exp)) for exp in self._terms}

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other):
        if self.nvars != other.nvars:
            raise VariableCountMismatch(
                f"variable-count mismatch: {self.nvars} vs {other.nvars}")

    def _lift(self, other):
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, GaussianRational)):
            return Polynomial.const(self.nvars, other)
        return None

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        terms = dict(self._terms)
        for e, c in other._terms.items():
            s = terms.get(e)
            if s is None:
                terms[e] = c
            else:
                s = s + c
                if s:
                    terms[e] = s
                else:
                    del terms[e]
        return Polynomial._raw(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            c = GaussianRational.coerce(other)
            if not c:
                return Polynomial.zero(self.nvars)
            return Polynomial._raw(self.nvars, {e: v * c for e, v in self._terms.items()})
        other = self._lift(other)
        if other is None:
            return NotImplemented
        terms = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = terms.get(e)
                terms[e] = c1 * c2 if s is None else s + c1 * c2
        return Polynomial._raw(self.nvars, {e: c for e, c in terms.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self * GaussianRational.coerce(other).inverse()
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result, base = Polynomial.const(self.nvars, 1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def mul_term(self, exp, c):
        """Multiply by the single term ``c * z^exp``."""
        if not c:
            return Polynomial.zero(self.nvars)
        return Polynomial._raw(
            self.nvars,
            {tuple(a + b for a, b in zip(e, exp)): v * c for e, v in self._terms.items()})

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self == Polynomial.const(self.nvars, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self._terms.items())))

    # -- calculus and substitution -----------------------------------------

    def differentiate(self, i):
        if not 0 <= i < self.nvars:
            raise IndexError(f"variable index {i} out of range for {self.nvars} variables")
        terms = {}
        for e, c in self._terms.items():
            if e[i]:
                d = e[:i] + (e[i] - 1,) + e[i + 1:]
                terms[d] = c * e[i]
        return Polynomial._raw(self.nvars, terms)

    def compose(self, subs):
        """Substitute polynomial ``subs[j]`` for variable j (all in a common ring)."""
        if len(subs) != self.nvars:
            raise VariableCountMismatch(
                f"need {self.nvars} substitutions, got {len(subs)}")
        if not subs:
            return self
        m = subs[0].nvars
        for s in subs:
            if s.nvars != m:
                raise VariableCountMismatch("substitutions live in different rings")
        powers = [[Polynomial.const(m, 1)] for _ in subs]
        result = Polynomial.zero(m)
        for e, c in self._terms.items():
            term = Polynomial.const(m, c)
            for j, k in enumerate(e):
                while len(powers[j]) <= k:
                    powers[j].append(powers[j][-1] * subs[j])
                if k:
                    term = term * powers[j][k]
            result = result + term
        return result

    def translate(self, shift):
        """The polynomial ``z -> p(z + shift)``."""
        shift = [GaussianRational.coerce(s) for s in shift]
        if len(shift) != self.nvars:
            raise VariableCountMismatch("shift length differs from nvars")
        zs = Polynomial.variables(self.nvars)
        return self.compose([z + s for z, s in zip(zs, shift)])

    def evaluate(self, point):
        return evaluate(self, point)

    def __call__(self, *point):
        return evaluate(self, point)

    def __repr__(self):
        return f"Polynomial({self.nvars}, {self!s})"

    def __str__(self):
        return self.to_text()

    def to_text(self, names=None):
        names = names or default_names(self.nvars)
        if not self._terms:
            return "0"
        out = []
        for k, (e, c) in enumerate(self._sorted_items):
            mono = "*".join(
                n if p == 1 else f"{n}^{p}" for n, p in zip(names, e) if p)
            neg = False
            if c.im == 0:
                neg = c.re < 0
                mag = str(abs(c.re))
                coef = "" if (abs(c.re) == 1 and mono) else mag
            elif c.re == 0:
                neg = c.im < 0
                coef = _imag_str(abs(c.im))
            else:
                coef = f"({c})"
            body = coef + ("*" if coef and mono else "") + mono
            if k == 0:
                out.append(("-" if neg else "") + body)
            else:
                out.append(("- " if neg else "+ ") + body)
        return " ".join(out)


def default_names(nvars, prefix="z"):
    return [f"{prefix}{j + 1}" for j in range(nvars)]


def differentiate(p, i):
    return p.differentiate(i)


def jacobian(components):
    """Matrix of partials: entry (i, j) is d a_i / d z_j."""
    n = len(components)
    for a in components:
        if a.nvars != n:
            raise VariableCountMismatch(
                f"jacobian needs n components in n variables; got {n} components "
                f"in {a.nvars} variables")
    return [[a.differentiate(j) for j in range(n)] for a in components]


def evaluate(p, point):
    """Evaluate ``p`` at ``point``.

    Exact when every coordinate is exact (int/Fraction/GaussianRational);
    otherwise the result is a complex float.
    """
    point = list(point)
    if len(point) != p.nvars:
        raise VariableCountMismatch(
            f"point has {len(point)} coordinates, polynomial has {p.nvars} variables")
    exact = all(isinstance(x, (int, Fraction, GaussianRational)) for x in point)
    if exact:
        xs = [GaussianRational.coerce(x) for x in point]
        acc = ZERO
        one = ONE
    else:
        xs = [complex(x) for x in point]
        for x in xs:
            if not (np.isfinite(x.real) and np.isfinite(x.imag)):
                raise ValueError("evaluation point has non-finite coordinates")
        acc = 0j
        one = 1 + 0j
    cache = [{0: one} for _ in xs]
    for e, c in p._terms.items():
        t = c if exact else complex(c)
        for j, k in enumerate(e):
            if k:
                pw = cache[j]
                if k not in pw:
                    pw[k] = xs[j] ** k
                t = t * pw[k]
        acc = acc + t
    return acc


class NumericPolynomial:
    """Vectorised complex evaluation of a fixed polynomial.

    ``__call__`` takes an array of shape (nvars, ...) and returns values of
    shape (...).  Powers are shared across terms.
    """

    def __init__(self, p):
        self.nvars = p.nvars
        items = p.items()
        self.exps = np.array([e for e, _ in items], dtype=np.int64).reshape(len(items), p.nvars)
        self.coeffs = np.array([complex(c) for _, c in items], dtype=np.complex128)
        self.maxdeg = [int(self.exps[:, j].max()) if len(items) else 0 for j in range(p.nvars)]

    def __call__(self, z, powers=None):
        z = np.asarray(z)
        if z.shape[0] != self.nvars:
            raise VariableCountMismatch("leading axis must have length nvars")
        if powers is None:
            powers = power_table(z, self.maxdeg)
        out = np.zeros(z.shape[1:], dtype=np.complex128)
        for e, c in zip(self.exps, self.coeffs):
            t = np.full(z.shape[1:], c, dtype=np.complex128)
            for j, k in enumerate(e):
                if k:
                    t = t * powers[j][k]
            out += t
        return out


def power_table(z, maxdeg):
    table = []
    for j, d in enumerate(maxdeg):
        row = [np.ones(z.shape[1:], dtype=np.complex128)]
        for _ in range(d):
            row.append(row[-1] * z[j])
        table.append(row)
    return table


# -- exact linear algebra over Q(i) ----------------------------------------

def det_exact(matrix):
    """Determinant of a square matrix of exact scalars by Gaussian elimination."""
    a = [[GaussianRational.coerce(x) for x in row] for row in matrix]
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("matrix is not square")
    det = ONE
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return ZERO
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        p = a[col][col]
        det = det * p
        inv = p.inverse()
        for r in range(col + 1, n):
            f = a[r][col]
            if f:
                f = f * inv
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def solve_exact(matrix, rhs):
    """Solve ``matrix @ x = rhs`` exactly (square, nonsingular)."""
    n = len(matrix)
    a = [[GaussianRational.coerce(x) for x in row] + [GaussianRational.coerce(b)]
         for row, b in zip(matrix, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        a[col], a[piv] = a[piv], a[col]
        inv = a[col][col].inverse()
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def poly_det(matrix):
    """Determinant of a square matrix of Polynomials (Leibniz expansion)."""
    n = len(matrix)
    if n == 0:
        raise ValueError("empty matrix")
    nvars = matrix[0][0].nvars
    total = Polynomial.zero(nvars)
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = Polynomial.const(nvars, -1 if inversions % 2 else 1)
        for i, j in enumerate(perm):
            term = term * matrix[i][j]
            if term.is_zero():
                break
        total = total + term
    return total


# -- text syntax -------------------------------------------------------------

def _byte_offset(text, pos):
    return len(text[:pos].encode("utf-8"))


class _Parser:
    """Recursive descent over ``+ - * ^``, parentheses, rationals and ``i``."""

    def __init__(self, text, names, nvars):
        self.text = text
        self.pos = 0
        self.names = names
        self.nvars = nvars
        # longest names first so z10 wins over z1
        self.lookup = sorted(names.items(), key=lambda kv: -len(kv[0]))

    def error(self, msg, pos=None):
        pos = self.pos if pos is None else pos
        raise ParseError(msg, _byte_offset(self.text, pos), self.text)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self):
        if not self.text.strip():
            self.error("empty expression", 0)
        p = self.expr()
        if self.peek():
            self.error(f"unexpected character {self.peek()!r}")
        return p

    def expr(self):
        sign = 1
        if self.peek() in "+-":
            sign = -1 if self.text[self.pos] == "-" else 1
            self.pos += 1
        p = self.term()
        if sign < 0:
            p = -p
        while self.peek() in ("+", "-") and self.peek():
            op = self.text[self.pos]
            self.pos += 1
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self):
        p = self.unary()
        while self.peek() == "*":
            self.pos += 1
            p = p * self.unary()
        return p

    def unary(self):
        if self.peek() == "-":
            self.pos += 1
            return -self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            self.skip()
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if start == self.pos:
                self.error("exponent must be a nonnegative integer literal")
            return base ** int(self.text[start:self.pos])
        return base

    def atom(self):
        ch = self.peek()
        start = self.pos
        if not ch:
            self.error("unexpected end of input")
        if ch == "(":
            self.pos += 1
            p = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return p
        if ch.isdigit():
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            num = int(self.text[start:self.pos])
            # rational literal: digits '/' digits, no whitespace inside
            if self.text[self.pos:self.pos + 1] == "/":
                self.pos += 1
                dstart = self.pos
                while self.pos < len(self.text) and self.text[self.pos].isdigit():
                    self.pos += 1
                if dstart == self.pos:
                    self.error("expected denominator after '/'")
                den = int(self.text[dstart:self.pos])
                if den == 0:
                    self.error("zero denominator", dstart)
                return Polynomial.const(self.nvars, Fraction(num, den))
            return Polynomial.const(self.nvars, num)
        for name, idx in self.lookup:
            if self.text.startswith(name, self.pos):
                end = self.pos + len(name)
                if end < len(self.text) and (self.text[end].isalnum() or self.text[end] == "_"):
                    continue
                self.pos = end
                if idx is None:
                    return Polynomial.const(self.nvars, I)
                return Polynomial.var(self.nvars, idx)
        j = self.pos
        while j < len(self.text) and (self.text[j].isalnum() or self.text[j] == "_"):
            j += 1
        if j > self.pos:
            self.error(f"unknown identifier {self.text[self.pos:j]!r}")
        self.error(f"unexpected character {ch!r}")


def parse_polynomial(text, nvars=None, names=None, prefix="z"):
    """Parse polynomial text such as ``"z1^2 - 3/2*z2 + i*z1*z2"``.

    Either ``names`` (variable names, in order) or ``nvars`` must be given;
    with ``nvars`` the names are ``{prefix}1..{prefix}N``.
    """
    if names is None:
        if nvars is None:
            raise ValueError("parse_polynomial needs nvars or names")
        names = default_names(nvars, prefix)
    table = {n: j for j, n in enumerate(names)}
    if "i" in table:
        raise ValueError("'i' is reserved for the imaginary unit")
    table["i"] = None
    return _Parser(text, table, len(names)).parse()


def parse_scalar(text):
    p = parse_polynomial(text, names=[])
    return p.constant_term()


def format_scalar(c):
    return str(GaussianRational.coerce(c))
