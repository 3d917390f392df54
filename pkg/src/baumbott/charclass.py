"""Invariant polynomials on square matrices.

An invariant polynomial of weight l is stored through its expression ``hat``
in the elementary symmetric functions c_1, ..., c_n of the eigenvalues, where
c_k has weight k.  ``Phi(A) = hat(e_1(A), ..., e_n(A))`` with e_k(A) the
coefficient of t^k in det(I + tA).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegreeMismatch, ParseError, ShapeMismatch
from .polycore import (
    GaussianRational,
    Polynomial,
    default_names,
    parse_polynomial,
    solve_exact,
)

PRESETS = ("c1^n", "cn", "c1*c_{n-1}", "ch_n")


class ScalarMatrix:
    """Square matrix whose entries are all exact (Q(i)) or all complex floats."""

    def __init__(self, entries):
        if isinstance(entries, ScalarMatrix):
            self.rows, self.exact = entries.rows, entries.exact
            return
        if isinstance(entries, np.ndarray):
            if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
                raise ShapeMismatch(f"expected a square matrix, got shape {entries.shape}")
            self.rows = [[complex(x) for x in row] for row in entries]
            self.exact = False
            return
        rows = [list(r) for r in entries]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ShapeMismatch("matrix is not square")
        flat = [x for r in rows for x in r]
        self.exact = all(isinstance(x, (int, Fraction, GaussianRational)) for x in flat)
        if self.exact:
            self.rows = [[GaussianRational.coerce(x) for x in r] for r in rows]
        else:
            self.rows = [[complex(x) for x in r] for r in rows]

    @property
    def size(self):
        return len(self.rows)

    def zero(self):
        return GaussianRational(0) if self.exact else 0j

    def one(self):
        return GaussianRational(1) if self.exact else 1 + 0j

    def __add__(self, other):
        other = ScalarMatrix(other)
        if other.size != self.size:
            raise ShapeMismatch("matrix sizes differ")
        return ScalarMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def scale(self, s):
        return ScalarMatrix([[s * a for a in r] for r in self.rows])

    def __matmul__(self, other):
        n = self.size
        o = other.rows
        return ScalarMatrix([[sum((self.rows[i][k] * o[k][j] for k in range(n)), self.zero())
                              for j in range(n)] for i in range(n)])

    def to_numpy(self):
        return np.array([[complex(x) for x in r] for r in self.rows], dtype=np.complex128)


def _charpoly_coeffs(m):
    """Faddeev-LeVerrier: returns c with det(tI - A) = sum_j c[j] t^j."""
    A = m.rows
    n = m.size
    zero, one = m.zero(), m.one()
    c = [zero] * (n + 1)
    c[n] = one
    M = [[zero] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{n-k+1} I
        AM = [[sum((A[i][l] * M[l][j] for l in range(n)), zero) for j in range(n)]
              for i in range(n)]
        M = [[AM[i][j] + (c[n - k + 1] if i == j else zero) for j in range(n)] for i in range(n)]
        tr = sum((sum((A[i][l] * M[l][i] for l in range(n)), zero) for i in range(n)), zero)
        c[n - k] = -tr * Fraction(1, k) if m.exact else -tr / k
    return c


def elementary_symmetric(A):
    """[e_0, e_1, ..., e_n] of A: the coefficients of det(I + tA)."""
    m = ScalarMatrix(A)
    c = _charpoly_coeffs(m)
    n = m.size
    return [c[n - k] if k % 2 == 0 else -c[n - k] for k in range(n + 1)]


def elem_symm(A, k):
    m = ScalarMatrix(A)
    if not 0 <= k <= m.size:
        raise ValueError(f"degree {k} out of range for a {m.size}x{m.size} matrix")
    return elementary_symmetric(m)[k]


@dataclass(frozen=True)
class SymmetricPolynomial:
    """Invariant polynomial through its elementary-symmetric expression ``hat``.

    ``hat`` is a Polynomial in n variables c_1..c_n, weighted-homogeneous of
    total weight ``weight`` (c_k has weight k).
    """

    n: int
    hat: Polynomial
    weight: int

    def __init__(self, n, hat, weight=None):
        if hat.nvars != n:
            raise ShapeMismatch(f"hat has {hat.nvars} variables, expected {n}")
        if hat.is_zero():
            raise DegreeMismatch("the zero polynomial has no weight")
        weights = hat.weighted_degrees(range(1, n + 1))
        if len(weights) != 1:
            raise DegreeMismatch(f"not weighted-homogeneous: weights {sorted(weights)}")
        (w,) = weights
        if weight is not None and weight != w:
            raise DegreeMismatch(f"declared weight {weight} but polynomial has weight {w}")
        if not 1 <= w <= n:
            raise DegreeMismatch(f"weight {w} outside 1..{n}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "hat", hat)
        object.__setattr__(self, "weight", w)

    @classmethod
    def parse(cls, text, n):
        return parse_phi(text, n)

    def __str__(self):
        return self.hat.to_text(default_names(self.n, "c"))

    def __call__(self, A):
        return phi_eval(self, A)


def phi_eval(phi, A):
    m = ScalarMatrix(A)
    if m.size != phi.n:
        raise ShapeMismatch(f"matrix size {m.size} differs from n = {phi.n}")
    e = elementary_symmetric(m)[1:]
    return phi.hat.evaluate(e)


def _vandermonde_inverse(l):
    nodes = list(range(l + 1))
    V = [[Fraction(s) ** k for k in range(l + 1)] for s in nodes]
    inv_cols = []
    for s in range(l + 1):
        rhs = [1 if r == s else 0 for r in range(l + 1)]
        inv_cols.append([x.re for x in solve_exact(V, rhs)])
    # inv[k][s]: weight of value at node s in the coefficient of s^k
    return [[inv_cols[s][k] for s in range(l + 1)] for k in range(l + 1)]


def phi_mixed(phi, A, B, k):
    """Coefficient of s^k in Phi(sA + B), by exact interpolation at s = 0..l."""
    a, b = ScalarMatrix(A), ScalarMatrix(B)
    if a.size != phi.n or b.size != phi.n:
        raise ShapeMismatch("matrix sizes must equal n")
    l = phi.weight
    if not 0 <= k <= l:
        raise ValueError(f"k = {k} outside 0..{l}")
    exact = a.exact and b.exact
    values = [phi_eval(phi, a.scale(s) + b) for s in range(l + 1)]
    weights = _vandermonde_inverse(l)[k]
    if exact:
        total = GaussianRational(0)
        for w, v in zip(weights, values):
            total = total + v * w
        return total
    return sum(float(w) * complex(v) for w, v in zip(weights, values))


def power_sum_to_elementary(k, n):
    """p_k as a polynomial in c_1..c_n via Newton's identities."""
    cs = Polynomial.variables(n)
    zero = Polynomial.zero(n)

    def e(j):
        return cs[j - 1] if 1 <= j <= n else zero

    p = [None]
    for m in range(1, k + 1):
        acc = e(m) * ((-1) ** (m - 1) * m)
        for i in range(1, m):
            acc = acc + e(i) * p[m - i] * ((-1) ** (i - 1))
        p.append(acc)
    return p[k]


def newton_convert(expr, n):
    """Rewrite a weighted-homogeneous polynomial in power sums p_1..p_n in the c-basis."""
    if expr.nvars != n:
        raise ShapeMismatch(f"expression has {expr.nvars} variables, expected {n}")
    weights = expr.weighted_degrees(range(1, n + 1))
    if len(weights) != 1:
        raise DegreeMismatch(f"power-sum expression is not weighted-homogeneous: {sorted(weights)}")
    hat = expr.compose([power_sum_to_elementary(k, n) for k in range(1, n + 1)])
    return SymmetricPolynomial(n, hat)


def preset(name, n):
    """Named invariant polynomials of weight n."""
    cs = Polynomial.variables(n)
    if name == "c1^n":
        hat = cs[0] ** n
    elif name == "cn":
        hat = cs[n - 1]
    elif name == "c1*c_{n-1}":
        hat = cs[0] * cs[n - 2] if n >= 2 else cs[0]
    elif name == "ch_n":
        pn = Polynomial.var(n, n - 1)
        return newton_convert(pn * Fraction(1, math.factorial(n)), n)
    else:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")
    return SymmetricPolynomial(n, hat)


def parse_phi(text, n):
    """Parse Phi from text in c1..cN, p1..pN (power sums), or a preset name."""
    text = text.strip()
    if text in PRESETS:
        return preset(text, n)
    cnames, pnames = default_names(n, "c"), default_names(n, "p")
    uses_p = any(ch == "p" for ch in text)
    uses_c = any(ch == "c" for ch in text)
    if uses_p and uses_c:
        raise ParseError("mixing c_k and p_k variables is not supported", 0, text)
    try:
        expr = parse_polynomial(text, names=pnames if uses_p else cnames)
    except ParseError as exc:
        # a well-formed name with index > n is a weight problem, not a syntax one
        bad = _out_of_range_index(text, "p" if uses_p else "c", n)
        if bad is not None:
            raise DegreeMismatch(f"{'p' if uses_p else 'c'}{bad} has weight {bad} > n = {n}") from exc
        raise
    if uses_p:
        return newton_convert(expr, n)
    return SymmetricPolynomial(n, expr)


def _out_of_range_index(text, prefix, n):
    for m in re.finditer(rf"{prefix}(\d+)", text):
        if int(m.group(1)) > n:
            return int(m.group(1))
    return None
