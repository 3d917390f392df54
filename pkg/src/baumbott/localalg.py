"""Zero-dimensional local algebras and exact Grothendieck residues.

The residue ``Res_0[h dz / (a_1 ... a_n)]`` is computed with the
transformation law: if ``z_i^{N_i} = sum_j C_ij a_j`` then

    Res_0[h dz / a] = Res_0[h det(C) dz / z^N]
                    = coefficient of z^{N-1} in h * det(C).

The certificates ``C`` come from a Buchberger run that tracks, for every
basis element, its expression in terms of the input generators.  A global
(graded) monomial order is used, which is valid as long as the origin is the
only affine common zero of the generators; otherwise the nilpotency search
fails with :class:`OriginNotOnlyZero`.

:func:`local_residue` drops that restriction.  It uses the minimal polynomial
``t^m g(t)`` of each z_i on the quotient algebra: ``z_i^m g(z_i)`` lies in the
ideal and ``g`` is a unit at the origin, so the same transformation law
applies after expanding ``1/g`` to order ``m - 1``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from .errors import InfiniteDimensional, OriginNotOnlyZero, VariableCountMismatch
from .polycore import (
    DEFAULT_ORDER,
    ONE,
    ZERO,
    MonomialOrder,
    Polynomial,
    det_exact,
    divides,
    exp_lcm,
    exp_sub,
    jacobian,
    parse_polynomial,
    poly_det,
)

__all__ = [
    "MonomialOrder",
    "GroebnerBasis",
    "QuotientAlgebra",
    "buchberger_with_cofactors",
    "normal_form",
    "reduce",
    "quotient_basis",
    "nilpotent_power",
    "grothendieck_residue",
    "local_residue",
    "milnor_number",
    "residue_pairing_matrix",
]


@dataclass(frozen=True)
class GroebnerBasis:
    """Reduced Groebner basis with membership certificates.

    ``cofactors[k][j]`` is the coefficient of ``generators[j]`` in the
    expression of ``elements[k]``.
    """

    generators: tuple
    elements: tuple
    cofactors: tuple
    order: MonomialOrder = DEFAULT_ORDER
    stats: dict = field(default_factory=dict, compare=False)

    @property
    def nvars(self):
        return self.generators[0].nvars

    @property
    def leading_monomials(self):
        return [g.leading_monomial(self.order) for g in self.elements]

    def check_cofactors(self):
        """True iff every element equals its cofactor combination exactly."""
        for g, row in zip(self.elements, self.cofactors):
            combo = Polynomial.zero(self.nvars)
            for c, a in zip(row, self.generators):
                combo = combo + c * a
            if combo != g:
                return False
        return True

    def to_json(self):
        return json.dumps({
            "order": self.order.value,
            "nvars": self.nvars,
            "generators": [str(a) for a in self.generators],
            "elements": [
                {"poly": str(g), "cofactors": [str(c) for c in row]}
                for g, row in zip(self.elements, self.cofactors)
            ],
        }, indent=2)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        n = d["nvars"]
        gens = tuple(parse_polynomial(s, nvars=n) for s in d["generators"])
        elems = tuple(parse_polynomial(e["poly"], nvars=n) for e in d["elements"])
        cofs = tuple(tuple(parse_polynomial(c, nvars=n) for c in e["cofactors"])
                     for e in d["elements"])
        return cls(gens, elems, cofs, MonomialOrder.parse(d["order"]))


@dataclass(frozen=True)
class QuotientAlgebra:
    """Finite-dimensional algebra O/(a_1, ..., a_n) with its standard-monomial basis."""

    basis: tuple
    source: GroebnerBasis

    @property
    def dimension(self):
        return len(self.basis)

    @property
    def generators(self):
        return self.source.generators

    def normal_form(self, p):
        return normal_form(p, self.source)

    def coordinates(self, p):
        """Coefficients of the normal form of ``p`` on :attr:`basis`."""
        r = self.normal_form(p)
        return [r.coefficient(b) for b in self.basis]

    def multiplication_matrix(self, p):
        """Matrix of multiplication by ``p``; column k is the image of basis[k]."""
        cols = [self.coordinates(p * Polynomial.monomial(b)) for b in self.basis]
        return [[cols[k][r] for k in range(len(cols))] for r in range(len(self.basis))]


# -- reduction ---------------------------------------------------------------

def _leading(terms, order):
    exp = max(terms, key=order.key)
    return exp, terms[exp]


def reduce(p, elements, order=DEFAULT_ORDER):
    """Full reduction of ``p`` by ``elements``.

    Returns ``(remainder, quotients)`` with ``p = sum q_k elements[k] + remainder``.
    The current leading term is always treated first and the first divisor in
    element order is used.
    """
    n = p.nvars
    heads = [g.leading_term(order) for g in elements]
    tails = [g.items(order)[1:] if order is DEFAULT_ORDER else
             [(e, c) for e, c in g.terms.items() if e != h[0]]
             for g, h in zip(elements, heads)]
    work = dict(p.terms)
    rem = {}
    quot = [dict() for _ in elements]
    while work:
        exp, c = _leading(work, order)
        for k, (hexp, hc) in enumerate(heads):
            if divides(hexp, exp):
                shift = exp_sub(exp, hexp)
                f = c / hc
                quot[k][shift] = quot[k].get(shift, ZERO) + f
                del work[exp]
                for texp, tc in tails[k]:
                    e2 = tuple(a + b for a, b in zip(texp, shift))
                    v = work.get(e2, ZERO) - f * tc
                    if v:
                        work[e2] = v
                    else:
                        work.pop(e2, None)
                break
        else:
            rem[exp] = c
            del work[exp]
    quotients = [Polynomial(n, q) for q in quot]
    return Polynomial(n, rem), quotients


def normal_form(p, gb):
    """Remainder of ``p`` modulo the Groebner basis ``gb``."""
    if p.nvars != gb.nvars:
        raise VariableCountMismatch(f"polynomial has {p.nvars} variables, basis {gb.nvars}")
    return reduce(p, gb.elements, gb.order)[0]


def _combine(quotients, rows, n, m):
    """sum_k quotients[k] * rows[k] as a cofactor row of length m."""
    out = [Polynomial.zero(n) for _ in range(m)]
    for q, row in zip(quotients, rows):
        if q.is_zero():
            continue
        for j in range(m):
            if not row[j].is_zero():
                out[j] = out[j] + q * row[j]
    return out


# -- Buchberger ---------------------------------------------------------------

def buchberger_with_cofactors(gens, order=DEFAULT_ORDER):
    """Reduced Groebner basis of ``(gens)`` with cofactors in terms of ``gens``.

    Pairs are processed by the normal strategy (smallest lcm of leading
    monomials first); ties go to the pair created first.  Pairs with coprime
    leading monomials are skipped (Buchberger's first criterion).
    """
    order = MonomialOrder.parse(order)
    gens = tuple(gens)
    if not gens:
        raise ValueError("need at least one generator")
    n = gens[0].nvars
    for a in gens:
        if a.nvars != n:
            raise VariableCountMismatch("generators live in different rings")
        if a.is_zero():
            raise ValueError("generators must be nonzero")
    m = len(gens)

    basis = []   # list of (poly, cofactor row)
    pairs = []   # list of (sort key, creation index, i, j)
    counter = itertools.count()
    n_spolys = n_zero = 0

    def add(g, row):
        lc = g.leading_term(order)[1]
        if lc != ONE:
            inv = lc.inverse()
            g = g * inv
            row = [c * inv for c in row]
        k = len(basis)
        lm_new = g.leading_monomial(order)
        for i, (h, _) in enumerate(basis):
            lcm = exp_lcm(h.leading_monomial(order), lm_new)
            pairs.append((order.key(lcm), next(counter), i, k))
        basis.append((g, row))

    for j, a in enumerate(gens):
        row = [Polynomial.const(n, 1 if t == j else 0) for t in range(m)]
        r, qs = reduce(a, [b for b, _ in basis], order)
        if r.is_zero():
            continue
        cof = _combine(qs, [rw for _, rw in basis], n, m)
        add(r, [x - y for x, y in zip(row, cof)])

    while pairs:
        best = min(range(len(pairs)), key=lambda t: (pairs[t][0], pairs[t][1]))
        _, _, i, k = pairs.pop(best)
        f, frow = basis[i]
        g, grow = basis[k]
        lf, lg = f.leading_monomial(order), g.leading_monomial(order)
        if all(x == 0 or y == 0 for x, y in zip(lf, lg)):
            continue
        lcm = exp_lcm(lf, lg)
        mf, mg = exp_sub(lcm, lf), exp_sub(lcm, lg)
        # f and g are monic
        s = f.mul_term(mf, ONE) - g.mul_term(mg, ONE)
        srow = [x.mul_term(mf, ONE) - y.mul_term(mg, ONE) for x, y in zip(frow, grow)]
        n_spolys += 1
        r, qs = reduce(s, [b for b, _ in basis], order)
        if r.is_zero():
            n_zero += 1
            continue
        cof = _combine(qs, [rw for _, rw in basis], n, m)
        add(r, [x - y for x, y in zip(srow, cof)])

    elements, rows = _interreduce(basis, order, n, m)
    stats = {"spolys": n_spolys, "zero_reductions": n_zero, "raw_size": len(basis)}
    return GroebnerBasis(gens, tuple(elements), tuple(tuple(r) for r in rows), order, stats)


def _interreduce(basis, order, n, m):
    # drop elements whose leading monomial is divisible by another's (keep the earliest)
    lms = [g.leading_monomial(order) for g, _ in basis]
    keep = []
    for k, lm in enumerate(lms):
        redundant = any(
            divides(lms[t], lm) and (lms[t] != lm or t < k)
            for t in range(len(lms)) if t != k)
        if not redundant:
            keep.append(k)
    minimal = [basis[k] for k in keep]
    out = []
    for idx, (g, row) in enumerate(minimal):
        others = [h for t, (h, _) in enumerate(minimal) if t != idx]
        other_rows = [rw for t, (_, rw) in enumerate(minimal) if t != idx]
        lt_exp, lt_c = g.leading_term(order)
        tail = g - Polynomial.monomial(lt_exp, lt_c)
        r, qs = reduce(tail, others, order)
        cof = _combine(qs, other_rows, n, m)
        out.append((r + Polynomial.monomial(lt_exp, lt_c), [x - y for x, y in zip(row, cof)]))
    out.sort(key=lambda t: order.key(t[0].leading_monomial(order)))
    return [g for g, _ in out], [rw for _, rw in out]


# -- quotient algebra --------------------------------------------------------

def quotient_basis(gb):
    """Standard monomials of ``gb``; raises InfiniteDimensional if there are infinitely many."""
    n = gb.nvars
    lms = gb.leading_monomials
    bounds = []
    for i in range(n):
        pure = [lm[i] for lm in lms if all(e == 0 for j, e in enumerate(lm) if j != i)]
        if not pure:
            raise InfiniteDimensional(
                f"z{i + 1} is not bounded by any leading monomial; "
                "the common zero set is not isolated")
        bounds.append(min(pure))
    if any(b == 0 for b in bounds):
        # the ideal is the unit ideal
        return QuotientAlgebra((), gb)
    mons = [e for e in itertools.product(*(range(b) for b in bounds))
            if not any(divides(lm, e) for lm in lms)]
    mons.sort(key=gb.order.key)
    return QuotientAlgebra(tuple(mons), gb)


def nilpotent_power(i, gb, bound=None):
    """Smallest N with z_i^N in the ideal, plus cofactors c with z_i^N = sum c_j a_j.

    ``bound`` defaults to dim(quotient) + 1.
    """
    n = gb.nvars
    if not 0 <= i < n:
        raise IndexError(f"variable index {i} out of range")
    if any(a.constant_term() for a in gb.generators):
        raise OriginNotOnlyZero("the origin is not a common zero of the generators")
    if bound is None:
        bound = quotient_basis(gb).dimension + 1
    m = len(gb.generators)
    zi = Polynomial.var(n, i)
    elements = list(gb.elements)
    # invariant: z_i^k = sum_j cof[j] a_j + rem
    rem = Polynomial.const(n, 1)
    cof = [Polynomial.zero(n) for _ in range(m)]
    for k in range(1, bound + 1):
        r, qs = reduce(zi * rem, elements, gb.order)
        step = _combine(qs, gb.cofactors, n, m)
        cof = [zi * c + s for c, s in zip(cof, step)]
        rem = r
        if rem.is_zero():
            return k, cof
    raise OriginNotOnlyZero(
        f"z{i + 1} is not nilpotent modulo the ideal (checked powers up to {bound}); "
        "the origin is not the only common zero, translate or localise first")


def _as_basis(gens, order, gb):
    if gb is None:
        gb = buchberger_with_cofactors(gens, order)
    return gb


def transformation_data(gens, gb=None, order=DEFAULT_ORDER, extra=None):
    """Exponents N and det(C) for the transformation law ``z_i^{N_i} = sum_j C_ij a_j``.

    ``extra`` optionally raises each N_i by extra[i] (the cofactor row is
    multiplied by z_i^extra[i]); residues do not change.
    """
    gens = tuple(gens)
    n = len(gens)
    if any(a.nvars != n for a in gens):
        raise VariableCountMismatch("residue needs n generators in n variables")
    gb = _as_basis(gens, order, gb)
    bound = quotient_basis(gb).dimension + 1  # raises InfiniteDimensional early
    exps, rows = [], []
    for i in range(n):
        N, row = nilpotent_power(i, gb, bound)
        if extra is not None and extra[i]:
            mult = Polynomial.var(n, i) ** extra[i]
            N += extra[i]
            row = [mult * c for c in row]
        exps.append(N)
        rows.append(row)
    return tuple(exps), poly_det(rows)


def _extract(h, exps, D):
    # coefficient of z^(N-1) in h*D without forming the full product
    target = tuple(N - 1 for N in exps)
    total = ZERO
    dterms = D.terms
    for e, c in h.terms.items():
        if all(x <= y for x, y in zip(e, target)):
            d = dterms.get(exp_sub(target, e))
            if d is not None:
                total = total + c * d
    return total


def grothendieck_residue(h, gens, order=DEFAULT_ORDER, gb=None, extra=None):
    """Exact ``Res_0[h dz_1 ^ ... ^ dz_n / (a_1 ... a_n)]`` for ``gens = (a_1, ..., a_n)``."""
    gens = tuple(gens)
    if h.nvars != len(gens):
        raise VariableCountMismatch("residue needs n generators in n variables")
    exps, D = transformation_data(gens, gb, order, extra)
    return _extract(h, exps, D)


def _minimal_polynomial(q, p):
    """Monic minimal polynomial of multiplication by ``p`` on ``q``, low degree first."""
    # Krylov sequence 1, p, p^2, ... in standard-monomial coordinates;
    # rows are kept reduced together with their expression in the powers
    n = q.source.nvars
    pivots = []          # (pivot column, reduced vector, combination of powers)
    power = Polynomial.const(n, 1)
    for k in range(q.dimension + 1):
        vec = q.coordinates(power)
        combo = [ZERO] * k + [ONE]
        for col, row, rc in pivots:
            f = vec[col]
            if f:
                vec = [x - f * y for x, y in zip(vec, row)]
                combo = [x - f * (rc[j] if j < len(rc) else ZERO)
                         for j, x in enumerate(combo)]
        col = next((c for c, x in enumerate(vec) if x), None)
        if col is None:
            return combo
        inv = vec[col].inverse()
        pivots.append((col, [x * inv for x in vec], [x * inv for x in combo]))
        power = q.normal_form(power * p)
    raise AssertionError("Krylov sequence did not terminate")


def _series_inverse(coeffs, order):
    """First ``order`` coefficients of 1/g for g = sum coeffs[k] t^k, coeffs[0] != 0."""
    inv0 = coeffs[0].inverse()
    out = []
    for k in range(order):
        acc = ONE if k == 0 else ZERO
        for j in range(1, min(k, len(coeffs) - 1) + 1):
            acc = acc - coeffs[j] * out[k - j]
        out.append(acc * inv0)
    return out


def _truncate(p, bound):
    return Polynomial(p.nvars, {e: c for e, c in p.terms.items()
                                if all(x <= b for x, b in zip(e, bound))})


def local_residue(h, gens, order=DEFAULT_ORDER, gb=None):
    """``Res_0[h dz / a]`` when the generators may have further isolated zeros.

    Returns 0 when the origin is not a common zero.
    """
    gens = tuple(gens)
    n = len(gens)
    if h.nvars != n or any(a.nvars != n for a in gens):
        raise VariableCountMismatch("residue needs n generators in n variables")
    gb = _as_basis(gens, order, gb)
    q = quotient_basis(gb)
    m = len(gens)
    exps, rows, units = [], [], []
    for i in range(n):
        zi = Polynomial.var(n, i)
        mp = _minimal_polynomial(q, zi)
        low = next(k for k, c in enumerate(mp) if c)
        if low == 0:
            return ZERO
        b = Polynomial(n, {(0,) * i + (k,) + (0,) * (n - i - 1): c for k, c in enumerate(mp)})
        r, qs = reduce(b, gb.elements, gb.order)
        if not r.is_zero():
            raise AssertionError("minimal polynomial is not in the ideal")
        rows.append(_combine(qs, gb.cofactors, n, m))
        exps.append(low)
        ginv = _series_inverse(mp[low:], low)
        units.append(Polynomial(n, {(0,) * i + (k,) + (0,) * (n - i - 1): c
                                    for k, c in enumerate(ginv)}))
    bound = tuple(N - 1 for N in exps)
    D = _truncate(poly_det(rows), bound)
    for u in units:
        D = _truncate(D * u, bound)
    return _extract(h, tuple(exps), D)


def milnor_number(gens, order=DEFAULT_ORDER, gb=None):
    """dim_C O/(gens)."""
    gb = _as_basis(tuple(gens), order, gb)
    return quotient_basis(gb).dimension


def residue_pairing_matrix(q):
    """Matrix of Res[b_i b_j dz / a] over the standard-monomial basis of ``q``."""
    exps, D = transformation_data(q.generators, q.source)
    return [[_extract(Polynomial.monomial(tuple(x + y for x, y in zip(bi, bj))), exps, D)
             for bj in q.basis] for bi in q.basis]


def jacobian_determinant(gens):
    return poly_det(jacobian(list(gens)))


def pairing_determinant(q):
    return det_exact(residue_pairing_matrix(q))
