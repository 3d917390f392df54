"""Independent reference computations used by the tests."""

from fractions import Fraction
from itertools import product

import numpy as np
import sympy

from baumbott.polycore import NumericPolynomial


def torus_residue(h, gens, radii, m=64):
    """Res[h dz / (a_1...a_n)] by the trapezoid rule on a product of circles.

    The torus must be homologous to the residue cycle; for the fields used here
    each a_i is dominated on the torus by a monomial in z_i alone.
    """
    n = len(gens)
    theta = 2 * np.pi * np.arange(m) / m
    grids = np.meshgrid(*([theta] * n), indexing="ij")
    z = np.stack([r * np.exp(1j * t) for r, t in zip(radii, grids)])
    num = NumericPolynomial(h)(z) * np.prod(z, axis=0)
    den = np.ones_like(num)
    for a in gens:
        den = den * NumericPolynomial(a)(z)
    return complex(np.mean(num / den))


def sympy_quotient_dimension(texts, n):
    """dim C[z]/I counted from sympy's reduced Groebner basis (global count)."""
    zs = sympy.symbols(f"z1:{n + 1}")
    env = {f"z{k + 1}": zs[k] for k in range(n)}
    env["i"] = sympy.I
    polys = [sympy.sympify(t.replace("^", "**"), locals=env) for t in texts]
    G = sympy.groebner(polys, *zs, order="grevlex")
    lms = [sympy.Poly(g, *zs).monoms(order="grevlex")[0] for g in G.exprs]
    bound = []
    for k in range(n):
        pure = [lm[k] for lm in lms if all(e == 0 for j, e in enumerate(lm) if j != k)]
        bound.append(min(pure))
    return sum(1 for e in product(*(range(b) for b in bound))
               if not any(all(x <= y for x, y in zip(lm, e)) for lm in lms))


def chern_series(d):
    """Coefficients of (1+h)^3 / (1 + (1-d)h) up to h^2, by power-series division."""
    num = [Fraction(1), Fraction(3), Fraction(3)]
    den = [Fraction(1), Fraction(1 - d), Fraction(0)]
    out = []
    for k in range(3):
        out.append(num[k] - sum(out[j] * den[k - j] for j in range(k)))
    return out


def brute_elementary(eigs):
    """Coefficients of prod (1 + lambda t), by direct expansion."""
    coeffs = [Fraction(1)]
    for lam in eigs:
        nxt = coeffs + [Fraction(0)]
        for k in range(len(coeffs)):
            nxt[k + 1] += lam * coeffs[k]
        coeffs = nxt
    return coeffs
