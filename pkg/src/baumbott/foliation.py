"""Baum-Bott residues of isolated singularities of polynomial vector fields.

For ``X = sum a_i d/dz_i`` with an isolated zero at p and an invariant
polynomial Phi of weight n,

    Res^Phi(X; p) = Res_p[ Phi(da_i/dz_j) dz_1 ^ ... ^ dz_n / (a_1 ... a_n) ].

The module also transports degree-d foliations of C^2 to the three standard
charts of P^2 and checks that the residues add up to Phi evaluated on the
Chern classes of the normal sheaf.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .charclass import phi_eval, preset
from .errors import (
    BaumBottError,
    DegreeMismatch,
    NotIsolatedOnP2,
    NotSingular,
    PoleClearingFailed,
    VariableCountMismatch,
)
from .localalg import (
    buchberger_with_cofactors,
    grothendieck_residue,
    local_residue,
    quotient_basis,
)
from .polycore import GaussianRational, Polynomial, jacobian, parse_polynomial, poly_det


@dataclass(frozen=True)
class VectorField:
    components: tuple

    def __init__(self, components):
        components = tuple(components)
        n = len(components)
        if n == 0:
            raise ValueError("empty vector field")
        for a in components:
            if a.nvars != n:
                raise VariableCountMismatch(
                    f"component has {a.nvars} variables, field has {n} components")
        object.__setattr__(self, "components", components)

    @property
    def n(self):
        return len(self.components)

    @classmethod
    def parse(cls, texts, names=None):
        n = len(texts)
        return cls([parse_polynomial(t, nvars=n, names=names) for t in texts])

    def jacobian(self):
        return jacobian(list(self.components))

    def __call__(self, point):
        return [a.evaluate(point) for a in self.components]

    def __str__(self):
        return "(" + ", ".join(str(a) for a in self.components) + ")"


@dataclass(frozen=True)
class SingularPoint:
    coordinates: tuple
    chart: int | None = None

    def __init__(self, coordinates, chart=None):
        object.__setattr__(self, "coordinates",
                           tuple(GaussianRational.coerce(c) for c in coordinates))
        object.__setattr__(self, "chart", chart)

    def is_origin(self):
        return not any(self.coordinates)

    def __str__(self):
        body = "(" + ", ".join(str(c) for c in self.coordinates) + ")"
        return body if self.chart is None else f"chart{self.chart}{body}"


def _point(p, n):
    if p is None:
        return SingularPoint([0] * n)
    if not isinstance(p, SingularPoint):
        p = SingularPoint(p)
    if len(p.coordinates) != n:
        raise VariableCountMismatch(f"point has {len(p.coordinates)} coordinates, expected {n}")
    return p


def translate_to_origin(X, p):
    p = _point(p, X.n)
    values = X(p.coordinates)
    if any(values):
        raise NotSingular(f"X does not vanish at {p}: X(p) = {[str(v) for v in values]}")
    if p.is_origin():
        return X
    return VectorField([a.translate(p.coordinates) for a in X.components])


def _check_phi(X, phi):
    if phi.n != X.n or phi.weight != X.n:
        raise DegreeMismatch(
            f"Phi must have weight n = {X.n} in {X.n} variables "
            f"(got weight {phi.weight}, n = {phi.n})")


def phi_of_jacobian(X, phi):
    """The polynomial Phi(da_i/dz_j), computed exactly in the polynomial ring."""
    J = X.jacobian()
    n = X.n
    # e_k(J) as polynomials: coefficient of t^k in det(I + tJ), via the
    # sum of principal k-minors
    elem = []
    for k in range(1, n + 1):
        acc = Polynomial.zero(n)
        for idx in combinations(range(n), k):
            acc = acc + poly_det([[J[r][c] for c in idx] for r in idx])
        elem.append(acc)
    return phi.hat.compose(elem)


def bb_residue(X, p, phi, gb=None, localize=False):
    """Exact Baum-Bott residue of X at p for the invariant polynomial phi.

    By default X may vanish nowhere else (OriginNotOnlyZero otherwise);
    ``localize=True`` allows further isolated zeros.
    """
    _check_phi(X, phi)
    Y = translate_to_origin(X, p)
    h = phi_of_jacobian(Y, phi)
    if localize:
        return local_residue(h, Y.components, gb=gb)
    return grothendieck_residue(h, Y.components, gb=gb)


def milnor_at(X, p=None):
    """Milnor number at p; asserts it matches the c_n Baum-Bott residue."""
    Y = translate_to_origin(X, p)
    gb = buchberger_with_cofactors(Y.components)
    mu = quotient_basis(gb).dimension
    res = bb_residue(Y, None, preset("cn", X.n), gb=gb)
    if res != mu:
        raise AssertionError(f"c_n residue {res} differs from Milnor number {mu}")
    return mu


def phi_at_linear(X, phi):
    """Phi(J)/det(J) at a nondegenerate zero at the origin, evaluated pointwise.

    Independent check of :func:`bb_residue` for nondegenerate points.
    """
    J = [[entry.constant_term() for entry in row] for row in X.jacobian()]
    n = X.n
    det = phi_eval(preset("cn", n), J)
    if not det:
        raise ValueError("degenerate singular point")
    return phi_eval(phi, J) / det


# -- P^2 ----------------------------------------------------------------------

@dataclass(frozen=True)
class FoliationP2:
    """Foliation of P^2 given in the affine chart by dx/dt = P, dy/dt = Q.

    The chart formulas multiply by u^{d-1}; they are valid when max(deg P,
    deg Q) = d and x*Q_d - y*P_d is not identically zero, where P_d, Q_d are
    the top homogeneous parts.  When that form vanishes the transported field
    has a curve of zeros along the line at infinity.
    """

    degree: int
    P: Polynomial
    Q: Polynomial

    @classmethod
    def parse(cls, degree, P, Q):
        names = ["x", "y"]
        return cls(degree, parse_polynomial(P, names=names), parse_polynomial(Q, names=names))

    @property
    def infinity_form(self):
        x, y = Polynomial.variables(2)
        d = self.degree
        return x * self.Q.homogeneous_part(d) - y * self.P.homogeneous_part(d)

    @property
    def degenerate_at_infinity(self):
        return self.infinity_form.is_zero()


@dataclass(frozen=True)
class ChartField:
    chart: int
    field: VectorField
    variables: tuple


def _inverse_substitute(poly, d, first_inverted):
    """u^{d+1} * poly evaluated at the chart substitution, as a polynomial in (u, v).

    first_inverted=True: x = 1/u, y = v/u; otherwise x = v/u, y = 1/u
    (for chart 2 the variables are ordered (s, w) with x = s/w, y = 1/w).
    """
    terms = {}
    for (i, j), c in poly.terms.items():
        k = d + 1 - i - j
        if k < 0:
            raise PoleClearingFailed(
                f"term of degree {i + j} exceeds the declared degree {d}")
        if first_inverted:
            exp = (k, j)       # u^{d+1} * u^{-i} * v^j u^{-j}
        else:
            exp = (i, k)       # w^{d+1} * s^i w^{-i} * w^{-j}
        terms[exp] = terms.get(exp, 0) + c
    return Polynomial(2, terms)


def p2_charts(F):
    """The foliation in the three affine charts of P^2.

    chart 0: (x, y); chart 1: (u, v) = (1/x, y/x); chart 2: (s, w) = (x/y, 1/y).
    """
    d = F.degree
    if d < 1:
        raise PoleClearingFailed("degree must be at least 1 for the chart formulas")
    if max(F.P.total_degree(), F.Q.total_degree()) > d:
        raise PoleClearingFailed(
            f"max(deg P, deg Q) = {max(F.P.total_degree(), F.Q.total_degree())} exceeds d = {d}")
    if max(F.P.total_degree(), F.Q.total_degree()) < d or F.degenerate_at_infinity:
        raise NotIsolatedOnP2(
            "x*Q_d - y*P_d vanishes identically: the transported field vanishes along "
            "the line at infinity, so the singular set is not isolated")
    u, v = Polynomial.variables(2)
    # chart 1: du/dt = -u^{d+1} P(1/u, v/u),  dv/dt = u^d (Q - v P)(1/u, v/u)
    P1 = _inverse_substitute(F.P, d, True)      # u^{d+1} P
    Q1 = _inverse_substitute(F.Q, d, True)      # u^{d+1} Q
    c1 = VectorField([-P1, _divide_by_var(Q1 - v * P1, 0)])
    # chart 2 in (s, w): ds/dt = w^d (P - s Q),  dw/dt = -w^{d+1} Q
    s = u
    P2 = _inverse_substitute(F.P, d, False)
    Q2 = _inverse_substitute(F.Q, d, False)
    c2 = VectorField([_divide_by_var(P2 - s * Q2, 1), -Q2])
    c0 = VectorField([F.P, F.Q])
    return [
        ChartField(0, c0, ("x", "y")),
        ChartField(1, c1, ("u", "v")),
        ChartField(2, c2, ("s", "w")),
    ]


def _divide_by_var(p, i):
    terms = {}
    for e, c in p.terms.items():
        if e[i] == 0:
            raise PoleClearingFailed("pole clearing left a negative power")
        terms[e[:i] + (e[i] - 1,) + e[i + 1:]] = c
    return Polynomial(p.nvars, terms)


def chern_normal_sheaf_p2(d, phi):
    """Phi evaluated on c(N) = 1 + (d+2)h + (d^2+d+1)h^2."""
    if phi.n != 2 or phi.weight != 2:
        raise DegreeMismatch("chern_normal_sheaf_p2 needs Phi of weight 2 in 2 variables")
    return phi.hat.evaluate([GaussianRational(d + 2), GaussianRational(d * d + d + 1)])


@dataclass
class PointResult:
    chart: int
    point: SingularPoint
    residue: GaussianRational


@dataclass
class BBReport:
    residues: list
    total: GaussianRational
    expected: GaussianRational
    match: bool
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "residues": [
                {"chart": r.chart, "point": [str(c) for c in r.point.coordinates],
                 "value": str(r.residue), "approx": _approx(r.residue)}
                for r in self.residues
            ],
            "sum": str(self.total),
            "sum_approx": _approx(self.total),
            "expected": str(self.expected),
            "match": self.match,
        }


def _approx(x):
    z = complex(x)
    return z.real if z.imag == 0 else [z.real, z.imag]


class PointFailed(BaumBottError):
    """Wraps a per-point failure with the chart and point that caused it."""

    def __init__(self, chart, point, cause):
        self.chart, self.point, self.cause = chart, point, cause
        self.code = getattr(cause, "code", "Error")
        super().__init__(f"chart {chart}, point {point}: {cause}")

    def to_dict(self):
        d = self.cause.to_dict() if isinstance(self.cause, BaumBottError) else {}
        d.update({"code": self.code, "message": str(self), "chart": self.chart,
                  "point": [str(c) for c in self.point.coordinates]})
        return d


def global_sum_check(F, points, phi, localize=True):
    """Sum the residues at user-supplied singular points over the three charts.

    ``points`` maps chart index (0, 1, 2) to a list of points in that chart's
    coordinates.  Every singularity must be listed exactly once.  A chart
    usually contains several singular points, so residues are localized by
    default.
    """
    charts = p2_charts(F)
    if isinstance(points, dict):
        points = {int(k): v for k, v in points.items()}
    else:
        points = dict(enumerate(points))
    results = []
    total = GaussianRational(0)
    for chart in sorted(points):
        X = charts[chart].field
        for p in points[chart]:
            sp = SingularPoint(p, chart)
            try:
                r = bb_residue(X, sp, phi, localize=localize)
            except BaumBottError as exc:
                raise PointFailed(chart, sp, exc) from exc
            results.append(PointResult(chart, sp, r))
            total = total + r
    expected = chern_normal_sheaf_p2(F.degree, phi)
    return BBReport(results, total, expected, total == expected)


def diagonal_p2(weights):
    """Degree-1 field induced by diag(weights) on C^3; singular at the coordinate points."""
    l0, l1, l2 = (Fraction(w) for w in weights)
    x, y = Polynomial.variables(2)
    return FoliationP2(1, x * (l1 - l0), y * (l2 - l0))
