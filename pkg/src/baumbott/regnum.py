"""Numerical realisation of the regularised Baum-Bott form for rank-one foliations.

With trivial metric and connections, s = X and sigma = conj(a)/|a|^2, the
(1,1)-part of the curvature of the regularised connection is the scalar
2-form

    omega = -(dbar chi_eps ^ sigma~ + chi_eps dbar sigma~),  sigma~ = sum sigma_j dz_j,

times the Jacobian J.  Writing omega = sum A_jk dzbar_k ^ dz_j, one has
omega^n = n! det(A) prod(dzbar_i ^ dz_i), and with dzbar ^ dz = 2i dx ^ dy the
density of (i/2pi)^n Phi(omega J) against Lebesgue measure on C^n = R^2n is

    n!/pi^n * det(chi M + P) * Phi(J),

    M_jk = d sigma_j / d zbar_k,
    P_jk = sigma_j * chi'(|a|^2/eps)/eps * d|a|^2 / d zbar_k.

M has the left null vector a, so det M = 0 off the zero set: the density
vanishes wherever chi_eps = 1.  Integrals are computed on a deterministic
midpoint tensor grid; the sum over nodes is chunked with a fixed chunk size
and combined by a fixed pairwise tree, so results do not depend on the
number of worker threads.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import OnSingularity, ShapeMismatch
from .foliation import VectorField, bb_residue, phi_of_jacobian
from .polycore import NumericPolynomial, power_table

CHUNK = 1 << 15


# -- cutoff profile ----------------------------------------------------------

@dataclass(frozen=True)
class ChiProfile:
    """Smoothstep cutoff: 0 for t <= t0, 1 for t >= t1.

    ``kind`` is "quintic" (C^2) or "cubic" (C^1).
    """

    t0: float = 1.0
    t1: float = 2.0
    kind: str = "quintic"

    def __post_init__(self):
        if self.kind not in ("quintic", "cubic"):
            raise ValueError(f"unknown smoothstep {self.kind!r}")
        if not self.t1 > self.t0 > 0:
            raise ValueError("need 0 < t0 < t1")

    def _s(self, t):
        return np.clip((np.asarray(t, dtype=float) - self.t0) / (self.t1 - self.t0), 0.0, 1.0)

    def __call__(self, t):
        s = self._s(t)
        if self.kind == "quintic":
            return s * s * s * (s * (6.0 * s - 15.0) + 10.0)
        return s * s * (3.0 - 2.0 * s)

    def derivative(self, t):
        s = self._s(t)
        w = self.t1 - self.t0
        if self.kind == "quintic":
            return 30.0 * s * s * (1.0 - s) ** 2 / w
        return 6.0 * s * (1.0 - s) / w


# -- pointwise linear algebra --------------------------------------------------

def minimal_inverse_pointwise(A, rtol=1e-12):
    """Moore-Penrose inverse via the SVD; singular values below rtol*max are dropped."""
    A = np.atleast_2d(np.asarray(A, dtype=np.complex128))
    if A.size == 0 or not np.any(A):
        return np.zeros(A.shape[::-1], dtype=np.complex128)
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    keep = s > rtol * s[0]
    inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    return (Vh.conj().T * inv) @ U.conj().T


def penrose_residuals(A, S):
    """Max-norm residuals of the four Penrose identities, relative to |A| |S|."""
    A = np.atleast_2d(A)
    S = np.atleast_2d(S)
    scale = max(np.linalg.norm(A, 2) * max(np.linalg.norm(S, 2), 1.0), 1e-300)
    AS, SA = A @ S, S @ A
    return (
        np.abs(A @ S @ A - A).max() / scale,
        np.abs(S @ A @ S - S).max() / max(np.linalg.norm(S, 2) ** 2 * np.linalg.norm(A, 2), 1e-300),
        np.abs(AS - AS.conj().T).max(),
        np.abs(SA - SA.conj().T).max(),
    )


@dataclass
class HomotopyCheck:
    residual: float
    levels: list
    projection: np.ndarray
    projection_ok: bool
    exact: bool


def homotopy_identity_check(maps, tol=1e-10):
    """Check I = phi_{k+1} sigma_{k+1} + sigma_k phi_k along a chain of matrices.

    ``maps[k]`` is phi_k: E_k -> E_{k-1} (shape dim E_{k-1} x dim E_k), for
    k = 0..N; phi_{N+1} = 0.  The identity is checked on E_0..E_N.  The
    projection pi_0 = I - phi_1 sigma_1 on E_0 is returned and checked to be
    orthogonal.  ``exact`` is False when some level fails.
    """
    maps = [np.atleast_2d(np.asarray(m, dtype=np.complex128)) for m in maps]
    if not maps:
        raise ShapeMismatch("empty chain")
    for lo, hi in zip(maps, maps[1:]):
        if lo.shape[1] != hi.shape[0]:
            raise ShapeMismatch(f"maps of shapes {lo.shape} and {hi.shape} do not compose")
    sig = [minimal_inverse_pointwise(m) for m in maps]
    levels = []
    for k, phi in enumerate(maps):
        dim = phi.shape[1]
        acc = sig[k] @ phi
        if k + 1 < len(maps):
            acc = acc + maps[k + 1] @ sig[k + 1]
        levels.append(float(np.abs(np.eye(dim) - acc).max()))
    pi = np.eye(maps[0].shape[1])
    if len(maps) > 1:
        pi = pi - maps[1] @ sig[1]
    proj_ok = bool(np.abs(pi @ pi - pi).max() < tol and np.abs(pi - pi.conj().T).max() < tol)
    residual = max(levels)
    return HomotopyCheck(residual, levels, pi, proj_ok, residual < tol)


# -- fields on arrays --------------------------------------------------------

class FieldEvaluator:
    """Vectorised a(z) and J(z) = (da_j/dz_k) for a polynomial vector field."""

    def __init__(self, X):
        self.field = X
        self.n = X.n
        self.a = [NumericPolynomial(c) for c in X.components]
        J = X.jacobian()
        self.J = [[NumericPolynomial(e) for e in row] for row in J]
        self.maxdeg = [max(c.degree_in(j) for c in X.components) for j in range(self.n)]

    def values(self, z):
        """a with shape (n, m), J with shape (n, n, m)."""
        pw = power_table(z, self.maxdeg)
        a = np.stack([p(z, pw) for p in self.a])
        J = np.stack([np.stack([p(z, pw) for p in row]) for row in self.J])
        return a, J

    def norm2(self, z):
        pw = power_table(z, self.maxdeg)
        out = np.zeros(z.shape[1:])
        for p in self.a:
            v = p(z, pw)
            out += v.real ** 2 + v.imag ** 2
        return out


@dataclass
class PointFrame:
    a: np.ndarray
    J: np.ndarray
    norm2: float
    sigma: np.ndarray
    dbar_sigma: np.ndarray


def _frame_arrays(a, J):
    """sigma (n, m), dbar sigma (n, n, m) and d|a|^2/dzbar (n, m) from a and J."""
    norm2 = np.sum(a.real ** 2 + a.imag ** 2, axis=0)
    sigma = a.conj() / norm2
    # grad_k = d|a|^2/dzbar_k = sum_m a_m conj(J_mk)
    grad = np.einsum("mi,mki->ki", a, J.conj())
    M = (J.conj() * norm2 - np.einsum("ji,ki->jki", a.conj(), grad)) / norm2 ** 2
    return norm2, sigma, M, grad


def _coerce_point(X, z):
    z = np.asarray(z, dtype=np.complex128).reshape(-1)
    if z.shape[0] != X.n:
        raise ShapeMismatch(f"point has {z.shape[0]} coordinates, field has {X.n}")
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite point")
    return z.reshape(X.n, 1)


def frame_eval(X, z, evaluator=None):
    ev = evaluator or FieldEvaluator(X)
    zz = _coerce_point(X, z)
    a, J = ev.values(zz)
    if np.sum(np.abs(a) ** 2) == 0:
        raise OnSingularity(f"a(z) = 0 at z = {zz[:, 0]}")
    norm2, sigma, M, _ = _frame_arrays(a, J)
    return PointFrame(a[:, 0], J[:, :, 0], float(norm2[0]), sigma[:, 0], M[:, :, 0])


def _densities(a, J, h, chi, eps, part="full"):
    """Density at nodes with a != 0.

    ``h`` holds the holomorphic factor (Phi(J) or a test function g).
    part="full": det(chi M + P) h;  part="bm": (det(chi M + P) - chi^n det M) h.
    """
    n = a.shape[0]
    norm2, sigma, M, grad = _frame_arrays(a, J)
    t = norm2 / eps
    c = chi(t)
    dc = chi.derivative(t) / eps
    P = np.einsum("ji,ki->jki", sigma, grad) * dc
    A = c * M + P
    if n == 1:
        det_full = A[0, 0]
        det_M = M[0, 0]
    elif n == 2:
        det_full = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        det_M = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    else:
        det_full = np.linalg.det(np.moveaxis(A, -1, 0))
        det_M = np.linalg.det(np.moveaxis(M, -1, 0))
    if part == "bm":
        det_full = det_full - c ** n * det_M
    return math.factorial(n) / math.pi ** n * det_full * h, A


def bb_integrand(X, phi, chi, eps, z, normalized=False):
    """Density of (i/2pi)^n Phi(Theta) at z relative to Lebesgue measure.

    With ``normalized`` the absolute value is divided by
    n!/pi^n * s^n * max(|Phi(J)|, 1), where s = |J| (chi/|a|^2 + |chi'|/eps)
    bounds the entries of chi M + P; used for vanishing checks.
    """
    ev = FieldEvaluator(X)
    zz = _coerce_point(X, z)
    a, J = ev.values(zz)
    if np.sum(np.abs(a) ** 2) == 0:
        raise OnSingularity(f"a(z) = 0 at z = {zz[:, 0]}")
    h = NumericPolynomial(phi_of_jacobian(X, phi))(zz)
    d, _ = _densities(a, J, h, chi, eps)
    if not normalized:
        return complex(d[0])
    n = X.n
    norm2 = float(np.sum(np.abs(a) ** 2))
    t = norm2 / eps
    s = np.linalg.norm(J[:, :, 0]) * (float(chi(t)) / norm2 + abs(float(chi.derivative(t))) / eps)
    scale = math.factorial(n) / math.pi ** n * s ** n * max(abs(h[0]), 1.0)
    return abs(d[0]) / scale if scale > 0 else 0.0


# -- quadrature -------------------------------------------------------------

@dataclass(frozen=True)
class ShellQuadrature:
    """Midpoint tensor grid over the ball of radius ``radius`` in C^n.

    mode "full-ball": the cube circumscribing the ball, nodes outside the ball
    skipped.  mode "shell-only": the grid is laid over a box that contains the
    set {|a|^2 < t1 eps} within the ball (found by successive sampling), and
    the integrand is evaluated only where t0 eps < |a|^2 < t1 eps.
    """

    radius: float = 1.0
    grid: int | None = None
    mode: str = "shell-only"
    threads: int = 1
    estimate_error: bool = False

    def __post_init__(self):
        if self.mode not in ("full-ball", "shell-only"):
            raise ValueError(f"unknown quadrature mode {self.mode!r}")
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def resolution(self, n):
        if self.grid is not None:
            return self.grid
        return {1: 200, 2: 40}.get(n, 12)


@dataclass
class NumericResult:
    value: complex
    eps: float
    grid: int
    nodes: int
    evaluated: int
    box: list
    shifted: bool = False
    error_estimate: float | None = None
    coarse_value: complex | None = None
    diagnostics: dict = field(default_factory=dict)

    def __complex__(self):
        return complex(self.value)


def _pairwise(values):
    vals = list(values)
    if not vals:
        return 0j
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def _axes(box, N, shift):
    axes = []
    for lo, hi in box:
        h = (hi - lo) / N
        axes.append(lo + (np.arange(N) + 0.5 + shift) * h)
    return axes


def _nodes(axes, start, stop):
    N = len(axes[0])
    dims = len(axes)
    idx = np.unravel_index(np.arange(start, stop), (N,) * dims)
    real = [axes[d][idx[d]] for d in range(dims)]
    n = dims // 2
    return np.stack([real[2 * j] + 1j * real[2 * j + 1] for j in range(n)])


class _Integrator:
    def __init__(self, X, hpoly, chi, eps, q, part):
        self.X = X
        self.ev = FieldEvaluator(X)
        self.h = NumericPolynomial(hpoly)
        self.chi = chi
        self.eps = eps
        self.q = q
        self.part = part
        self.n = X.n

    def _chunk(self, axes, start, stop):
        z = _nodes(axes, start, stop)
        inball = np.sum(z.real ** 2 + z.imag ** 2, axis=0) <= self.q.radius ** 2
        norm2 = self.ev.norm2(z)
        hit = bool(np.any(inball & (norm2 == 0.0)))
        lo, hi = self.chi.t0 * self.eps, self.chi.t1 * self.eps
        if self.q.mode == "shell-only":
            sel = inball & (norm2 > lo) & (norm2 < hi)
        else:
            sel = inball & (norm2 > lo)
        support = inball & (norm2 < hi)
        zs = z[:, sel]
        if zs.shape[1] == 0:
            return 0j, 0, hit, support
        a, J = self.ev.values(zs)
        d, _ = _densities(a, J, self.h(zs), self.chi, self.eps, self.part)
        return complex(np.sum(d)), int(zs.shape[1]), hit, support

    def integrate(self, box, N, shift=0.0):
        axes = _axes(box, N, shift)
        total = N ** len(box)
        bounds = [(s, min(s + CHUNK, total)) for s in range(0, total, CHUNK)]
        threads = max(1, int(self.q.threads))
        if threads == 1:
            parts = [self._chunk(axes, s, e) for s, e in bounds]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(lambda b: self._chunk(axes, *b), bounds))
        vol = np.prod([(hi - lo) / N for lo, hi in box])
        value = _pairwise([p[0] for p in parts]) * vol
        evaluated = sum(p[1] for p in parts)
        hit = any(p[2] for p in parts)
        support = np.concatenate([p[3] for p in parts])
        return value, evaluated, hit, support, axes

    def support_box(self, N):
        """Box around {|a|^2 < t1 eps} inside the ball, refined by resampling."""
        R = self.q.radius
        dims = 2 * self.n
        box = [(-R, R)] * dims
        for _ in range(60):
            axes = _axes(box, N, 0.0)
            mask = self._support_mask(axes)
            if not mask.any():
                # support is below the grid resolution: zoom in on the origin
                box = [(lo / 2, hi / 2) for lo, hi in box]
                continue
            idx = np.nonzero(mask.reshape((N,) * dims))
            new = []
            for d in range(dims):
                h = (box[d][1] - box[d][0]) / N
                lo = axes[d][idx[d].min()] - 2.5 * h
                hi = axes[d][idx[d].max()] + 2.5 * h
                new.append((max(lo, -R), min(hi, R)))
            shrink = max((b[1] - b[0]) / (a[1] - a[0]) for a, b in zip(box, new))
            box = new
            if shrink > 0.7:
                break
        return box

    def _support_mask(self, axes):
        total = len(axes[0]) ** len(axes)
        out = []
        for s in range(0, total, CHUNK):
            z = _nodes(axes, s, min(s + CHUNK, total))
            inball = np.sum(z.real ** 2 + z.imag ** 2, axis=0) <= self.q.radius ** 2
            out.append(inball & (self.ev.norm2(z) < self.chi.t1 * self.eps))
        return np.concatenate(out)

    def run(self):
        N = self.q.resolution(self.n)
        R = self.q.radius
        dims = 2 * self.n
        if self.q.mode == "full-ball":
            box = [(-R, R)] * dims
        else:
            box = self.support_box(N)
        for _ in range(8):
            shifted = False
            value, evaluated, hit, support, axes = self.integrate(box, N)
            if hit:
                shifted = True
                value, evaluated, hit, support, axes = self.integrate(box, N, 0.5)
                if hit:
                    raise OnSingularity("a grid node lies on the zero set even after a half-cell shift")
            if self.q.mode == "full-ball":
                break
            grown = _grow_if_touching(box, support.reshape((N,) * dims), R)
            if grown is None:
                break
            box = grown
        result = NumericResult(value, self.eps, N, N ** dims, evaluated,
                               [list(b) for b in box], shifted)
        if self.q.estimate_error:
            # two independent rules: half the resolution, and the same
            # resolution shifted by half a cell
            coarse = self.integrate(box, max(N // 2, 2), 0.0)[0]
            other = self.integrate(box, N, 0.0 if shifted else 0.5)[0]
            result.coarse_value = coarse
            result.error_estimate = float(max(abs(value - coarse), abs(value - other)))
        return result


def _grow_if_touching(box, support, R):
    """Enlarge the box on every side where the support reaches the outer layer."""
    dims = len(box)
    new = list(box)
    changed = False
    for d in range(dims):
        lo, hi = box[d]
        width = hi - lo
        first = np.take(support, 0, axis=d).any()
        last = np.take(support, -1, axis=d).any()
        if first and lo > -R:
            new[d] = (max(lo - 0.25 * width, -R), new[d][1])
            changed = True
        if last and hi < R:
            new[d] = (new[d][0], min(hi + 0.25 * width, R))
            changed = True
    return new if changed else None


def bb_numeric(X, phi, eps, q=None, chi=None):
    """Quadrature of the regularised Baum-Bott density over the ball.

    Approximates bb_residue(X, 0, phi); the origin must be the only zero of X
    in the closed ball.
    """
    q = q or ShellQuadrature()
    chi = chi or ChiProfile()
    return _Integrator(X, phi_of_jacobian(X, phi), chi, eps, q, "full").run()


def bm_action(X, g, eps, q=None, chi=None):
    """Pairing of the regularised Bochner-Martinelli current with g dz.

    Approximates grothendieck_residue(g, X.components).
    """
    q = q or ShellQuadrature()
    chi = chi or ChiProfile()
    return _Integrator(X, g, chi, eps, q, "bm").run()


@dataclass
class ConvergenceRow:
    eps: float
    value: complex
    abs_error: float


def convergence_study(X, phi, eps_schedule, q=None, chi=None, exact=None):
    """bb_numeric for each eps against the exact residue at the origin."""
    if exact is None:
        exact = complex(bb_residue(X, None, phi))
    rows = []
    for eps in eps_schedule:
        v = bb_numeric(X, phi, eps, q, chi).value
        rows.append(ConvergenceRow(float(eps), complex(v), float(abs(v - exact))))
    return rows


def convergence_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eps", "value_re", "value_im", "abs_error"])
    for r in rows:
        w.writerow([repr(r.eps), repr(r.value.real), repr(r.value.imag), repr(r.abs_error)])
    return buf.getvalue()


def linear_field(diag):
    """X = (l_1 z_1, ..., l_n z_n) as a VectorField; convenience for experiments."""
    from .polycore import Polynomial

    n = len(diag)
    zs = Polynomial.variables(n)
    return VectorField([z * c for z, c in zip(zs, diag)])
