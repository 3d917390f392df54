import math

import numpy as np
import pytest

from baumbott.charclass import preset
from baumbott.errors import OnSingularity, ShapeMismatch
from baumbott.foliation import VectorField
from baumbott.polycore import parse_polynomial
from baumbott.regnum import (
    ChiProfile,
    ShellQuadrature,
    bb_integrand,
    bb_numeric,
    bm_action,
    convergence_csv,
    convergence_study,
    frame_eval,
    homotopy_identity_check,
    linear_field,
    minimal_inverse_pointwise,
    penrose_residuals,
)


def F(*texts):
    return VectorField.parse(list(texts))


FIELDS = [
    ("z1",),
    ("z1^2 - 1/4*z1^3",),
    ("z1", "z2"),
    ("z1", "2*z2"),
    ("z1^2 - z2^3", "z2^2"),
    ("z1 + z2^2", "3*z2"),
    ("z1^2 + z2", "z2^2"),
]


def random_points(rng, n, m, scale=0.8):
    return rng.normal(size=(m, n)) * scale + 1j * rng.normal(size=(m, n)) * scale


# -- cutoff profile -------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["quintic", "cubic"])
def test_chi_profile(kind):
    chi = ChiProfile(kind=kind)
    t = np.linspace(0, 3, 3001)
    v = chi(t)
    assert np.all(v[t <= 1] == 0) and np.all(v[t >= 2] == 1)
    assert np.all(np.diff(v) >= 0)
    # derivative against central differences
    h = 1e-6
    mid = np.linspace(0.5, 2.5, 101)
    fd = (chi(mid + h) - chi(mid - h)) / (2 * h)
    # the cubic has a jump in the second derivative at the cuts: O(h) there
    assert np.allclose(chi.derivative(mid), fd, atol=1e-5)
    assert chi.derivative(1.0) == 0 and chi.derivative(2.0) == 0


def test_chi_profile_validation():
    with pytest.raises(ValueError):
        ChiProfile(kind="septic")
    with pytest.raises(ValueError):
        ChiProfile(t0=2.0, t1=1.0)


# -- minimal inverses ------------------------------------------------------------------

def test_minimal_inverse_examples():
    assert np.allclose(minimal_inverse_pointwise([[2.0]]), [[0.5]])
    a = np.array([[1 + 1j], [2.0], [-1j]])
    expected = a.conj().T / np.sum(np.abs(a) ** 2)
    assert np.allclose(minimal_inverse_pointwise(a), expected)
    z = minimal_inverse_pointwise(np.zeros((2, 3)))
    assert z.shape == (3, 2) and not np.any(z)


def test_penrose_random():
    rng = np.random.default_rng(7)
    for k in range(100):
        m, n = rng.integers(1, 5, size=2)
        A = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
        if k % 3 == 0 and min(m, n) > 1:
            # rank-deficient instance
            A[:, -1] = A[:, 0] * (2 - 1j)
        S = minimal_inverse_pointwise(A)
        assert max(penrose_residuals(A, S)) < 1e-10
        assert np.allclose(S, np.linalg.pinv(A), atol=1e-10)


# -- homotopy identity ---------------------------------------------------------------------

def test_homotopy_orthonormal_split():
    phi0 = np.array([[0.0, 1.0]])
    phi1 = np.array([[1.0], [0.0]])
    chk = homotopy_identity_check([phi0, phi1])
    assert chk.residual == 0 and chk.exact and chk.projection_ok
    assert np.allclose(chk.projection, [[0, 0], [0, 1]])


def test_homotopy_generic_column():
    v = np.array([1 + 2j, -0.5 + 1j])
    phi1 = v.reshape(2, 1)
    phi0 = np.array([[v[1], -v[0]]])
    chk = homotopy_identity_check([phi0, phi1])
    assert chk.residual < 1e-12 and chk.exact and chk.projection_ok


def test_homotopy_non_exact_flagged():
    chk = homotopy_identity_check([np.array([[1.0, 0.0]]), np.array([[1.0], [0.0]])])
    assert chk.residual > 0.5 and not chk.exact


def _koszul(a):
    # contraction with a on the exterior algebra of C^3, bases ordered lexicographically
    from itertools import combinations

    n = len(a)
    basis = [list(combinations(range(n), k)) for k in range(n + 1)]
    maps = []
    for k in range(1, n + 1):
        M = np.zeros((len(basis[k - 1]), len(basis[k])), dtype=complex)
        for col, I in enumerate(basis[k]):
            for pos, i in enumerate(I):
                J = I[:pos] + I[pos + 1:]
                M[basis[k - 1].index(J), col] += (-1) ** pos * a[i]
        maps.append(M)
    return maps


def test_homotopy_koszul_chain():
    rng = np.random.default_rng(2)
    for _ in range(10):
        a = rng.normal(size=3) + 1j * rng.normal(size=3)
        maps = _koszul(a)
        assert np.allclose(maps[0] @ maps[1], 0) and np.allclose(maps[1] @ maps[2], 0)
        chk = homotopy_identity_check(maps)
        assert chk.residual < 1e-12 and chk.projection_ok


def test_homotopy_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        homotopy_identity_check([np.ones((1, 2)), np.ones((3, 1))])


# -- frames --------------------------------------------------------------------------------

def test_frame_examples():
    fr = frame_eval(F("z1"), [1.0])
    assert np.allclose(fr.sigma, [1.0]) and np.allclose(fr.dbar_sigma, [[0.0]])
    fr = frame_eval(F("z1", "z2"), [1.0, 0.0])
    assert np.allclose(fr.sigma, [1.0, 0.0])
    assert np.allclose(fr.dbar_sigma, [[0, 0], [0, 1]])
    with pytest.raises(OnSingularity):
        frame_eval(F("z1^2 - z2^3", "z2^2"), [0.0, 0.0])
    with pytest.raises(OnSingularity):
        frame_eval(F("z1 - 1", "z2"), [1.0, 0.0])


def _sigma(X, z):
    return frame_eval(X, z).sigma


@pytest.mark.parametrize("texts", FIELDS)
def test_sigma_is_left_inverse(texts):
    X = F(*texts)
    rng = np.random.default_rng(5)
    for z in random_points(rng, X.n, 100):
        fr = frame_eval(X, z)
        assert abs(np.sum(fr.a * fr.sigma) - 1) < 1e-12


@pytest.mark.parametrize("texts", FIELDS)
def test_dbar_sigma_matches_finite_differences(texts):
    X = F(*texts)
    n = X.n
    rng = np.random.default_rng(9)
    h = 1e-5
    for z in random_points(rng, n, 100):
        fr = frame_eval(X, z)
        fd = np.zeros((n, n), dtype=complex)
        for k in range(n):
            e = np.zeros(n, dtype=complex)
            e[k] = h
            dx = (_sigma(X, z + e) - _sigma(X, z - e)) / (2 * h)
            dy = (_sigma(X, z + 1j * e) - _sigma(X, z - 1j * e)) / (2 * h)
            fd[:, k] = 0.5 * (dx + 1j * dy)
        # dbar sigma is of size |J| / |a|^2, and vanishes identically for n = 1
        scale = max(np.abs(fr.dbar_sigma).max(), np.abs(fr.J).max() / fr.norm2)
        assert np.abs(fd - fr.dbar_sigma).max() / scale < 1e-6


# -- pointwise integrand ----------------------------------------------------------------------

def test_cauchy_density_is_positive():
    # n = 1, X = z: the density is chi'(|z|^2/eps) / (pi eps) in the shell
    chi, eps = ChiProfile(), 1e-2
    phi = preset("cn", 1)
    for r in (0.105, 0.12, 0.135):
        z = r * np.exp(0.7j)
        d = bb_integrand(F("z1"), phi, chi, eps, [z])
        expected = chi.derivative(r * r / eps) / (math.pi * eps)
        assert expected > 0
        assert abs(d - expected) < 1e-12 * expected


@pytest.mark.parametrize("texts", FIELDS)
def test_integrand_vanishes_where_chi_is_one(texts):
    X = F(*texts)
    n = X.n
    chi, eps = ChiProfile(), 1e-3
    phi = preset("c1^n", n)
    rng = np.random.default_rng(13)
    count = 0
    while count < 100:
        z = random_points(rng, n, 1)[0]
        a = np.array([complex(c.evaluate(z)) for c in X.components])
        if np.sum(np.abs(a) ** 2) < 2.5 * eps:
            continue
        count += 1
        assert bb_integrand(X, phi, chi, eps, z, normalized=True) <= 1e-10


def test_integrand_zero_inside():
    X = F("z1", "2*z2")
    assert bb_integrand(X, preset("c1^n", 2), ChiProfile(), 1e-2, [0.01, 0.02]) == 0


def test_integrand_on_singularity():
    with pytest.raises(OnSingularity):
        bb_integrand(F("z1", "z2"), preset("cn", 2), ChiProfile(), 1e-2, [0, 0])


# -- quadrature -----------------------------------------------------------------------------------

def test_numeric_examples():
    r = bb_numeric(F("z1", "z2"), preset("cn", 2), 1e-2)
    assert abs(r.value - 1) < 0.02
    assert r.grid == 40
    r = bb_numeric(F("z1"), preset("cn", 1), 1e-3)
    assert abs(r.value - 1) < 0.01
    assert r.value.real > 0
    r = bb_numeric(F("z1", "2*z2"), preset("c1^n", 2), 1e-2)
    assert abs(r.value - 4.5) < 0.02 * 4.5


def test_numeric_nonlinear_fields():
    q = ShellQuadrature(radius=0.9)
    r = bb_numeric(F("z1^2 - z2^3", "z2^2"), preset("cn", 2), 1e-2, q)
    assert abs(r.value - 4) < 0.05 * 4
    r = bb_numeric(F("z1 + z2^2", "3*z2"), preset("c1^n", 2), 1e-2, q)
    assert abs(r.value - 16 / 3) < 0.02 * 16 / 3


def test_full_ball_mode_n1():
    q = ShellQuadrature(mode="full-ball", grid=600)
    r = bb_numeric(F("z1"), preset("cn", 1), 1e-2, q)
    assert abs(r.value - 1) < 0.01


@pytest.mark.parametrize("texts, g, expected, tol", [
    (("z1", "z2"), "1", 1, 0.01),
    (("z1^2", "z2"), "z1", 1, 0.02),
    (("z1^2", "z2"), "1", 0, 0.01),
])
def test_bm_action_examples(texts, g, expected, tol):
    X = F(*texts)
    r = bm_action(X, parse_polynomial(g, nvars=2), 1e-2)
    assert abs(r.value - expected) < tol


def test_bm_action_cauchy():
    r = bm_action(F("z1^2 - 1/4*z1^3"), parse_polynomial("z1", nvars=1), 1e-3)
    assert abs(r.value - 1) < 0.01


def test_convergence_study():
    rows = convergence_study(F("z1", "z2"), preset("cn", 2), [1e-1, 3e-2, 1e-2])
    errs = [r.abs_error for r in rows]
    assert errs[-1] < 0.02
    assert errs[-1] < errs[0]
    text = convergence_csv(rows)
    lines = text.strip().split("\n")
    assert lines[0] == "eps,value_re,value_im,abs_error" and len(lines) == 4
    rows1 = convergence_study(F("z1"), preset("cn", 1), [1e-1, 1e-2, 1e-3])
    assert all(r.abs_error < 0.01 for r in rows1)


def test_chi_independence():
    X, phi = F("z1", "z2"), preset("cn", 2)
    q = ShellQuadrature(estimate_error=True)
    a = bb_numeric(X, phi, 1e-2, q, ChiProfile(kind="quintic"))
    b = bb_numeric(X, phi, 1e-2, q, ChiProfile(kind="cubic"))
    assert abs(a.value - b.value) <= 2 * max(a.error_estimate, b.error_estimate)


def test_thread_count_does_not_change_result():
    X, phi = F("z1", "2*z2"), preset("c1^n", 2)
    one = bb_numeric(X, phi, 1e-2, ShellQuadrature(grid=24, threads=1))
    four = bb_numeric(X, phi, 1e-2, ShellQuadrature(grid=24, threads=4))
    assert one.value == four.value
    again = bb_numeric(X, phi, 1e-2, ShellQuadrature(grid=24, threads=1))
    assert one.value == again.value


def test_grid_shift_on_node_hit():
    # midpoint nodes of the 2-cell grid on [-1, 1] sit at +-1/2
    q = ShellQuadrature(mode="full-ball", grid=2)
    r = bb_numeric(F("z1 - 1/2 - 1/2*i"), preset("cn", 1), 1e-2, q)
    assert r.shifted
    with pytest.raises(OnSingularity):
        bb_numeric(F("z1*(z1 - 1/2 - 1/2*i)"), preset("cn", 1), 1e-2, q)


def test_linear_field_helper():
    X = linear_field([1, 2])
    assert X == F("z1", "2*z2")


def test_quadrature_validation():
    with pytest.raises(ValueError):
        ShellQuadrature(mode="sparse")
    with pytest.raises(ValueError):
        ShellQuadrature(radius=0)
