import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from smoothap import (CharacterGroup, DomainError, MellinEvaluator, SmoothWeight, build_prime_table,
                      central_segment, contour_psi, psi_weighted_exact, solve_alpha)
from smoothap.mellin import _gk_integrate, bump, bump_derivatives, bump_mass, contour_segment, ramp

# scipy.integrate.quad of |Phi''(t)| t^1.7 over [0.9, 1] for the lower weight with epsilon = 0.1.
M2_EPS01_SIGMA07 = 47.77058902378538
# Direct summation of Phi(n/x) over 30-smooth n <= 1e4 coprime to 7, lower weight, epsilon = 0.05.
WEIGHTED_1E4_30_Q7 = 1062.902259766649
# Relative gap between the central segment at U = sqrt(u) and the full integral at (1e4, 30, q=7).
CENTRAL_GAP_1E4_30_Q7 = 0.1248


@pytest.fixture(scope="module")
def table():
    return build_prime_table(100)


@pytest.fixture(scope="module")
def ev():
    return MellinEvaluator(SmoothWeight("lower", 0.05))


def test_weight_values():
    w = SmoothWeight("lower", 0.1)
    assert w(0.5) == 1.0
    assert w(1.2) == 0.0
    assert 0 < w(0.95) < 1
    up = SmoothWeight("upper", 0.1)
    assert up(1.0) == 1.0 and up(1.1) == 0.0
    with pytest.raises(DomainError):
        SmoothWeight("middle")
    with pytest.raises(DomainError):
        SmoothWeight("lower", 0.7)


def test_weight_is_monotone_and_symmetric():
    v = np.linspace(0, 1, 1001)
    r = ramp(v)
    assert np.all(np.diff(r) >= 0)
    assert np.allclose(r + ramp(1 - v), 1.0, atol=1e-14)


def test_bump_mass_by_quad():
    z, _ = integrate.quad(lambda v: float(bump(v)), 0, 1, epsabs=1e-15, epsrel=1e-13)
    assert bump_mass() == pytest.approx(z, rel=1e-12)


def test_bump_derivatives_by_finite_differences():
    v = np.array([0.2, 0.5, 0.77])
    d = bump_derivatives(v, 3)
    h = 1e-5
    for m in range(3):
        fd = (bump_derivatives(v + h, m)[m] - bump_derivatives(v - h, m)[m]) / (2 * h)
        assert np.allclose(d[m + 1], fd, rtol=1e-6)


@pytest.mark.parametrize("s", [1.0, 0.5, 0.8 + 5j, 0.3 - 40j, 1.2 + 200j])
def test_transform_against_definition(s):
    w = SmoothWeight("lower", 0.05)
    ev = MellinEvaluator(w)

    def part(f):
        val, _ = integrate.quad(lambda t: f(w(t) * t ** (s - 1)), w.start, w.support_end,
                                epsabs=1e-14, limit=400)
        return val

    # plateau in closed form, transition by quad
    ref = w.start**s / s + part(lambda z: complex(z).real) + 1j * part(lambda z: complex(z).imag)
    assert abs(ev.transform(s) - ref) <= 1e-9 * max(1.0, abs(ref))


def test_transform_basic_properties(ev):
    assert abs(ev.transform(1.0) - 1) <= 0.05
    for a in (0.2, 0.7, 1.5):
        v = ev.transform(a)
        assert v.imag == 0 and v.real > 0
    s = 0.8 + 5j
    assert abs(ev.transform(np.conj(s)) - np.conj(ev.transform(s))) <= 1e-10
    with pytest.raises(DomainError):
        ev.transform(-0.1)


def test_fast_path_matches_checked_path(ev):
    s = 0.6 + np.linspace(-800, 800, 41) * 1j
    assert np.allclose(ev._transform_fast(s), ev.transform(s), rtol=1e-10, atol=1e-14)


def test_second_derivative_norm():
    ev = MellinEvaluator(SmoothWeight("lower", 0.1))
    m2 = ev.derivative_norm(0.7, 2)
    assert m2 >= M2_EPS01_SIGMA07
    assert m2 == pytest.approx(M2_EPS01_SIGMA07, rel=1e-9)


def test_decay_bound_first_order(ev):
    rng = np.random.default_rng(3)
    for _ in range(20):
        s = complex(rng.uniform(0.3, 1.2), rng.uniform(-1000, 1000))
        assert abs(ev.transform(s)) <= ev.decay_bound(s, 1) * (1 + 1e-6)


def test_decay_bound_scaling(ev):
    a, b = ev.decay_bound(0.7 + 64j, 4), ev.decay_bound(0.7 + 128j, 4)
    assert b / a <= 1 / 8


@given(st.floats(0.3, 1.2), st.floats(-1000, 1000), st.sampled_from([1, 2, 3, 5, 8]))
@settings(max_examples=60, deadline=None)
def test_decay_bound_property(sigma, t, k):
    ev = MellinEvaluator(SmoothWeight("upper", 0.1))
    s = complex(sigma, t)
    assert abs(ev.transform(s)) <= ev.decay_bound(s, k) * (1 + 1e-6)


def test_gauss_kronrod_exact_on_polynomials():
    rng = np.random.default_rng(0)
    c = rng.normal(size=20) + 1j * rng.normal(size=20)
    f = np.polynomial.Polynomial(c)
    val, err = _gk_integrate(lambda t: f(t), -0.3, 1.7)
    ref = f.integ()(1.7) - f.integ()(-0.3)
    assert abs(val - ref) <= 1e-12 * abs(ref)


def test_gauss_kronrod_oscillatory():
    val, err = _gk_integrate(lambda t: np.exp(1j * 300 * t), 0, 2, tol_rel=1e-12, min_panels=100)
    ref = (np.exp(600j) - 1) / 300j
    assert abs(val - ref) <= 1e-11


def test_contour_matches_direct_sum(table, ev):
    chi0 = CharacterGroup(7).principal()
    res = contour_psi(1e4, 30, chi0, ev, None, table)
    assert res.tail_bound < 1e-3 * abs(res.value)
    assert abs(res.value / WEIGHTED_1E4_30_Q7 - 1) <= 1e-2
    exact = psi_weighted_exact(1e4, 30, chi0, ev.weight, table)
    assert exact.real == pytest.approx(WEIGHTED_1E4_30_Q7, rel=1e-12)


def test_contour_error_bound_covers_truncation(table, ev):
    chi0 = CharacterGroup(7).principal()
    for T in (8, 32):
        res = contour_psi(1e4, 30, chi0, ev, T, table)
        assert abs(res.value - WEIGHTED_1E4_30_Q7) <= res.error


def test_contour_real_characters_and_zero_width(table, ev):
    g = CharacterGroup(12)
    for chi in g.characters():
        res = contour_psi(1e3, 30, chi, ev, 64, table)
        assert abs(res.value.imag) <= 1e-9 * abs(res.value)
    assert contour_psi(1e3, 30, g.principal(), ev, 0, table).value == 0


def test_contour_nonprincipal_matches_direct_sum(table, ev):
    chi = CharacterGroup(7).character_from_id("1")
    res = contour_psi(1e4, 30, chi, ev, 1024, table)
    exact = psi_weighted_exact(1e4, 30, chi, ev.weight, table)
    assert abs(res.value - exact) <= 1e-2 * WEIGHTED_1E4_30_Q7


def test_central_segment_additivity(table, ev):
    x, y, q = 1e4, 30, 7
    chi0 = CharacterGroup(q).principal()
    alpha = solve_alpha(x, y, table)
    u = math.log(x) / math.log(y)
    cs = central_segment(x, y, chi0, ev, math.sqrt(u), table, alpha=alpha)
    T = math.sqrt(q)
    right = contour_segment(x, y, chi0, ev, cs.T, T, table, alpha=alpha)
    left = contour_segment(x, y, chi0, ev, -T, -cs.T, table, alpha=alpha)
    full = contour_psi(x, y, chi0, ev, T, table, alpha=alpha)
    tol = cs.quad_error + right.quad_error + left.quad_error + full.quad_error
    assert abs(cs.value + right.value + left.value - full.value) <= max(tol, 1e-9 * abs(full.value))


def test_central_segment_against_full_integral(table, ev):
    x, y = 1e4, 30
    chi0 = CharacterGroup(7).principal()
    u = math.log(x) / math.log(y)
    cs = central_segment(x, y, chi0, ev, math.sqrt(u), table)
    full = contour_psi(x, y, chi0, ev, None, table)
    gap = abs(cs.value / full.value - 1)
    assert gap == pytest.approx(CENTRAL_GAP_1E4_30_Q7, abs=5e-4)


def test_central_segment_conjugate_symmetry(table, ev):
    chi = CharacterGroup(7).character_from_id("1")
    a = central_segment(1e4, 30, chi, ev, 1.5, table)
    b = central_segment(1e4, 30, chi.conj(), ev, 1.5, table)
    assert abs(a.value - np.conj(b.value)) <= 1e-9 * abs(a.value)


def test_central_segment_rejects_wide_U(table, ev):
    with pytest.raises(DomainError):
        central_segment(1e4, 30, CharacterGroup(7).principal(), ev, 5.0, table)
