import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smoothap import (CharacterGroup, DomainError, MellinEvaluator, SmoothWeight, build_prime_table,
                      ht_estimate, log_L_truncated, L_truncated, phi2, saddle_data, solve_alpha, solve_xi)
from smoothap.errors import PoleError
from smoothap.saddle import log_L_principal, saddle_residual

# Bisection on exp(xi) - 1 - 10 xi over [1, 10], 200 halvings.
XI_10 = 3.61495042708753
# Bisection on the saddle-point equation at (1e6, 1e3) with a trial-division prime list.
ALPHA_1E6_1E3 = 0.8107722261169819
# Direct sum of p (log p)^2 / (p - 1)^2 over the 25 primes up to 100.
PHI2_ALPHA1_Y100 = 10.994376987789954
# Sum of n^-2 over the 7-smooth n <= 1e6 (the tail beyond 1e6 is below 1e-6).
L2_Y10 = 1.595052083163293


@pytest.fixture(scope="module")
def table():
    return build_prime_table(10**4)


def test_xi_values():
    assert solve_xi(math.e - 1) == pytest.approx(1.0, abs=1e-12)
    assert 0 < solve_xi(1 + 1e-6) < 1e-2
    assert solve_xi(10) == pytest.approx(XI_10, abs=1e-12)
    with pytest.raises(DomainError):
        solve_xi(1.0)


@given(st.floats(1.0001, 1e8))
@settings(max_examples=200, deadline=None)
def test_xi_solves_its_equation(u):
    xi = solve_xi(u)
    assert xi > 0
    assert abs(math.expm1(xi) - xi * u) <= 1e-11 * (1 + xi * u)


def test_alpha_oracle(table):
    assert solve_alpha(1e6, 1e3, table) == pytest.approx(ALPHA_1E6_1E3, abs=1e-12)


def test_alpha_near_its_leading_behavior(table):
    x, y = 1e8, 1e3
    a = solve_alpha(x, y, table)
    lead = 1 - solve_xi(math.log(x) / math.log(y)) / math.log(y)
    assert abs(a - lead) <= 10 / math.log(x)


@given(st.floats(3, 30), st.sampled_from([10, 50, 200, 1000, 5000]))
@settings(max_examples=80, deadline=None)
def test_alpha_residual(logx, y):
    table = build_prime_table(10**4)
    x = math.exp(logx)
    a = solve_alpha(x, y, table)
    assert a > 0
    assert abs(saddle_residual(a, x, y, table)) <= 1e-9 * logx


def test_alpha_decreases_in_x(table):
    alphas = [solve_alpha(10.0**k, 100, table) for k in range(3, 12)]
    assert all(a > b for a, b in zip(alphas, alphas[1:]))


def test_alpha_coprime_variant(table):
    a1 = solve_alpha(1e6, 100, table)
    a7 = solve_alpha(1e6, 100, table, q=7)
    assert abs(saddle_residual(a7, 1e6, 100, table, q=7)) <= 1e-9 * math.log(1e6)
    # dropping a prime lowers the left side, so the root moves left
    assert a7 < a1


def test_phi2(table):
    assert phi2(1.0, 100, 1, table) == pytest.approx(PHI2_ALPHA1_Y100, rel=1e-13)
    a = solve_alpha(1e6, 1e3, table)
    r = phi2(a, 1e3, 1, table) / (math.log(1e6) * math.log(1e3))
    assert 0.05 <= r <= 20
    with pytest.raises(DomainError):
        phi2(0.0, 100, 1, table)


def test_truncated_L(table):
    chi0 = CharacterGroup(1).principal()
    assert L_truncated(1.0, chi0, 2, table) == pytest.approx(2.0, abs=1e-15)
    assert abs(L_truncated(2.0, chi0, 10, table) - L2_Y10) <= 1e-6
    s = np.array([0.7 + 3j, 0.9 - 1j])
    assert log_L_truncated(s, chi0, 50, table).shape == (2,)
    with pytest.raises(DomainError):
        log_L_truncated(-0.5, chi0, 10, table)


def test_truncated_L_pole():
    chi0 = CharacterGroup(1).principal()
    with pytest.raises(PoleError):
        log_L_truncated(1e-300 + 0j, chi0, 2, build_prime_table(10))


def test_truncated_L_conjugates(table):
    g = CharacterGroup(7)
    chi = g.character_from_id("1")
    s = 0.8 + 2.5j
    a = L_truncated(s, chi, 100, table)
    b = L_truncated(np.conj(s), chi.conj(), 100, table)
    assert abs(a - np.conj(b)) <= 1e-12 * abs(a)


def test_ht_estimate_positive_and_monotone(table):
    ev = MellinEvaluator(SmoothWeight("lower", 0.05))
    vals = [ht_estimate(10.0**k, 100, ev, table) for k in (4, 5, 6)]
    assert all(v > 0 for v in vals)
    assert vals[0] < vals[1] < vals[2]


def test_log_L_over_u_falls_toward_one(table):
    # log L(alpha, chi_0; y) ~ u; at y = 1e3 the ratio exceeds 1 and decreases with u.
    y = 1e3
    ratios = []
    for u in (5, 10, 20, 40):
        a = solve_alpha(y**u, y, table)
        ratios.append(log_L_principal(a, y, table) / u)
    assert all(r1 > r2 > 1 for r1, r2 in zip(ratios, ratios[1:]))


def test_saddle_data(table):
    sd = saddle_data(1e6, 1e3, table)
    assert sd.u == pytest.approx(2.0)
    assert sd.xi == pytest.approx(solve_xi(2.0))
    assert set(sd.as_dict()) == {"x", "y", "q", "u", "alpha", "xi", "phi2", "logL"}
