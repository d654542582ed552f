import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smoothap import CharacterGroup, DomainError
from smoothap.characters import euler_phi, factorize, primitive_root


def test_small_groups():
    assert len(CharacterGroup(5).characters()) == 4
    assert CharacterGroup(5).orders == (4,)
    g8 = CharacterGroup(8)
    assert len(g8.characters()) == 4
    assert all(c.is_real for c in g8.characters())
    assert len(CharacterGroup(1).characters()) == 1
    assert CharacterGroup(1).principal()(17) == 1


def test_mod_12_is_klein_four_by_direct_table():
    g = CharacterGroup(12)
    chars = g.characters()
    assert len(chars) == 4
    for c in chars:
        vals = c.values(g.reduced_residues)
        assert np.all(np.abs(vals.imag) == 0)
        assert set(np.round(vals.real).astype(int)) <= {-1, 1}
    # every unit squares to 1 mod 12
    assert all(a * a % 12 == 1 for a in g.reduced_residues.tolist())


def test_evaluation_cases():
    g5 = CharacterGroup(5)
    assert g5.principal()(3) == 1
    chi = g5.character((1,))
    assert chi(2) == 1j
    assert chi(4) == -1
    assert chi.order == 4
    g6 = CharacterGroup(6)
    assert all(c(3) == 0 for c in g6.characters())


def test_orders():
    assert CharacterGroup(13).principal().order == 1
    assert CharacterGroup(7).character_from_id("3").order == 2
    assert CharacterGroup(8).orders == (2, 2)
    assert CharacterGroup(16).orders == (2, 4)


def test_large_modulus_multiplicativity():
    q = 360360
    g = CharacterGroup(q)
    assert g.phi == euler_phi(q)
    rng = random.Random(7)
    units = g.reduced_residues
    for _ in range(1000):
        chi = g.character([rng.randrange(o) for o in g.orders])
        a, b = int(rng.choice(units)), int(rng.choice(units))
        assert abs(chi(a * b % q) - chi(a) * chi(b)) <= 1e-9


@given(st.integers(1, 400))
@settings(max_examples=80, deadline=None)
def test_discrete_log_reconstructs_units(q):
    g = CharacterGroup(q)
    for a in g.reduced_residues.tolist()[:50]:
        e = g.discrete_log(a)
        v = 1 % q
        for gen, k in zip(g.generators, e):
            v = v * pow(gen, k, q) % q
        assert v == a % q


@given(st.integers(2, 300), st.integers(0, 10**6), st.integers(0, 10**6))
@settings(max_examples=100, deadline=None)
def test_complete_multiplicativity_and_periodicity(q, m, n):
    g = CharacterGroup(q)
    for chi in g.characters()[:12]:
        assert abs(chi(m * n) - chi(m) * chi(n)) <= 1e-9
        assert chi(m + q) == chi(m)
        assert (chi(m) == 0) == (math.gcd(m, q) > 1)


def test_group_operations():
    g = CharacterGroup(15)
    chars = g.characters()
    for a in chars:
        assert a * a.conj() == g.principal()
        assert a ** a.order == g.principal()
        for b in chars:
            n = np.arange(15)
            assert np.allclose((a * b).values(n), a.values(n) * b.values(n))


def test_primitive_roots_and_factorization():
    assert primitive_root(7, 7) == 3
    assert primitive_root(9, 3) == 2
    assert factorize(360360) == [(2, 3), (3, 2), (5, 1), (7, 1), (11, 1), (13, 1)]


def test_ids_round_trip_and_reject_bad_input():
    g = CharacterGroup(21)
    for chi in g.characters():
        assert g.character_from_id(chi.id) == chi
    with pytest.raises(DomainError):
        g.character_from_id("1")
    with pytest.raises(DomainError):
        g.character_from_id("7,0")
    with pytest.raises(DomainError):
        CharacterGroup(0)
    with pytest.raises(DomainError):
        g.discrete_log(7)
