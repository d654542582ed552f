"""Dirichlet characters mod q via exponent vectors on a fixed generator basis.

The unit group (Z/qZ)* is split over the prime powers dividing q.  Odd prime
powers are cyclic and use their smallest primitive root; 2^k for k >= 3 uses
the pair (-1, 5).  A character is an integer vector ``e`` with one entry per
generator, and chi(g_i) = exp(2 pi i e_i / ord(g_i)).  All identity and order
questions are therefore integer arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, reduce

import numpy as np

from .errors import DomainError

MAX_MODULUS = 10**6


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization of n by trial division, as (p, k) pairs."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            k = 0
            while n % d == 0:
                n //= d
                k += 1
            out.append((d, k))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def euler_phi(n: int) -> int:
    r = n
    for p, _ in factorize(n):
        r -= r // p
    return r


def primitive_root(pk: int, p: int) -> int:
    """Smallest primitive root modulo the odd prime power pk = p^k."""
    phi = pk // p * (p - 1)
    tests = [phi // r for r, _ in factorize(phi)]
    for g in range(2, pk):
        if g % p and all(pow(g, t, pk) != 1 for t in tests):
            return g
    raise DomainError(f"no primitive root mod {pk}")


@dataclass(frozen=True)
class _Component:
    # One cyclic factor of (Z/qZ)*: generator g of order `order` modulo `pk`,
    # lifted by CRT to `lift` mod q.
    p: int
    pk: int
    g: int
    order: int
    lift: int


class CharacterGroup:
    """The dual group of (Z/qZ)*."""

    def __init__(self, q: int, *, max_modulus: int = MAX_MODULUS):
        q = int(q)
        if q < 1 or q > max_modulus:
            raise DomainError(f"modulus must lie in [1, {max_modulus}], got {q}")
        self.q = q
        self.factorization = factorize(q)
        self.phi = euler_phi(q)
        comps = []
        for p, k in self.factorization:
            pk = p**k
            if p == 2:
                if k == 2:
                    comps.append((2, pk, pk - 1, 2))
                elif k >= 3:
                    comps.append((2, pk, pk - 1, 2))
                    comps.append((2, pk, 5, pk // 4))
            else:
                comps.append((p, pk, primitive_root(pk, p), pk // p * (p - 1)))
        self.components = tuple(
            _Component(p, pk, g, o, _crt_lift(g, pk, q)) for p, pk, g, o in comps
        )
        self.orders = tuple(c.order for c in self.components)
        self.exponent = reduce(math.lcm, self.orders, 1)
        self._logs = self._build_logs()

    def _build_logs(self) -> np.ndarray:
        # Row a holds the exponent vector of a mod q, or -1 when gcd(a, q) > 1.
        q = self.q
        logs = np.full((q, len(self.components)), -1, dtype=np.int64)
        residues = np.arange(q, dtype=np.int64)
        coprime = np.gcd(residues, q) == 1
        i = 0
        while i < len(self.components):
            c = self.components[i]
            r = residues % c.pk
            if c.p == 2 and c.pk >= 8:
                # a = (-1)^e0 * 5^e1 mod 2^k
                sign = (r % 4 == 3).astype(np.int64)
                r = np.where(sign == 1, (c.pk - r) % c.pk, r)
                table = _power_log_table(5, c.pk, self.components[i + 1].order)
                logs[:, i] = sign
                logs[:, i + 1] = table[r]
                i += 2
                continue
            table = _power_log_table(c.g, c.pk, c.order)
            logs[:, i] = table[r]
            i += 1
        logs[~coprime] = -1
        return logs

    def __len__(self):
        return self.phi

    def __repr__(self):
        return f"CharacterGroup(q={self.q}, orders={self.orders})"

    @cached_property
    def reduced_residues(self) -> np.ndarray:
        r = np.arange(self.q, dtype=np.int64)
        return r[np.gcd(r, self.q) == 1]

    @property
    def generators(self) -> tuple[int, ...]:
        """Generators of (Z/qZ)* lifted to residues mod q."""
        return tuple(c.lift for c in self.components)

    def discrete_log(self, a: int) -> tuple[int, ...]:
        a = int(a) % self.q
        row = self._logs[a]
        if len(row) and row[0] < 0:
            raise DomainError(f"{a} is not a unit mod {self.q}")
        return tuple(int(v) for v in row)

    def phases(self, exps, n) -> np.ndarray:
        """Integer phases k with chi(n) = exp(2 pi i k / exponent); -1 off the units."""
        n = np.asarray(n, dtype=np.int64) % self.q
        logs = self._logs[n]
        if not self.components:
            return np.where(np.gcd(n, self.q) == 1, 0, -1).astype(np.int64)
        scale = np.array([self.exponent // o for o in self.orders], dtype=np.int64)
        weights = np.asarray(exps, dtype=np.int64) * scale
        ph = (logs @ weights) % self.exponent
        return np.where(logs[..., 0] < 0, -1, ph)

    def character(self, exps) -> "Character":
        exps = tuple(exps)
        if len(exps) != len(self.orders):
            raise DomainError(f"expected {len(self.orders)} exponents")
        return Character(self, tuple(int(e) % o for e, o in zip(exps, self.orders)))

    def character_from_id(self, text: str) -> "Character":
        """Parse the comma-separated exponent vector used as a character id."""
        text = text.strip()
        parts = [int(s) for s in text.split(",")] if text else []
        if len(parts) != len(self.orders):
            raise DomainError(f"character id {text!r} needs {len(self.orders)} entries")
        for e, o in zip(parts, self.orders):
            if not 0 <= e < o:
                raise DomainError(f"exponent {e} out of range [0, {o})")
        return Character(self, tuple(parts))

    def principal(self) -> "Character":
        return Character(self, (0,) * len(self.orders))

    def characters(self) -> list["Character"]:
        """All phi(q) characters, principal first."""
        return [Character(self, e) for e in itertools.product(*(range(o) for o in self.orders))]


def build_group(q: int, **kwargs) -> CharacterGroup:
    return CharacterGroup(q, **kwargs)


def enumerate_characters(group: CharacterGroup) -> list["Character"]:
    return group.characters()


def _crt_lift(g, pk, q):
    # The residue mod q that is g mod pk and 1 mod q/pk.
    rest = q // pk
    if rest == 1:
        return g % q
    return (g * rest * pow(rest, -1, pk) + pk * pow(pk, -1, rest)) % q


def _power_log_table(g, m, order):
    table = np.full(m, -1, dtype=np.int64)
    v = 1
    for k in range(order):
        table[v] = k
        v = v * g % m
    return table


@dataclass(frozen=True)
class Character:
    group: CharacterGroup = field(repr=False, compare=False)
    exps: tuple[int, ...]

    def __eq__(self, other):
        return isinstance(other, Character) and self.group.q == other.group.q and self.exps == other.exps

    def __hash__(self):
        return hash((self.group.q, self.exps))

    @property
    def id(self) -> str:
        return ",".join(str(e) for e in self.exps)

    @property
    def is_principal(self) -> bool:
        return not any(self.exps)

    @property
    def order(self) -> int:
        return reduce(math.lcm, (o // math.gcd(o, e) for e, o in zip(self.exps, self.group.orders)), 1)

    @property
    def is_real(self) -> bool:
        return self.order <= 2

    def __call__(self, n) -> complex:
        return evaluate(self, n)

    def __mul__(self, other: "Character") -> "Character":
        return self.group.character(tuple(a + b for a, b in zip(self.exps, other.exps)))

    def __pow__(self, k: int) -> "Character":
        return self.group.character(tuple(k * e for e in self.exps))

    def conj(self) -> "Character":
        return self ** -1

    def phases(self, n) -> np.ndarray:
        return self.group.phases(self.exps, n)

    def values(self, n) -> np.ndarray:
        """chi(n) for an array of integers, as complex128 (0 off the units)."""
        ph = self.phases(n)
        out = _root_table(self.group.exponent)[np.where(ph < 0, 0, ph)]
        return np.where(ph < 0, 0j, out)


def evaluate(chi: Character, n) -> complex:
    """chi(n); exactly 0 when gcd(n, q) > 1."""
    return complex(chi.values(np.array([int(n) % chi.group.q]))[0])


def order(chi: Character) -> int:
    return chi.order


_ROOTS: dict[int, np.ndarray] = {}


def _root_table(e: int) -> np.ndarray:
    # Exact values at the quarter turns so real characters stay real.
    if e not in _ROOTS:
        k = np.arange(e)
        z = np.exp(2j * np.pi * k / e)
        for num, val in ((0, 1), (1, 1j), (2, -1), (3, -1j)):
            if (num * e) % 4 == 0:
                z[num * e // 4] = val
        _ROOTS[e] = z
    return _ROOTS[e]
