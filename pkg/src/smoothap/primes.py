"""Prime tables and exact counts of smooth numbers.

Everything here is exact integer arithmetic.  Counts in progressions are
obtained by reducing each smooth number mod q while it is generated, never
by sieving residue tables.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DomainError

# Largest limit for which a prime table is built at all, and the largest for
# which the smallest-prime-factor array (4 bytes per entry) is kept.
MAX_TABLE_LIMIT = 10**8
MAX_SPF_LIMIT = 2 * 10**7
# Largest list enumerate_smooth will materialize.
MAX_ENUMERATION = 2 * 10**7
# Residue counting materializes subproblems up to this size only.
_LEAF = 1 << 18
_INT_CUTOFF_MAX = 2**62


@dataclass(frozen=True)
class PrimeTable:
    limit: int
    primes: np.ndarray = field(repr=False)
    spf: np.ndarray | None = field(default=None, repr=False)

    def primes_upto(self, y) -> np.ndarray:
        """Primes p <= y as an int64 array (a view, do not modify)."""
        if y > self.limit:
            raise DomainError(f"table limit {self.limit} does not cover y={y}")
        n = int(np.searchsorted(self.primes, math.floor(y), side="right"))
        return self.primes[:n]

    def pi(self, y) -> int:
        return len(self.primes_upto(y))


def build_prime_table(limit, *, max_limit=MAX_TABLE_LIMIT, spf_limit=MAX_SPF_LIMIT) -> PrimeTable:
    """Sieve the primes up to ``limit``.

    The smallest-prime-factor array is attached only when ``limit <= spf_limit``.
    """
    limit = int(limit)
    if limit < 2:
        raise DomainError("prime table limit must be at least 2")
    if limit > max_limit:
        raise CapacityError(f"prime table limit {limit} exceeds budget {max_limit}")

    if limit <= spf_limit:
        spf = np.zeros(limit + 1, dtype=np.int32)
        for p in range(2, math.isqrt(limit) + 1):
            if spf[p] == 0:
                tail = spf[p * p :: p]
                tail[tail == 0] = p
        idx = np.arange(limit + 1, dtype=np.int32)
        unset = spf == 0
        spf[unset] = idx[unset]
        spf[:2] = 0
        primes = np.flatnonzero(spf[2:] == idx[2:]).astype(np.int64) + 2
        return PrimeTable(limit, primes, spf)

    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    sieve[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if sieve[p]:
            sieve[p * p :: 2 * p] = False
    return PrimeTable(limit, np.flatnonzero(sieve).astype(np.int64), None)


def is_smooth(n, y, table: PrimeTable) -> bool:
    """True iff every prime factor of ``n`` is at most ``y``."""
    n = int(n)
    if n <= 0:
        raise DomainError("smoothness is defined for n >= 1")
    if n == 1:
        return True
    if table.spf is not None and n <= table.limit:
        while n > 1:
            p = int(table.spf[n])
            if p > y:
                return False
            n //= p
        return True

    bound = min(math.floor(y), table.limit)
    exhausted = True
    for p in table.primes[: np.searchsorted(table.primes, bound, side="right")]:
        p = int(p)
        if p * p > n:
            exhausted = False
            break
        while n % p == 0:
            n //= p
    if n == 1 or n <= y:
        return True
    if not exhausted or bound == math.floor(y):
        # n is a prime above y, or has no prime factor <= y at all.
        return False
    # All prime factors of n exceed the table limit but y is larger still.
    if n <= (table.limit + 1) ** 2:
        return False  # n is prime and n > y
    raise CapacityError(f"cannot decide smoothness of cofactor {n} with table limit {table.limit}")


def _cutoff(x) -> int:
    if not x >= 1:
        raise DomainError(f"x must be >= 1, got {x}")
    n = math.floor(x)
    if n > _INT_CUTOFF_MAX:
        raise CapacityError("x exceeds the 64-bit enumeration range")
    return n


def _check_y(y):
    if not y >= 2:
        raise DomainError(f"y must be >= 2, got {y}")


def _smooth_primes(y, n, table):
    top = max(2, min(math.floor(y), n))
    if table is None:
        table = build_prime_table(top)
    return table.primes_upto(top)


def _generate(n, primes, budget):
    arr = np.ones(1, dtype=np.int64)
    for p in primes:
        p = int(p)
        if p > n:
            break
        parts = [arr]
        cur = arr
        while True:
            cur = cur[cur <= n // p] * p
            if not cur.size:
                break
            parts.append(cur)
        arr = np.concatenate(parts)
        if arr.size > budget:
            raise CapacityError(f"smooth enumeration exceeds budget of {budget} elements")
    return arr


def enumerate_smooth(x, y, table: PrimeTable | None = None, *, budget=MAX_ENUMERATION) -> np.ndarray:
    """All y-smooth integers in [1, x], ascending, as an int64 array."""
    _check_y(y)
    n = _cutoff(x)
    primes = _smooth_primes(y, n, table)
    arr = _generate(n, primes, budget)
    arr.sort()
    return arr


def _residue_counts(n, primes, q):
    """Residue histogram mod q of the integers <= n built from ``primes``."""
    sys_limit = sys.getrecursionlimit()
    if sys_limit < 10_000:
        sys.setrecursionlimit(10_000)
    shift = {}

    def perm(p):
        if p not in shift:
            shift[p] = (p * np.arange(q, dtype=np.int64)) % q
        return shift[p]

    def rec(n, k):
        # Smooth numbers <= n over primes[:k].
        if n <= _LEAF or k == 0:
            arr = _generate(n, primes[:k], MAX_ENUMERATION)
            return np.bincount(arr % q, minlength=q).astype(np.int64)
        out = np.zeros(q, dtype=np.int64)
        out[1 % q] += 1
        for j in range(k):
            p = int(primes[j])
            if p > n:
                break
            # Numbers whose largest prime factor is p.
            m = n // p
            if m < p:
                # every m' <= m is built from primes below p
                out += np.bincount((p * np.arange(1, m + 1, dtype=np.int64)) % q, minlength=q)
                continue
            sub = rec(m, j + 1)
            out += np.bincount(perm(p), weights=sub, minlength=q).astype(np.int64)
        return out

    return rec(n, len(primes))


@dataclass(frozen=True)
class SmoothCounts:
    x: float
    y: float
    q: int
    per_residue: dict
    psi_q: int
    psi: int


def psi_exact(x, y, table: PrimeTable | None = None) -> int:
    """Psi(x, y): the number of y-smooth integers n <= x."""
    _check_y(y)
    n = _cutoff(x)
    primes = _smooth_primes(y, n, table)
    return int(_residue_counts(n, primes, 1)[0])


def psi_progression_exact(x, y, q, table: PrimeTable | None = None) -> SmoothCounts:
    """Counts of y-smooth n <= x in every reduced residue class mod q."""
    _check_y(y)
    q = int(q)
    if q < 1:
        raise DomainError("modulus q must be >= 1")
    n = _cutoff(x)
    primes = _smooth_primes(y, n, table)
    hist = _residue_counts(n, primes, q)
    per = {a: int(hist[a]) for a in range(q) if math.gcd(a, q) == 1}
    return SmoothCounts(x, y, q, per, sum(per.values()), int(hist.sum()))


def residue_histogram(x, y, q, table: PrimeTable | None = None) -> np.ndarray:
    """Counts of y-smooth n <= x in every residue class 0..q-1 (coprime or not)."""
    _check_y(y)
    n = _cutoff(x)
    return _residue_counts(n, _smooth_primes(y, n, table), int(q))


def psi_character_exact(x, y, chi, table: PrimeTable | None = None) -> complex:
    """Sum of chi(n) over the y-smooth n <= x."""
    q = chi.group.q
    hist = residue_histogram(x, y, q, table)
    return complex(np.dot(hist.astype(np.float64), chi.values(np.arange(q))))


def psi_weighted_exact(x, y, chi, weight, table: PrimeTable | None = None) -> complex:
    """Sum of chi(n) * weight(n / x) over y-smooth n, by direct enumeration."""
    _check_y(y)
    top = x * weight.support_end
    n = enumerate_smooth(top, y, table)
    w = weight.evaluate(n / x)
    keep = w > 0
    return complex(np.sum(chi.values(n[keep]) * w[keep]))
