"""Pretentious distance over primes, twisted minima, and problem characters.

For functions f, g on the primes p <= y with p !| q,

    D_alpha(f, g; y)^2 = sum_{p <= y, p !| q} (1 - Re(conj(f(p)) g(p))) / p^alpha.

Characters with a small twisted distance to 1 and bounded order are flagged;
their joint kernel H is the subgroup inside whose cosets equidistribution is
still expected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .characters import Character, CharacterGroup
from .errors import DomainError, InvariantError
from .primes import PrimeTable, build_prime_table

GOLDEN_TOL = 1e-6
DEFAULT_B = 10


@dataclass(frozen=True)
class PrimeFunction:
    """Values of a function on an ascending array of primes."""

    primes: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.primes) != len(self.values):
            raise DomainError("primes and values must have equal length")
        if np.any(np.abs(self.values) > 1 + 1e-12):
            raise DomainError("values must lie in the closed unit disc")

    @classmethod
    def constant(cls, primes, value=1.0):
        primes = np.asarray(primes, dtype=np.int64)
        return cls(primes, np.full(len(primes), value, dtype=np.complex128))

    @classmethod
    def from_character(cls, chi: Character, primes, t: float = 0.0):
        """p -> chi(p) p^(-it) on the given primes."""
        primes = np.asarray(primes, dtype=np.int64)
        vals = chi.values(primes) * np.exp(-1j * t * np.log(primes.astype(np.float64)))
        return cls(primes, vals)

    def __mul__(self, other: "PrimeFunction") -> "PrimeFunction":
        if not np.array_equal(self.primes, other.primes):
            raise DomainError("prime functions are defined on different primes")
        return PrimeFunction(self.primes, self.values * other.values)

    def on(self, primes) -> np.ndarray:
        """Values at ``primes``; every requested prime must be present."""
        idx = np.searchsorted(self.primes, primes)
        idx = np.minimum(idx, len(self.primes) - 1)
        if len(primes) and (not len(self.primes) or np.any(self.primes[idx] != primes)):
            raise DomainError("prime function is missing a value at some p <= y")
        return self.values[idx]


@lru_cache(maxsize=32)
def _primes_upto(n: int) -> np.ndarray:
    return build_prime_table(max(n, 2)).primes_upto(n)


def _support(y, q) -> np.ndarray:
    p = _primes_upto(math.floor(y))
    return p[np.gcd(p, q) == 1] if q > 1 else p


def distance_squared(f: PrimeFunction, g: PrimeFunction, alpha, y, q: int = 1) -> float:
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    p = _support(y, q)
    fv, gv = f.on(p), g.on(p)
    terms = (1.0 - np.real(np.conj(fv) * gv)) * np.exp(-alpha * np.log(p.astype(np.float64)))
    return max(0.0, float(np.sum(terms)))


def distance(f: PrimeFunction, g: PrimeFunction, alpha, y, q: int = 1) -> float:
    """D_alpha(f, g; y) over the primes p <= y not dividing q."""
    return math.sqrt(distance_squared(f, g, alpha, y, q))


class _TwistTerms:
    # Precomputed per-prime data for t -> D_alpha(1, chi(p) p^(-it); y)^2.
    def __init__(self, chi: Character, alpha, y, table: PrimeTable):
        if not alpha > 0:
            raise DomainError("alpha must be positive")
        p = table.primes_upto(y)
        cv = chi.values(p)
        keep = cv != 0
        lp = np.log(p[keep].astype(np.float64))
        self.lp = lp
        self.cv = cv[keep]
        self.w = np.exp(-alpha * lp)

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        re = np.real(self.cv * np.exp(-1j * np.multiply.outer(t, self.lp)))
        out = np.sum((1.0 - re) * self.w, axis=-1)
        return np.maximum(out, 0.0)


def dist_char_twist(chi: Character, t, alpha, y, table: PrimeTable):
    """D_alpha(1, chi(p) p^(-it); y); ``t`` may be an array."""
    d2 = _TwistTerms(chi, alpha, y, table)(t)
    out = np.sqrt(d2)
    return float(out) if out.ndim == 0 else out


def _golden(f, a, b, tol):
    inv = (math.sqrt(5) - 1) / 2
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    t = (a + b) / 2
    return t, f(t)


def min_dist_over_t(chi: Character, alpha, y, Tmax, grid_step, table: PrimeTable):
    """(t_min, d2_min) of D_alpha(1, chi(p) p^(-it); y)^2 over |t| <= Tmax.

    A symmetric grid locates the basin, golden-section search refines it.
    """
    if not Tmax > 0 or not grid_step > 0:
        raise DomainError("Tmax and grid_step must be positive")
    f = _TwistTerms(chi, alpha, y, table)
    n = int(math.floor(Tmax / grid_step))
    grid = np.arange(-n, n + 1) * grid_step
    if grid[-1] < Tmax:
        grid = np.concatenate([[-Tmax], grid, [Tmax]])
    vals = np.concatenate([f(grid[i:i + 4096]) for i in range(0, len(grid), 4096)])
    i = int(np.argmin(vals))
    t_best, d_best = float(grid[i]), float(vals[i])
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        t_ref, d_ref = _golden(lambda t: float(f(t)), float(lo), float(hi), GOLDEN_TOL)
        if d_ref < d_best:
            t_best, d_best = t_ref, d_ref
    return t_best, d_best


def default_grid_step(y, B) -> float:
    return 1.0 / (4.0 * math.log(y) * B)


def default_threshold(u, B, scale: float = 1.0) -> float:
    """Flagging cutoff for the squared twisted distance: scale * sqrt(u) / (40 B^2)."""
    return scale * math.sqrt(u) / (40.0 * B * B)


@dataclass(frozen=True)
class FlagRecord:
    chi: Character
    order: int
    t_min: float
    d2_min: float


@dataclass(frozen=True)
class ProblemSet:
    q: int
    B: int
    threshold: float
    flagged: tuple
    H: tuple
    index: int
    cosets: tuple
    records: tuple = ()

    @property
    def flagged_ids(self) -> list[str]:
        return [c.id for c in self.flagged]


def kernel_subgroup(group: CharacterGroup, chars) -> tuple[list[int], list[list[int]]]:
    """Joint kernel H of ``chars`` and the cosets of H, each sorted, by min representative."""
    units = group.reduced_residues
    if not chars:
        return [int(a) for a in units], [[int(a) for a in units]]
    ph = np.stack([c.phases(units) for c in chars], axis=1)
    labels, inverse = np.unique(ph, axis=0, return_inverse=True)
    inverse = np.ravel(inverse)
    classes = {}
    for a, lab in zip(units, inverse):
        classes.setdefault(int(lab), []).append(int(a))
    cosets = sorted(classes.values(), key=lambda c: c[0])
    zero = np.flatnonzero(np.all(labels == 0, axis=1))
    H = classes[int(zero[0])]
    return H, cosets


def problem_set(group: CharacterGroup, flagged, B: int, threshold: float, records=()) -> ProblemSet:
    """Assemble H, its cosets and the index from a given flagged list."""
    H, cosets = kernel_subgroup(group, list(flagged))
    ps = ProblemSet(group.q, B, threshold, tuple(flagged), tuple(H), 0, tuple(tuple(c) for c in cosets),
                    tuple(records))
    return ProblemSet(ps.q, B, threshold, ps.flagged, ps.H, subgroup_index(ps, group.phi), ps.cosets,
                      ps.records)


def subgroup_index(ps: ProblemSet, phi: int | None = None) -> int:
    """phi(q) / |H|; a non-divisor is a bug."""
    if phi is None:
        phi = sum(len(c) for c in ps.cosets)
    if phi % len(ps.H):
        raise InvariantError(f"|H| = {len(ps.H)} does not divide phi(q) = {phi}")
    return phi // len(ps.H)


def flag_problem_characters(group: CharacterGroup, alpha, y, u, B: int, table: PrimeTable, *,
                            threshold: float | None = None, threshold_scale: float = 1.0,
                            grid_step: float | None = None) -> ProblemSet:
    """Flag nonprincipal characters of order <= B with small twisted distance to 1.

    The minimum runs over |t| <= sqrt(q)/(2B); the default cutoff is
    ``threshold_scale * sqrt(u) / (40 B^2)``.
    """
    if B < 1:
        raise DomainError("B must be >= 1")
    if threshold is None:
        threshold = default_threshold(u, B, threshold_scale)
    step = grid_step if grid_step is not None else default_grid_step(y, B)
    Tmax = math.sqrt(group.q) / (2 * B)
    flagged, records = [], []
    for chi in group.characters():
        if chi.is_principal or chi.order > B:
            continue
        t, d2 = min_dist_over_t(chi, alpha, y, Tmax, step, table)
        records.append(FlagRecord(chi, chi.order, t, d2))
        if d2 <= threshold:
            flagged.append(chi)
    return problem_set(group, flagged, B, threshold, records)
