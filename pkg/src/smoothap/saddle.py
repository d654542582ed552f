"""Saddle point of the smooth-number Mellin integral and the resulting estimate.

The saddle point alpha(x, y) is the root of

    sum_{p <= y, p !| q} log p / (p^alpha - 1) = log x,

whose left side is strictly decreasing in alpha with derivative -phi2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError, PoleError
from .primes import PrimeTable

XI_TOL = 1e-12
ALPHA_TOL = 1e-12
_MAX_ITER = 400


def solve_xi(u: float) -> float:
    """The positive root xi of e^xi = 1 + xi*u, for u > 1."""
    if not u > 1:
        raise DomainError(f"xi(u) needs u > 1, got {u}")
    # g(xi) = expm1(xi)/xi - u is increasing, g(0+) = 1 - u < 0.
    def g(t):
        return math.expm1(t) / t - u

    lo, hi = 0.0, max(1.0, 2.0 * math.log(u) + 2.0)
    while g(hi) < 0:
        lo, hi = hi, 2 * hi
    xi = 2.0 * (u - 1.0) if u < 1.5 else math.log(u * math.log(u) + 1.0) + 1.0
    if not lo < xi < hi:
        xi = 0.5 * (lo + hi)
    for _ in range(_MAX_ITER):
        res = math.expm1(xi) - xi * u
        if abs(res) <= XI_TOL * (1.0 + xi * u) * 0.5:
            return xi
        if res < 0:
            lo = xi
        else:
            hi = xi
        deriv = math.exp(xi) - u
        step = xi - res / deriv if deriv > 0 else None
        xi = step if step is not None and lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4 * math.ulp(hi):
            return xi
    raise NumericError(f"xi({u}) did not converge", residual=res)


def _logs_upto(y, table: PrimeTable, q: int = 1) -> np.ndarray:
    p = table.primes_upto(y)
    if q > 1:
        p = p[np.gcd(p, q) == 1]
    return np.log(p.astype(np.float64))


def saddle_sum(alpha, y, table: PrimeTable, q: int = 1) -> float:
    """sum_{p <= y, p !| q} log p / (p^alpha - 1)."""
    lp = _logs_upto(y, table, q)
    return float(np.sum(lp / np.expm1(alpha * lp)))


def saddle_residual(alpha, x, y, table: PrimeTable, q: int = 1) -> float:
    """Signed residual of the saddle-point equation at ``alpha``."""
    return saddle_sum(alpha, y, table, q) - math.log(x)


def solve_alpha(x, y, table: PrimeTable, q: int = 1) -> float:
    """Saddle point alpha(x, y) by guarded Newton inside a bisection bracket."""
    if not x > 1:
        raise DomainError(f"x must exceed 1, got {x}")
    if not y >= 2:
        raise DomainError(f"y must be >= 2, got {y}")
    if table.limit < math.floor(y):
        raise DomainError(f"prime table limit {table.limit} is below y={y}")
    lp = _logs_upto(y, table, q)
    if not lp.size:
        raise DomainError(f"no primes p <= {y} coprime to {q}")
    target = math.log(x)

    def f(a):
        em = np.expm1(a * lp)
        return float(np.sum(lp / em)) - target, float(-np.sum(lp * lp * (em + 1.0) / (em * em)))

    lo, hi = 1e-3, 2.0
    while f(lo)[0] < 0:
        hi, lo = lo, lo / 8
    while f(hi)[0] > 0:
        lo, hi = hi, 2 * hi
    a = 1.0 - solve_xi(math.log(x) / math.log(y)) / math.log(y) if x > y else 0.5 * (lo + hi)
    if not lo < a < hi:
        a = 0.5 * (lo + hi)
    tol = ALPHA_TOL * max(1.0, target)
    for _ in range(_MAX_ITER):
        r, d = f(a)
        if abs(r) <= tol:
            return a
        if r > 0:
            lo = a
        else:
            hi = a
        step = a - r / d
        a = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4 * math.ulp(hi):
            return a
    raise NumericError(f"alpha({x}, {y}) did not converge", residual=r)


def phi2(alpha, y, q: int, table: PrimeTable) -> float:
    """sum_{p <= y, p !| q} p^alpha (log p)^2 / (p^alpha - 1)^2."""
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    lp = _logs_upto(y, table, q)
    em = np.expm1(alpha * lp)
    return float(np.sum(lp * lp * (em + 1.0) / (em * em)))


def log_L_truncated(s, chi, y, table: PrimeTable) -> np.ndarray | complex:
    """Principal-branch log of prod_{p <= y} (1 - chi(p) p^-s)^-1.

    ``s`` may be an array; the result then has the same shape.
    """
    s_arr = np.asarray(s, dtype=np.complex128)
    if np.any(s_arr.real <= 0):
        raise DomainError("the truncated L-function is evaluated only for Re(s) > 0")
    p = table.primes_upto(y)
    cv = chi.values(p)
    keep = cv != 0
    p, cv = p[keep], cv[keep]
    lp = np.log(p.astype(np.float64))
    z = cv * np.exp(-np.multiply.outer(s_arr, lp))
    one_minus = 1.0 - z
    if np.any(one_minus == 0):
        raise PoleError("an Euler factor vanishes")
    out = -np.sum(np.log(one_minus), axis=-1)
    return complex(out) if out.ndim == 0 else out


def L_truncated(s, chi, y, table: PrimeTable):
    """prod_{p <= y} (1 - chi(p) p^-s)^-1, computed through its logarithm."""
    return np.exp(log_L_truncated(s, chi, y, table))


def log_L_principal(alpha, y, table: PrimeTable, q: int = 1) -> float:
    """log L(alpha, chi_0; y) with chi_0 mod q, for real alpha > 0."""
    lp = _logs_upto(y, table, q)
    return float(-np.sum(np.log1p(-np.exp(-alpha * lp))))


@dataclass(frozen=True)
class SaddleData:
    x: float
    y: float
    u: float
    alpha: float
    xi: float | None
    phi2: float
    logL: float
    q: int = 1

    def as_dict(self) -> dict:
        return {
            "x": self.x, "y": self.y, "q": self.q, "u": self.u, "alpha": self.alpha,
            "xi": self.xi, "phi2": self.phi2, "logL": self.logL,
        }


def saddle_data(x, y, table: PrimeTable, q: int = 1) -> SaddleData:
    alpha = solve_alpha(x, y, table, q)
    u = math.log(x) / math.log(y)
    xi = solve_xi(u) if u > 1 else None
    return SaddleData(
        x=x, y=y, u=u, alpha=alpha, xi=xi,
        phi2=phi2(alpha, y, q, table), logL=log_L_principal(alpha, y, table, q), q=q,
    )


def ht_log_estimate(x, y, weight, table: PrimeTable, q: int = 1) -> float:
    """Logarithm of the saddle-point estimate, assembled before exponentiating."""
    from .mellin import MellinEvaluator

    ev = weight if isinstance(weight, MellinEvaluator) else MellinEvaluator(weight)
    sd = saddle_data(x, y, table, q)
    m = ev.transform(sd.alpha).real
    return sd.alpha * math.log(x) + sd.logL + math.log(m) - 0.5 * math.log(2 * math.pi * sd.phi2)


def ht_estimate(x, y, weight, table: PrimeTable, q: int = 1) -> float:
    """x^alpha L(alpha, chi_0; y) Phi^(alpha) / sqrt(2 pi phi2).

    With ``q > 1`` the primes dividing q are dropped from L, phi2 and the
    saddle-point equation, which makes this the estimate for the smooth numbers
    coprime to q.
    """
    return math.exp(ht_log_estimate(x, y, weight, table, q))
