"""Smooth cutoff weights, their Mellin transforms, and the inverse-Mellin contour.

The weight Phi is 1 on a plateau, 0 beyond its support, and on the transition
interval [a, a + eps] it is 1 - R((t - a)/eps), where R is the normalized
integral of the bump b(v) = exp(-1/(v(1 - v))).  Because Phi' is a rescaled
bump, every derivative of Phi is available in closed form through the Taylor
coefficients of b, and one integration by parts gives

    Phi^(s) = 1/(Z s) * int_0^1 b(v) (a + eps v)^s dv,      Z = int_0^1 b,

an integral over the transition interval only.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize

from .errors import DomainError, NumericError
from .saddle import log_L_principal, log_L_truncated, solve_alpha

K_MAX = 8

# 15-point Kronrod rule and its embedded 7-point Gauss rule on [-1, 1].
_XK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
GK_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
GK_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
_g = np.zeros(15)
_g[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])
G_WEIGHTS = _g


def bump(v):
    v = np.asarray(v, dtype=np.float64)
    inside = (v > 0) & (v < 1)
    vv = np.where(inside, v, 0.5)
    return np.where(inside, np.exp(-1.0 / (vv * (1.0 - vv))), 0.0)


def bump_derivatives(v, m: int) -> np.ndarray:
    """Rows 0..m hold b, b', ..., b^(m) at the points v.

    Uses the Taylor recurrence for exp(h) with h(v) = -1/v - 1/(1-v), whose
    Taylor coefficients are explicit.
    """
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    out = np.zeros((m + 1, v.size))
    b0 = bump(v)
    live = b0 > 0
    if not live.any():
        return out
    w = v[live]
    j = np.arange(1, m + 1)[:, None]
    h = -((-1.0) ** j) / w ** (j + 1) - 1.0 / (1.0 - w) ** (j + 1)
    e = np.zeros((m + 1, w.size))
    e[0] = b0[live]
    for n in range(1, m + 1):
        e[n] = sum(k * h[k - 1] * e[n - k] for k in range(1, n + 1)) / n
    fact = np.array([math.factorial(n) for n in range(m + 1)], dtype=np.float64)[:, None]
    out[:, live] = e * fact
    return out


@lru_cache(maxsize=None)
def _gl_rule(n: int, panels: int):
    x, w = np.polynomial.legendre.leggauss(n)
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@lru_cache(maxsize=None)
def bump_mass() -> float:
    nodes, weights = _gl_rule(30, 32)
    return float(np.sum(bump(nodes) * weights))


def ramp(v):
    """R(v) = int_0^v b / Z on [0, 1], with R = 0 below and 1 above."""
    v = np.asarray(v, dtype=np.float64)
    vc = np.clip(v, 0.0, 1.0)
    short = np.minimum(vc, 1.0 - vc)  # R(v) = 1 - R(1 - v)
    x, w = _gl_rule(30, 16)
    pts = np.multiply.outer(short, x)
    part = np.sum(bump(pts) * w, axis=-1) * short / bump_mass()
    return np.where(vc <= 0.5, part, 1.0 - part)


@dataclass(frozen=True)
class SmoothWeight:
    """C-infinity approximation to the indicator of [0, 1], from below or above."""

    side: str = "lower"
    epsilon: float = 0.05
    k_max: int = K_MAX

    def __post_init__(self):
        if self.side not in ("lower", "upper"):
            raise DomainError(f"side must be 'lower' or 'upper', got {self.side!r}")
        if not 0 < self.epsilon < 0.5:
            raise DomainError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        if self.k_max < 1:
            raise DomainError("k_max must be >= 1")

    @property
    def start(self) -> float:
        """Left end of the transition interval."""
        return 1.0 - self.epsilon if self.side == "lower" else 1.0

    @property
    def support_end(self) -> float:
        return self.start + self.epsilon

    def evaluate(self, t):
        t = np.asarray(t, dtype=np.float64)
        if np.any(t < 0):
            raise DomainError("the weight is defined for t >= 0")
        return 1.0 - ramp((t - self.start) / self.epsilon)

    def __call__(self, t):
        out = self.evaluate(t)
        return float(out) if out.ndim == 0 else out

    def derivative(self, t, k: int):
        """k-th derivative of the weight (k >= 1) at t."""
        v = (np.asarray(t, dtype=np.float64) - self.start) / self.epsilon
        d = bump_derivatives(np.ravel(v), k - 1)[k - 1].reshape(np.shape(v))
        return -d / (bump_mass() * self.epsilon**k)


def weight_eval(weight: SmoothWeight, t) -> float:
    return weight(t)


@dataclass
class MellinEvaluator:
    """Mellin transform of a weight, with the derivative norms behind its decay bound."""

    weight: SmoothWeight
    rtol: float = 1e-12
    atol: float = 1e-15
    max_panels: int = 1 << 14
    _norms: dict = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def _panels(self, s) -> int:
        # Oscillation of (a + eps v)^s across the transition, in radians.
        wt = self.weight
        phase = float(np.max(np.abs(np.imag(s)))) * math.log(wt.support_end / wt.start)
        return 4 + int(math.ceil(phase / 8.0))

    def _fixed(self, s, panels):
        wt = self.weight
        nodes, weights = _gl_rule(20, panels)
        bw = bump(nodes) * weights
        lt = np.log(wt.start + wt.epsilon * nodes)
        s = np.asarray(s, dtype=np.complex128)
        vals = np.exp(np.multiply.outer(s, lt)) @ bw
        return vals / (bump_mass() * s)

    def transform_with_error(self, s):
        """Phi^(s) and an error estimate from comparing two panel counts."""
        s = np.asarray(s, dtype=np.complex128)
        if np.any(s.real <= 0):
            raise DomainError("the Mellin transform is evaluated only for Re(s) > 0")
        panels = self._panels(s)
        coarse = self._fixed(s, panels)
        while True:
            fine = self._fixed(s, 2 * panels)
            err = np.abs(fine - coarse)
            if np.all(err <= np.maximum(self.atol, self.rtol * np.abs(fine))):
                break
            if 2 * panels >= self.max_panels:
                raise NumericError("Mellin quadrature did not converge", residual=float(np.max(err)))
            panels *= 2
            coarse = fine
        if fine.ndim == 0:
            return complex(fine), float(err)
        return fine, err

    def transform(self, s):
        return self.transform_with_error(s)[0]

    def _transform_fast(self, s):
        # Panel count sized from the largest |Im s|; agreement with the
        # error-checked path is covered by the tests.
        return self._fixed(s, self._panels(s))

    def derivative_norm(self, sigma: float, k: int) -> float:
        """M_k = int_0^oo |Phi^(k)(t)| t^(sigma + k - 1) dt, with the quadrature error added."""
        if not 1 <= k <= self.weight.k_max:
            raise DomainError(f"k must lie in [1, {self.weight.k_max}], got {k}")
        key = (float(sigma), int(k))
        with self._lock:
            if key in self._norms:
                return self._norms[key]
        wt = self.weight
        pieces = _sign_pieces(k - 1)

        def integral(panels):
            total = 0.0
            for lo, hi in zip(pieces[:-1], pieces[1:]):
                nodes, weights = _gl_rule(20, panels)
                v = lo + (hi - lo) * nodes
                d = bump_derivatives(v, k - 1)[k - 1]
                total += (hi - lo) * abs(np.sum(d * (wt.start + wt.epsilon * v) ** (sigma + k - 1) * weights))
            return total

        coarse, fine = integral(16), integral(32)
        m = (fine + abs(fine - coarse)) / (bump_mass() * wt.epsilon ** (k - 1))
        with self._lock:
            self._norms[key] = m
        return m

    def decay_bound(self, s, k: int) -> float:
        """M_k / |s (s+1) ... (s+k-1)|, an upper bound for |Phi^(s)|."""
        s = complex(s)
        if s.real <= 0:
            raise DomainError("Re(s) must be positive")
        prod = 1.0
        for j in range(k):
            prod *= abs(s + j)
        return self.derivative_norm(s.real, k) / prod

    def tail_integral_bound(self, sigma: float, T: float) -> float:
        """Upper bound for int_{|t| > T} |Phi^(sigma + it)| dt."""
        best = math.inf
        for k in range(2, self.weight.k_max + 1):
            # |s + j| >= |t| for every j, so the integrand is at most M_k t^-k.
            best = min(best, 2 * self.derivative_norm(sigma, k) * T ** (1 - k) / (k - 1))
        return best


def mellin_transform(ev: MellinEvaluator, s):
    return ev.transform(s)


def decay_bound(ev: MellinEvaluator, s, k: int) -> float:
    return ev.decay_bound(s, k)


@lru_cache(maxsize=None)
def _sign_pieces(m: int) -> tuple[float, ...]:
    # Breakpoints 0 < z_1 < ... < 1 at the sign changes of b^(m).
    grid = np.linspace(0.0, 1.0, 4001)[1:-1]
    d = bump_derivatives(grid, m)[m]
    nz = np.flatnonzero(d != 0)
    zeros = []
    for i, j in zip(nz[:-1], nz[1:]):
        if d[i] * d[j] < 0:
            f = lambda v: bump_derivatives(np.array([v]), m)[m, 0]
            zeros.append(optimize.brentq(f, grid[i], grid[j], xtol=1e-15, rtol=1e-15))
    return (0.0, *zeros, 1.0)


def _gk_integrate(f, lo, hi, *, tol_rel=1e-10, min_panels=1, max_panels=200_000):
    """Adaptive Gauss-Kronrod (7/15) quadrature of a vectorized complex integrand.

    Panels are refined until each one's Kronrod-Gauss gap is below its share
    of ``tol_rel`` times the largest integrand modulus seen, scaled by the
    interval length.  Returns (integral, error estimate).
    """
    if hi <= lo:
        return 0j, 0.0
    edges = np.linspace(lo, hi, min_panels + 1)
    todo = np.stack([edges[:-1], edges[1:]], axis=1)
    total, total_err, fmax = 0j, 0.0, 0.0
    length = hi - lo
    accepted = 0
    while todo.size:
        a, b = todo[:, 0], todo[:, 1]
        half = (b - a) / 2
        pts = (a + b)[:, None] / 2 + half[:, None] * GK_NODES[None, :]
        vals = f(pts.ravel()).reshape(pts.shape)
        fmax = max(fmax, float(np.max(np.abs(vals))))
        k = (vals @ GK_WEIGHTS) * half
        g = (vals @ G_WEIGHTS) * half
        err = np.abs(k - g)
        ok = err <= tol_rel * fmax * (b - a) / length * 0.5 + 1e-300
        total += complex(np.sum(k[ok]))
        total_err += float(np.sum(err[ok]))
        accepted += int(ok.sum())
        bad = todo[~ok]
        if accepted + 2 * len(bad) > max_panels:
            total += complex(np.sum(k[~ok]))
            total_err += float(np.sum(err[~ok]))
            raise NumericError("contour quadrature did not converge", residual=total_err)
        mid = bad.mean(axis=1)
        todo = np.concatenate([np.stack([bad[:, 0], mid], 1), np.stack([mid, bad[:, 1]], 1)])
    return total, total_err


@dataclass(frozen=True)
class ContourResult:
    value: complex
    quad_error: float
    tail_bound: float
    T: float
    alpha: float

    @property
    def error(self) -> float:
        return self.quad_error + self.tail_bound

    def __complex__(self):
        return complex(self.value)


class _Integrand:
    # g(t) = L(alpha+it, chi; y) x^(it) Phi^(alpha+it) / L(alpha, chi_0; y),
    # so that the contour value is x^alpha L(alpha, chi_0; y) / (2 pi) * int g.
    def __init__(self, x, y, chi, ev, table, alpha):
        self.logx = math.log(x)
        self.chi, self.ev, self.y, self.table, self.alpha = chi, ev, y, table, alpha
        self.log_l0 = log_L_principal(alpha, y, table, chi.group.q)
        self.log_scale = alpha * self.logx + self.log_l0

    def __call__(self, t):
        s = self.alpha + 1j * np.asarray(t, dtype=np.float64)
        logl = log_L_truncated(s, self.chi, self.y, self.table)
        return np.exp(logl - self.log_l0 + 1j * t * self.logx) * self.ev._transform_fast(s)

    def symmetric(self, t):
        return self(t) + self(-t)


def _min_panels(span, logx):
    # Roughly one panel per oscillation of x^(it).
    return max(1, int(math.ceil(span * logx / (2 * math.pi))))


def contour_segment(x, y, chi, ev: MellinEvaluator, t_lo, t_hi, table, alpha=None,
                    tol_rel=1e-10) -> ContourResult:
    """(1/2 pi) int_{t_lo}^{t_hi} L(alpha+it, chi; y) x^(alpha+it) Phi^(alpha+it) dt."""
    if alpha is None:
        alpha = solve_alpha(x, y, table)
    g = _Integrand(x, y, chi, ev, table, alpha)
    val, err = _gk_integrate(g, t_lo, t_hi, tol_rel=tol_rel,
                             min_panels=_min_panels(t_hi - t_lo, g.logx))
    scale = math.exp(g.log_scale) / (2 * math.pi)
    return ContourResult(val * scale, err * scale, 0.0, float(t_hi - t_lo), alpha)


def tail_bound(x, y, chi, ev: MellinEvaluator, T, table, alpha) -> float:
    """Bound for the part of the full contour integral with |t| > T."""
    log_scale = alpha * math.log(x) + log_L_principal(alpha, y, table, chi.group.q)
    return math.exp(log_scale) / (2 * math.pi) * ev.tail_integral_bound(alpha, T)


def default_truncation(x, y, chi, ev, table, alpha, rel=1e-3, T0=8.0, T_max=1e6):
    """Smallest doubling of T0 whose tail bound is below ``rel`` of the estimate at T0."""
    est = abs(contour_psi(x, y, chi, ev, T0, table, alpha=alpha).value)
    T = T0
    while T < T_max and tail_bound(x, y, chi, ev, T, table, alpha) >= rel * est:
        T *= 2
    return T


def contour_psi(x, y, chi, ev: MellinEvaluator, T, table, alpha=None, tol_rel=1e-10) -> ContourResult:
    """Truncated inverse-Mellin integral over |t| <= T on the line Re(s) = alpha.

    ``T=None`` picks the truncation from the decay bound.  The error estimate
    combines the quadrature error with a tail bound for |t| > T that uses
    |L(alpha+it, chi; y)| <= L(alpha, chi_0; y).
    """
    if alpha is None:
        alpha = solve_alpha(x, y, table)
    if T is None:
        T = default_truncation(x, y, chi, ev, table, alpha)
    if T < 0:
        raise DomainError("T must be nonnegative")
    if T == 0:
        return ContourResult(0j, 0.0, math.inf, 0.0, alpha)
    g = _Integrand(x, y, chi, ev, table, alpha)
    scale = math.exp(g.log_scale) / (2 * math.pi)
    tail = scale * ev.tail_integral_bound(alpha, T)
    val, err = _gk_integrate(g.symmetric, 0.0, T, tol_rel=tol_rel,
                             min_panels=_min_panels(T, g.logx))
    return ContourResult(val * scale, err * scale, tail, float(T), alpha)


def central_segment(x, y, chi, ev: MellinEvaluator, U, table, alpha=None) -> ContourResult:
    """The integral over |t| <= U / sqrt(log x log y), for 1 <= U <= sqrt(u)."""
    logx, logy = math.log(x), math.log(y)
    u = logx / logy
    if not 1 <= U <= math.sqrt(u):
        raise DomainError(f"U must lie in [1, sqrt(u)] = [1, {math.sqrt(u):.6g}], got {U}")
    Tc = U / math.sqrt(logx * logy)
    res = contour_psi(x, y, chi, ev, Tc, table, alpha=alpha)
    return ContourResult(res.value, res.quad_error, 0.0, Tc, res.alpha)
