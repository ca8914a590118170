"""
Independent oracles used by the tests.

Nothing here calls the package's quadrature, root finder or interpolation
tables: Gibbs integrals go through `scipy.integrate.quad`, ``R`` is obtained
from the Legendre form ``R(C) = min_ζ (Cζ + G(ζ))`` on a dense ζ-grid with a
parabolic polish, and ``F`` from a dense α-grid.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate as sint

GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def _logaddexp(a: float, b: float) -> float:
    m = max(a, b)
    return m + math.log(math.exp(a - m) + math.exp(b - m))


def _logcosh(t: float) -> float:
    t = abs(t)
    return t + math.log1p(math.exp(-2.0 * t)) - math.log(2.0)


def closed_form_L(law):
    """Scalar log-Laplace transform written directly from each family's formula."""
    k, p = law.kind, law.params
    if k == "gaussian":
        return lambda x: 0.5 * x * x
    if k == "rademacher":
        return _logcosh
    if k == "sparse_gaussian":
        q = p["p"]
        return lambda x: _logaddexp(math.log(q) + x * x / (2 * q), math.log1p(-q))
    if k == "gauss_rademacher_mix":
        a, b, v = p["a"], p["b"], p["bvar"]
        return lambda x: _logaddexp(math.log(a) + 0.5 * v * x * x, math.log1p(-a) + _logcosh(b * x))
    if k == "three_point":
        q = p["p"]
        return lambda x: _logaddexp(math.log(q) + _logcosh(x / math.sqrt(q)), math.log1p(-q))
    if k == "rademacher_mixture":
        def L(x):
            out = -math.inf
            for w, b in zip(p["weights"], p["atoms"]):
                if w > 0:
                    out = _logaddexp(out, math.log(w) + _logcosh(b * x)) if out > -math.inf else math.log(w) + _logcosh(b * x)
            return out
        return L
    raise ValueError(f"no closed form for {k}")


def quad_big_g(law, zeta: float) -> float:
    """log ∫ exp(L(x) - ζ x^2) dx with scipy.integrate.quad."""
    Lc = closed_form_L(law)
    ell = lambda x: Lc(x) - zeta * x * x
    # locate the peak of the log-integrand on a coarse grid
    X = 1.0
    while ell(X) > -80.0 or ell(2 * X) > ell(X):
        X *= 2.0
    xs = np.linspace(0.0, X, 4001)
    vals = np.array([ell(x) for x in xs])
    i = int(np.argmax(vals))
    shift = float(vals[i])
    f = lambda x: math.exp(ell(x) - shift)
    pts = sorted({float(xs[i])} - {0.0, X})
    val, _ = sint.quad(f, 0.0, X, points=pts or None, limit=800, epsabs=0.0, epsrel=1e-13)
    return math.log(2.0 * val) + shift


class LegendreR:
    """R(C) = min over a ζ-grid of Cζ + G(ζ), polished by a parabola through three nodes."""

    def __init__(self, law, B: float, eps_min: float = 1e-4, eps_max: float = 1e4, n: int = 800):
        self.B_half = 0.5 * B
        self.zeta = self.B_half + np.geomspace(eps_min, eps_max, n)
        self.G = np.array([quad_big_g(law, z) for z in self.zeta])

    def __call__(self, C):
        C = np.atleast_1d(np.asarray(C, dtype=float))
        M = C[:, None] * self.zeta[None, :] + self.G[None, :]
        j = np.argmin(M, axis=1)
        if np.any((j == 0) | (j == self.zeta.size - 1)):
            raise RuntimeError("Legendre minimum at the edge of the ζ-grid")
        rows = np.arange(C.size)
        x0, x1, x2 = self.zeta[j - 1], self.zeta[j], self.zeta[j + 1]
        y0, y1, y2 = M[rows, j - 1], M[rows, j], M[rows, j + 1]
        # vertex of the Newton-form parabola y0 + d01 (x - x0) + a (x - x0)(x - x1)
        d01 = (y1 - y0) / (x1 - x0)
        d12 = (y2 - y1) / (x2 - x1)
        a = (d12 - d01) / (x2 - x0)
        xv = 0.5 * (x0 + x1) - d01 / (2.0 * a)
        yv = y0 + d01 * (xv - x0) + a * (xv - x0) * (xv - x1)
        return np.minimum(yv, y1)


def brute_k(theta: float, B: float, R, alpha):
    alpha = np.asarray(alpha, dtype=float)
    C = 4.0 * theta**2 * alpha * (1.0 - alpha)
    return (
        theta**2 * (alpha**2 + B * (1.0 - alpha) ** 2)
        + R(C)
        - 0.5 * np.log1p(-alpha)
        - math.log(2.0 * theta)
        - 0.5 * math.log(2.0 * math.pi)
        - 0.5
    )


def _golden_max(f, lo, hi, iters=60):
    c = hi - GOLD * (hi - lo)
    d = lo + GOLD * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - GOLD * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + GOLD * (hi - lo)
            fd = f(d)
    return max(fc, fd)


def brute_f_increasing(theta: float, B: float, R, n_alpha: int = 4096) -> float:
    """max(θ², sup_α K_θ(α)) on a dense α-grid with golden polishing of the best cell."""
    alphas = np.linspace(0.0, 1.0, n_alpha + 2)[1:-1]
    K = brute_k(theta, B, R, alphas)
    i = int(np.argmax(K))
    lo, hi = alphas[max(i - 1, 0)], alphas[min(i + 1, alphas.size - 1)]
    best = max(float(K[i]), _golden_max(lambda a: float(brute_k(theta, B, R, a)[0]), lo, hi))
    return max(theta**2, best)


def brute_f_compact(theta: float, A: float, n_alpha: int = 4096) -> float:
    """max(θ², sup_α V(α)) on a dense α-grid with golden polishing."""
    V = lambda a: theta**2 * (A - 1.0) * a * a + theta**2 + 0.5 * np.log1p(-a)
    alphas = np.linspace(0.0, 1.0, n_alpha + 2)[1:-1]
    vals = V(alphas)
    i = int(np.argmax(vals))
    lo, hi = alphas[max(i - 1, 0)], alphas[min(i + 1, alphas.size - 1)]
    best = max(float(vals[i]), _golden_max(lambda a: float(V(a)), lo, hi))
    return max(theta**2, best)


def log_potential_closed(x: float) -> float:
    """∫ log(x - y) σ(dy) in closed form for x >= 2."""
    r = math.sqrt(max(x * x - 4.0, 0.0))
    return x * x / 4.0 - 0.5 - x * r / 4.0 + math.log((x + r) / 2.0)


def j_closed(x: float, theta: float) -> float:
    g = (x - math.sqrt(max(x * x - 4.0, 0.0))) / 2.0
    if theta <= g / 2.0:
        return theta * theta
    return theta * x - 0.5 - 0.5 * math.log(2.0 * theta) - 0.5 * log_potential_closed(x)


def brute_rate(x: float, F, n_theta: int = 400) -> float:
    """sup over θ in [0, x] of J(x, θ) - F(θ): uniform grid plus golden polish of the best cell."""
    obj = lambda t: j_closed(x, t) - F(t)
    thetas = np.linspace(0.0, x, n_theta + 1)
    vals = np.array([obj(t) for t in thetas])
    i = int(np.argmax(vals))
    lo, hi = thetas[max(i - 1, 0)], thetas[min(i + 1, thetas.size - 1)]
    return max(float(vals[i]), _golden_max(obj, lo, hi))
