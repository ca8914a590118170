"""
Semicircle transforms, the limiting spherical integral and the GOE rate function.

Conventions: ``σ(dy) = (2π)^{-1} sqrt(4 - y^2) dy`` on ``[-2, 2]``;
``G_σ(x) = (x - sqrt(x^2 - 4))/2`` is its Stieltjes transform to the right of
the bulk and ``K_σ(z) = z + 1/z`` the inverse on ``(0, 1]``.

``J(x, θ)`` is the limit of ``N^{-1} log`` of the spherical integral of a matrix
whose spectrum is semicircular with top eigenvalue ``x``:

- ``J = θ^2`` for ``θ <= G_σ(x)/2``;
- ``J = θx - 1/2 - log(2θ)/2 - (1/2) ∫ log(x - y) σ(dy)`` above it.
"""

from __future__ import annotations

import math
import threading
from functools import lru_cache

import numpy as np

from .errors import OutOfDomain
from .numerics import DEFAULT_TOL, INFINITY, Marker, integrate, maximize_1d

__all__ = [
    "SemicircleConstants",
    "SEMICIRCLE",
    "g_sigma",
    "g_sigma_prime",
    "k_sigma",
    "semicircle_density",
    "semicircle_cdf",
    "log_potential",
    "j_sph",
    "i_goe",
    "i_goe_quadrature",
    "i_goe_variational",
]

EDGE = 2.0


def _check_edge(x: float, what: str) -> float:
    x = float(x)
    if not x >= EDGE:
        raise OutOfDomain(f"{what} requires x >= 2, got {x!r}")
    return x


def g_sigma(x: float) -> float:
    """Stieltjes transform ``(x - sqrt(x^2 - 4))/2`` for ``x >= 2``."""
    x = _check_edge(x, "g_sigma")
    # 2/(x + sqrt) avoids cancellation for large x
    return 2.0 / (x + math.sqrt(x * x - 4.0))


def g_sigma_prime(x: float) -> float:
    """``G_σ'(x) = (1 - x/sqrt(x^2 - 4))/2`` for ``x > 2``."""
    x = float(x)
    if not x > EDGE:
        raise OutOfDomain(f"g_sigma_prime requires x > 2, got {x!r}")
    r = math.sqrt(x * x - 4.0)
    return -g_sigma(x) / r


def k_sigma(z: float) -> float:
    """``z + 1/z`` for ``z > 0``."""
    z = float(z)
    if not z > 0.0:
        raise OutOfDomain(f"k_sigma requires z > 0, got {z!r}")
    return z + 1.0 / z


def semicircle_density(y):
    y = np.asarray(y, dtype=float)
    out = np.sqrt(np.clip(4.0 - y * y, 0.0, None)) / (2.0 * math.pi)
    return float(out) if out.ndim == 0 else out


def semicircle_cdf(x):
    """Closed-form CDF ``1/2 + x sqrt(4 - x^2)/(4π) + arcsin(x/2)/π``."""
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    out = 0.5 + x * np.sqrt(4.0 - x * x) / (4.0 * math.pi) + np.arcsin(0.5 * x) / math.pi
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _log_potential_quad(x: float) -> float:
    # y = 2 cos φ maps σ to (2/π) sin^2 φ dφ on [0, π]; near the edge
    # x - y = (x - 2) + 4 sin^2(φ/2) behaves like t^2 with t = φ, so the
    # logarithmic singularity at x = 2 is damped by sin^2 φ.
    def f(phi):
        s = np.sin(phi)
        gap = (x - EDGE) + 4.0 * np.sin(0.5 * phi) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.log(gap) * (2.0 / math.pi) * s * s
        return np.where(s * s > 0.0, val, 0.0)

    return integrate(f, (0.0, math.pi), DEFAULT_TOL)


class SemicircleConstants:
    """Edge location and the cached log-potential at the edge."""

    edge = EDGE

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._edge_value: float | None = None

    @property
    def log_potential_at_edge(self) -> float:
        if self._edge_value is None:
            with self._lock:
                if self._edge_value is None:
                    self._edge_value = _log_potential_quad(EDGE)
        return self._edge_value

    def recompute_edge(self) -> float:
        return _log_potential_quad(EDGE)


SEMICIRCLE = SemicircleConstants()


@lru_cache(maxsize=4096)
def _log_potential_cached(x: float) -> float:
    return _log_potential_quad(x)


def log_potential(x: float) -> float:
    """``∫ log(x - y) σ(dy)`` by quadrature, for ``x >= 2``."""
    x = _check_edge(x, "log_potential")
    if x == EDGE:
        return SEMICIRCLE.log_potential_at_edge
    return _log_potential_cached(x)


def j_sph(x: float, theta):
    """
    Limiting spherical integral ``J(x, θ)``.

    ``theta`` may be an array; the branch test ``θ <= G_σ(x)/2`` is exact.
    """
    x = _check_edge(x, "j_sph")
    th = np.asarray(theta, dtype=float)
    if np.any(th < 0.0):
        raise OutOfDomain("j_sph requires theta >= 0")
    thr = 0.5 * g_sigma(x)
    lp = log_potential(x)
    safe = np.where(th > thr, th, 1.0)
    upper = safe * x - 0.5 - 0.5 * np.log(2.0 * safe) - 0.5 * lp
    out = np.where(th <= thr, th * th, upper)
    return float(out) if out.ndim == 0 else out


def i_goe(x: float) -> float | Marker:
    """
    GOE rate function ``x sqrt(x^2-4)/4 - log((x + sqrt(x^2-4))/2)``.

    Returns the `INFINITY` marker for ``x < 2``.
    """
    x = float(x)
    if x < EDGE:
        return INFINITY
    r = math.sqrt(x * x - 4.0)
    return 0.25 * x * r - math.log(0.5 * (x + r))


def i_goe_quadrature(x: float) -> float:
    """``(1/2) ∫_2^x sqrt(y^2 - 4) dy`` by adaptive quadrature."""
    x = _check_edge(x, "i_goe_quadrature")
    if x == EDGE:
        return 0.0
    return 0.5 * integrate(lambda y: np.sqrt(np.clip(y * y - 4.0, 0.0, None)), (EDGE, x))


def i_goe_variational(x: float) -> float:
    """``sup_{θ in [0, x]} J(x, θ) - θ^2`` by `maximize_1d` (consistency oracle)."""
    x = _check_edge(x, "i_goe_variational")
    _, v = maximize_1d(lambda t: j_sph(x, t) - np.asarray(t) ** 2, (0.0, x))
    return v
