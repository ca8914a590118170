"""
Scalar numerics shared by the rest of the package.

The routines here are deliberately small and predictable:

- `integrate`: vectorized adaptive Simpson quadrature on a finite interval or
  on the whole line (truncated using a caller supplied Gaussian decay rate).
- `find_root`: bracketed root finding (Brent's method from SciPy).
- `maximize_1d`: grid scan followed by golden-section polishing.  It makes no
  unimodality assumption and never returns less than the grid maximum.
- `derivative`: central differences with one level of Richardson extrapolation.
- `rng_stream`: counter-based Philox streams keyed by ``(seed, stream_id)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import DivergentIntegrand, InvalidBracket, InvalidParameters, NonConvergent

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "Marker",
    "INFINITY",
    "is_infinite",
    "integrate",
    "find_root",
    "maximize_1d",
    "derivative",
    "rng_stream",
]

_EPS = float(np.finfo(float).eps)
# log(1e18): the whole-line truncation radius is where exp(-c R^2) reaches 1e-18.
_LOG_TAIL = math.log(1e18)
_MASK64 = (1 << 64) - 1
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Tolerances:
    """
    Numerical tolerances used throughout the package.

    Parameters
    ----------
    quad_rel : float
        Target relative error of quadratures.
    root_abs : float
        Absolute bracket width at which root finding stops.
    opt_abs : float
        Width of the final golden-section interval in `maximize_1d`.
    fd_step : float
        Relative step of first-order finite differences.  Second-order
        differences use ``100 * fd_step``; the constructor rejects steps with
        ``fd_step**2 < machine epsilon`` since the rounding error of a second
        difference scales like ``eps / h**2``.
    """

    quad_rel: float = 1e-10
    root_abs: float = 1e-12
    opt_abs: float = 1e-9
    fd_step: float = 1e-5

    def __post_init__(self) -> None:
        for name in ("quad_rel", "root_abs", "opt_abs", "fd_step"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise InvalidParameters(f"Tolerances.{name} must be strictly positive, got {value!r}")
        if self.fd_step**2 < _EPS:
            raise InvalidParameters("Tolerances.fd_step**2 must be at least machine epsilon")


DEFAULT_TOL = Tolerances()


class Marker(enum.Enum):
    """Explicit non-numeric values that still serialize cleanly to CSV."""

    INFINITY = "inf"

    def __str__(self) -> str:  # pragma: no cover - trivial
        return self.value

    def __float__(self) -> float:
        return math.inf


INFINITY = Marker.INFINITY


def is_infinite(value) -> bool:
    """True for the `INFINITY` marker (and for float infinities)."""
    if value is INFINITY:
        return True
    return isinstance(value, float) and math.isinf(value)


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


def _eval_vec(f: Callable, x: np.ndarray) -> np.ndarray:
    """Evaluate ``f`` on ``x`` and return a 2-D array of shape (k, len(x))."""
    try:
        y = np.asarray(f(x), dtype=float)
    except (TypeError, ValueError):
        y = np.asarray([f(float(t)) for t in x], dtype=float).T
    if y.ndim == 0:
        y = np.full(x.shape, float(y))
    if y.shape[-1] != x.shape[0]:
        y = np.asarray([f(float(t)) for t in x], dtype=float).T
    if y.ndim == 1:
        y = y[None, :]
    return y


_MAX_PANELS = 1 << 20


def _adaptive_simpson(f, a: float, b: float, rel: float, max_depth: int, n0: int = 64) -> np.ndarray:
    xs = np.linspace(a, b, 2 * n0 + 1)
    fx = _eval_vec(f, xs)
    lo, hi = xs[0:-1:2], xs[2::2]
    fl, fm, fr = fx[:, 0:-1:2], fx[:, 1::2], fx[:, 2::2]
    h = hi - lo
    S = h / 6.0 * (fl + 4.0 * fm + fr)
    scale = np.sum(h / 6.0 * (np.abs(fl) + 4.0 * np.abs(fm) + np.abs(fr)), axis=1)
    abs_tol = rel * np.maximum(scale, 1e-300)
    width = b - a
    total = np.zeros(fx.shape[0])
    depth = 0
    while lo.size:
        if depth > max_depth:
            raise NonConvergent(f"adaptive Simpson exceeded depth {max_depth} on [{a}, {b}]")
        if lo.size > _MAX_PANELS:
            raise NonConvergent(f"adaptive Simpson needs more than {_MAX_PANELS} panels on [{a}, {b}]")
        mid = 0.5 * (lo + hi)
        x1 = 0.5 * (lo + mid)
        x2 = 0.5 * (mid + hi)
        n = lo.size
        f12 = _eval_vec(f, np.concatenate([x1, x2]))
        f1, f2 = f12[:, :n], f12[:, n:]
        half = 0.5 * h
        SL = half / 6.0 * (fl + 4.0 * f1 + fm)
        SR = half / 6.0 * (fm + 4.0 * f2 + fr)
        diff = SL + SR - S
        err = np.abs(diff)
        # width-proportional share with a floor: near an endpoint singularity
        # only O(1) panels per level hit the floor, so the total stays below abs_tol
        panel_tol = abs_tol[:, None] * np.maximum(h / width, 1.0 / 256.0)
        floor = 64.0 * _EPS * (np.abs(SL) + np.abs(SR))
        ok = np.all((err <= 15.0 * panel_tol) | (err <= floor), axis=0)
        if np.any(ok):
            total += np.sum((SL + SR + diff / 15.0)[:, ok], axis=1)
        keep = ~ok
        if not np.any(keep):
            break
        lo, hi = np.concatenate([lo[keep], mid[keep]]), np.concatenate([mid[keep], hi[keep]])
        fl, fm, fr = (
            np.concatenate([fl[:, keep], fm[:, keep]], axis=1),
            np.concatenate([f1[:, keep], f2[:, keep]], axis=1),
            np.concatenate([fm[:, keep], fr[:, keep]], axis=1),
        )
        S = np.concatenate([SL[:, keep], SR[:, keep]], axis=1)
        h = hi - lo
        depth += 1
    return total


def _truncation_radius(f, decay: float, center: float, even: bool) -> float:
    """Radius beyond which |f| stays below 1e-18 of its peak (checked, doubled if needed)."""
    R = abs(center) + math.sqrt(_LOG_TAIL / decay)
    for _ in range(40):
        probe = np.linspace(0.0 if even else -R, R, 1025)
        peak = np.max(np.abs(_eval_vec(f, probe)), axis=1)
        tail_x = np.linspace(R, 2.0 * R, 9)
        if not even:
            tail_x = np.concatenate([tail_x, -tail_x])
        tail = np.max(np.abs(_eval_vec(f, tail_x)), axis=1)
        if np.all(np.isfinite(tail)) and np.all(tail <= 1e-18 * np.maximum(peak, 1e-300)):
            return R
        R *= 2.0
    raise DivergentIntegrand("integrand does not decay on the whole line within the search radius")


def integrate(
    f: Callable,
    domain,
    tol: Tolerances | None = None,
    *,
    decay: float | None = None,
    center: float = 0.0,
    even: bool = False,
    max_depth: int = 60,
):
    """
    Adaptive Simpson quadrature.

    Parameters
    ----------
    f : callable
        Vectorized integrand.  It may return an array of shape ``(k, n)`` for
        ``n`` abscissae, in which case ``k`` integrals sharing the same
        refinement are returned.
    domain : (a, b) or "whole"
        Finite interval, or the string ``"whole"`` for the real line.
    tol : Tolerances, optional
        ``quad_rel`` sets the target relative error (relative to ``∫|f|``).
    decay : float
        Whole-line only: a rate ``c > 0`` with ``|f(x)| <~ exp(-c x^2)`` far out.
    center : float
        Whole-line only: location of the bulk of ``f`` (widens the radius).
    even : bool
        Whole-line only: integrate over ``[0, R]`` and double.

    Returns
    -------
    float or ndarray
    """
    tol = tol or DEFAULT_TOL
    if isinstance(domain, str):
        if domain != "whole":
            raise InvalidParameters(f"unknown domain {domain!r}")
        if decay is None or not decay > 0.0:
            raise InvalidParameters("whole-line integration needs a positive decay certificate")
        R = _truncation_radius(f, decay, center, even)
        if even:
            out = 2.0 * _adaptive_simpson(f, 0.0, R, tol.quad_rel, max_depth)
        else:
            out = _adaptive_simpson(f, -R, R, tol.quad_rel, max_depth)
    else:
        a, b = (float(v) for v in domain)
        if a == b:
            probe = _eval_vec(f, np.array([a]))
            out = np.zeros(probe.shape[0])
        elif a > b:
            out = -_adaptive_simpson(f, b, a, tol.quad_rel, max_depth)
        else:
            out = _adaptive_simpson(f, a, b, tol.quad_rel, max_depth)
    if out.shape[0] == 1:
        return float(out[0])
    return out


# ---------------------------------------------------------------------------
# Roots and maximization
# ---------------------------------------------------------------------------


def find_root(f: Callable[[float], float], bracket, tol: Tolerances | None = None) -> float:
    """
    Root of ``f`` inside ``bracket`` by Brent's method.

    Raises
    ------
    InvalidBracket
        When ``f(a)`` and ``f(b)`` share a sign (or are not finite).
    """
    tol = tol or DEFAULT_TOL
    a, b = (float(v) for v in bracket)
    fa, fb = float(f(a)), float(f(b))
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if not (math.isfinite(fa) and math.isfinite(fb)) or fa * fb > 0.0:
        raise InvalidBracket(f"f({a})={fa!r} and f({b})={fb!r} do not bracket a root")
    return float(brentq(f, a, b, xtol=tol.root_abs, rtol=4.0 * _EPS, maxiter=500))


def _scalar(f, x: float) -> float:
    v = float(f(x))
    return v if not math.isnan(v) else -math.inf


def maximize_1d(
    f: Callable,
    interval,
    tol: Tolerances | None = None,
    *,
    n_grid: int = 256,
    grid: np.ndarray | None = None,
) -> tuple[float, float]:
    """
    Heuristic global maximizer on an interval.

    A grid of ``n_grid`` points (or the supplied ``grid``) is scanned; the best
    cell and its two neighbours are then polished by golden-section search down
    to ``tol.opt_abs``.  Ties resolve to the leftmost grid point, and the
    returned value is never below the grid maximum.

    Returns
    -------
    (argmax, max)
    """
    tol = tol or DEFAULT_TOL
    a, b = (float(v) for v in interval)
    xs = np.linspace(a, b, n_grid) if grid is None else np.asarray(grid, dtype=float)
    vals = _eval_vec(f, xs)[0]
    vals = np.where(np.isnan(vals), -np.inf, vals)
    i = int(np.argmax(vals))
    best_x, best_v = float(xs[i]), float(vals[i])
    if xs.size < 2:
        return best_x, best_v
    lo = float(xs[max(i - 1, 0)])
    hi = float(xs[min(i + 1, xs.size - 1)])
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = _scalar(f, c), _scalar(f, d)
    for _ in range(200):
        if hi - lo <= tol.opt_abs:
            break
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = _scalar(f, c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = _scalar(f, d)
    for x, v in ((c, fc), (d, fd)):
        if v > best_v:
            best_x, best_v = x, v
    return best_x, best_v


def derivative(f: Callable[[float], float], x: float, order: int = 1, tol: Tolerances | None = None) -> float:
    """
    Central finite difference with one Richardson step.

    First derivatives use the step ``fd_step * max(1, |x|)``.  Second
    derivatives use ``100 * fd_step * max(1, |x|)`` so that the rounding error
    ``~ eps |f| / h^2`` stays near 1e-9 relative.
    """
    tol = tol or DEFAULT_TOL
    x = float(x)
    if order == 1:
        h = tol.fd_step * max(1.0, abs(x))

        def D(s):
            return (float(f(x + s)) - float(f(x - s))) / (2.0 * s)

    elif order == 2:
        h = 100.0 * tol.fd_step * max(1.0, abs(x))
        f0 = float(f(x))

        def D(s):
            return (float(f(x + s)) - 2.0 * f0 + float(f(x - s))) / (s * s)

    else:
        raise InvalidParameters("derivative order must be 1 or 2")
    return (4.0 * D(0.5 * h) - D(h)) / 3.0


def rng_stream(seed: int, stream_id: int) -> np.random.Generator:
    """
    Independent reproducible generator for ``(seed, stream_id)``.

    Both integers are reduced modulo 2**64 and packed into the 128-bit Philox
    key, so distinct pairs give distinct streams regardless of scheduling.
    """
    key = (int(seed) & _MASK64) | ((int(stream_id) & _MASK64) << 64)
    return np.random.Generator(np.random.Philox(key=key))
