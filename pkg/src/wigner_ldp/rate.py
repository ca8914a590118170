"""
Rate function of the largest eigenvalue.

``I(x) = sup_{θ >= 0} J(x, θ) - F(θ)`` with ``J`` the limiting spherical
integral and ``F`` the annealed one.  The supremum is restricted to
``[0, x]``: ``J(x, θ) <= θx`` and ``F(θ) >= θ²`` make the objective negative
beyond ``x``, while ``I(x) >= 0``.

``F`` is memoized per law on a fixed θ-lattice of step `THETA_STEP`, so a
curve over many ``x`` reuses the same evaluations; only the golden-section
polish around the best lattice point adds new ones.
"""

from __future__ import annotations

import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .annealed import FProfile, f_value, theta_zero
from .errors import WrongRegime
from .freeprob import EDGE, i_goe, j_sph
from .laws import MONOTONE_TOL, EntryLaw, LawClass, TailConstants, classify, tail_constants
from .numerics import DEFAULT_TOL, INFINITY, Marker, maximize_1d

__all__ = [
    "THETA_STEP",
    "RatePoint",
    "RateCurve",
    "UniquenessReport",
    "f_memo",
    "rate_point",
    "rate_curve",
    "goe_window",
    "theta_star_uniqueness_report",
    "x_mu_proxy",
    "worker_count",
]

THETA_STEP = 1.0 / 32.0
NEAR_MAX_TOL = 1e-6
SPREAD_FLAG = 1e-3


@dataclass(frozen=True)
class RatePoint:
    """
    One value of the rate function.

    ``validity`` is false when an ``F`` value near the maximizer is outside the
    proven regimes; the value is then still an upper bound.
    """

    x: float
    value: float | Marker
    theta_star: float
    validity: bool


@dataclass(frozen=True)
class RateCurve:
    law_name: str
    tail: TailConstants
    points: tuple[RatePoint, ...]
    goe_reference: np.ndarray

    @property
    def xs(self) -> np.ndarray:
        return np.array([p.x for p in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([float(p.value) for p in self.points])


@dataclass(frozen=True)
class UniquenessReport:
    """Near-maximizers of ``θ ↦ J(x, θ) - F(θ)`` on a uniform grid."""

    x: float
    theta_best: float
    count: int
    clusters: int
    spread: float
    flagged: bool


def worker_count(requested: int | None = None) -> int:
    """Requested worker count, capped by the ``WIGNER_LDP_THREADS`` environment variable."""
    n = requested if requested is not None else 1
    cap = os.environ.get("WIGNER_LDP_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, n)


class _FMemo:
    def __init__(self, law: EntryLaw):
        self.law = law
        self._lock = threading.Lock()
        self._store: dict[float, FProfile] = {}

    def profile(self, theta: float) -> FProfile:
        key = float(theta)
        prof = self._store.get(key)
        if prof is None:
            prof = f_value(self.law, key, exact_zeta=False)
            with self._lock:
                self._store.setdefault(key, prof)
        return prof

    def values(self, thetas) -> np.ndarray:
        return np.array([self.profile(t).value for t in np.atleast_1d(thetas)])


def f_memo(law: EntryLaw) -> _FMemo:
    """Per-law memo of `f_value` (thread-safe, stored on the law)."""
    memo = law._cache.get("f_memo")
    if memo is None:
        lock = law._cache.setdefault("f_memo_lock", threading.Lock())
        with lock:
            memo = law._cache.get("f_memo")
            if memo is None:
                memo = _FMemo(law)
                law._cache["f_memo"] = memo
    return memo


def _check_law(law: EntryLaw, allow_upper_bound: bool) -> None:
    if classify(law).tag is LawClass.UNCLASSIFIED and not allow_upper_bound:
        raise WrongRegime(
            f"{law.name} is unclassified; only an upper bound on the rate is available (allow_upper_bound=True)"
        )


def _lattice(x: float) -> np.ndarray:
    k = int(math.floor(x / THETA_STEP))
    grid = THETA_STEP * np.arange(k + 1)
    if grid[-1] < x:
        grid = np.append(grid, x)
    return grid


def _objective(memo: _FMemo, x: float):
    def obj(t):
        t = np.asarray(t, dtype=float)
        return j_sph(x, t) - (memo.values(t) if t.ndim else memo.profile(float(t)).value)

    return obj


def rate_point(law: EntryLaw, x: float, *, allow_upper_bound: bool = False) -> RatePoint:
    """
    ``I(x)`` by maximizing ``J(x, θ) - F(θ)`` over ``θ in [0, x]``.

    Returns the `INFINITY` marker for ``x < 2``.  Unclassified laws raise
    `WrongRegime` unless ``allow_upper_bound`` is set, in which case ``F`` is
    replaced by its lower bound ``θ²`` and the result is an upper bound.
    """
    x = float(x)
    if x < EDGE:
        return RatePoint(x, INFINITY, math.nan, True)
    _check_law(law, allow_upper_bound)
    memo = f_memo(law)
    grid = _lattice(x)
    t_star, v = maximize_1d(_objective(memo, x), (0.0, x), DEFAULT_TOL, grid=grid)
    v = max(v, 0.0)
    i = int(np.clip(np.searchsorted(grid, t_star), 1, grid.size - 1))
    near = [t_star, grid[i - 1], grid[i]]
    validity = all(memo.profile(t).validity for t in near)
    return RatePoint(x, float(v), float(t_star), validity)


def rate_curve(
    law: EntryLaw, x_grid, *, workers: int | None = None, allow_upper_bound: bool = False
) -> RateCurve:
    """Rate function on a strictly increasing grid, with the GOE rate alongside."""
    xs = np.asarray(x_grid, dtype=float)
    if xs.ndim != 1 or np.any(np.diff(xs) <= 0.0):
        raise ValueError("x_grid must be strictly increasing")
    _check_law(law, allow_upper_bound)
    n = worker_count(workers)
    run = lambda x: rate_point(law, x, allow_upper_bound=allow_upper_bound)
    if n > 1 and xs.size > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            points = tuple(pool.map(run, xs))
    else:
        points = tuple(run(x) for x in xs)
    goe = np.array([float(i_goe(x)) for x in xs])
    return RateCurve(law.name, tail_constants(law), points, goe)


def goe_window(law_or_A: EntryLaw | float) -> tuple[float, float] | None:
    """
    ``[2, sqrt(A-1) + 1/sqrt(A-1)]`` for ``1 < A < 2``, where the rate equals the GOE one.

    ``A`` within `MONOTONE_TOL` of 1 counts as sharp (the rate is GOE everywhere)
    and gives None, matching `classify`.
    """
    A = tail_constants(law_or_A).A if isinstance(law_or_A, EntryLaw) else float(law_or_A)
    if not 1.0 + MONOTONE_TOL < A < 2.0:
        return None
    s = math.sqrt(A - 1.0)
    return EDGE, s + 1.0 / s


def theta_star_uniqueness_report(law: EntryLaw, x: float, n_grid: int = 1024) -> UniquenessReport:
    """
    Scan ``θ ↦ J(x, θ) - F(θ)`` on ``n_grid`` points of ``[0, x]``.

    Near-maximizers are grid points within 1e-6 of the grid maximum.  The
    report is flagged when they form several clusters or spread over more than
    ``max(1e-3, 2h)`` with ``h`` the grid step (a single smooth peak may cover
    two adjacent grid points).
    """
    x = float(x)
    memo = f_memo(law)
    thetas = np.linspace(0.0, x, n_grid)
    vals = j_sph(x, thetas) - memo.values(thetas)
    best = float(np.max(vals))
    near = vals >= best - NEAR_MAX_TOL
    idx = np.flatnonzero(near)
    clusters = int(1 + np.count_nonzero(np.diff(idx) > 1))
    spread = float(thetas[idx[-1]] - thetas[idx[0]])
    h = thetas[1] - thetas[0]
    flagged = clusters > 1 or spread > max(SPREAD_FLAG, 2.0 * h)
    return UniquenessReport(x, float(thetas[int(np.argmax(vals))]), int(idx.size), clusters, spread, flagged)


def x_mu_proxy(law: EntryLaw, x_grid) -> float | None:
    """
    Smallest grid ``x`` whose maximizer exceeds ``θ0`` with a clean uniqueness report.

    An operational stand-in for the threshold beyond which the upper bound is
    known to be the rate; ``None`` for sharp laws or when no grid point
    qualifies.
    """
    t0 = theta_zero(law)
    if t0 is INFINITY:
        return None
    for x in np.asarray(x_grid, dtype=float):
        if x <= EDGE:
            continue
        p = rate_point(law, x)
        if p.theta_star > t0 and not theta_star_uniqueness_report(law, x).flagged:
            return float(x)
    return None
