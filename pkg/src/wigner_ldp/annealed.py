"""
The limiting annealed spherical integral ``F(θ)``.

Three regimes are handled:

small θ
    ``F(θ) = θ^2`` whenever ``θ <= 1/(2 sqrt(A - 1))``, for every law.
increasing ψ (``A = B``)
    ``F(θ) = max(θ^2, sup_{α in (0,1)} K_θ(α))`` with
    ``K_θ(α) = θ^2(α^2 + B(1-α)^2) + R(4θ^2 α(1-α)) - log(1-α)/2 - log(2θ) - log(2π)/2 - 1/2``
    where ``R(C) = C ζ_C + G(ζ_C)``, ``G(ζ) = log ∫ exp(L(x) - ζx^2) dx`` and
    ``G'(ζ_C) = -C``.  The Gibbs quantities live in `GibbsSolver`.
compact case (``B < A``, unique interior maximum of ψ)
    ``F(θ) = sup_α V(α)`` with ``V(α) = θ^2(A-1)α^2 + θ^2 + log(1-α)/2``, which
    has an explicit maximizer.

`f_value` dispatches on the law's classification.  The profile it returns
records the regime, the optimizing α, the Gibbs parameter ζ and whether the
value is covered by the proven statements (``validity``).

Conventions for ``alpha_opt``: for increasing ψ it is the mass of the
delocalized (Gaussian) part, with ``1`` meaning fully delocalized; in the
compact case it is the mass carried by the localized part.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BPoly

from .errors import (
    BracketGrowthFailed,
    DivergentIntegrand,
    InvalidBracket,
    NonConvergent,
    NonStableTail,
    OutOfDomain,
    WrongRegime,
)
from .laws import EntryLaw, LawClass, classify, tail_constants
from .numerics import DEFAULT_TOL, INFINITY, Marker, Tolerances, derivative, find_root, integrate, maximize_1d

__all__ = [
    "FRegime",
    "FProfile",
    "GibbsSolver",
    "small_theta_threshold",
    "compact_v",
    "compact_closed_form",
    "compact_validity_threshold",
    "f_increasing",
    "f_compact",
    "f_value",
    "theta_zero",
    "kink_at_theta_zero",
]

_LOG_2PI = math.log(2.0 * math.pi)
_ALPHA_EDGE = 1e-12
_THETA0_MARGIN = 1e-7
_K_PRIME_CHECK = 1e-5


class FRegime(enum.Enum):
    SMALL_THETA = "SmallTheta"
    INCREASING_STRUCTURED = "IncreasingPsiStructured"
    INCREASING_GRID = "IncreasingPsiGrid"
    COMPACT_EXPLICIT = "CompactExplicit"
    COMPACT_GRID = "CompactGrid"
    UPPER_BOUND_ONLY = "UpperBoundOnly"

    def __str__(self) -> str:  # pragma: no cover - trivial
        return self.value


@dataclass(frozen=True)
class FProfile:
    """
    Evaluation record of ``F(θ)``.

    ``upper`` is set for laws outside the handled regimes, where only the
    bracket ``θ^2 <= F(θ) <= A θ^2`` is known and ``value`` holds the lower end.
    """

    theta: float
    value: float
    regime: FRegime
    alpha_opt: float | None = None
    zeta_opt: float | None = None
    validity: bool = True
    upper: float | None = None


def small_theta_threshold(A: float) -> float:
    """``1/(2 sqrt(A - 1))``; infinite for ``A <= 1``."""
    return math.inf if A <= 1.0 else 0.5 / math.sqrt(A - 1.0)


# ---------------------------------------------------------------------------
# Gibbs solver
# ---------------------------------------------------------------------------


class GibbsSolver:
    """
    ``G``, ``G'``, ``l``, ``ζ_C`` and ``R`` for one law.

    The ``big_g``/``big_g_prime``/``zeta_of_c``/``r_of_c`` methods are exact
    (quadrature plus root finding).  Bulk evaluations inside α-optimizations go
    through `r_fast`/`zeta_fast`, a quintic Hermite table of
    ``S(v) = R(e^v) - (B/2) e^v`` against ``v = log C`` built from ~350
    quadrature nodes equispaced in ``u = log(ζ - B/2)``.  At each node the
    exact relations ``C = -G'(ζ)``, ``dS/dv = C(ζ - B/2)`` and
    ``d²S/dv² = C(ζ - B/2) - C²/G''(ζ)`` hold, so ``G'(ζ_node) = -C_node`` up to
    quadrature error.
    """

    U_MIN, U_MAX, U_STEP = -20.0, 24.0, 0.125

    def __init__(self, law: EntryLaw, tol: Tolerances | None = None):
        self.law = law
        self.tol = tol or DEFAULT_TOL
        tc = tail_constants(law)
        self.B = tc.B
        self.B_half = 0.5 * tc.B
        self._lock = threading.Lock()
        self._l: float | Marker | None = None
        self._g_boundary: float | None = None
        self._table: tuple | None = None

    @classmethod
    def for_law(cls, law: EntryLaw) -> "GibbsSolver":
        """Shared solver cached on the law (thread-safe lazy construction)."""
        solver = law._cache.get("solver")
        if solver is None:
            lock = law._cache.setdefault("solver_lock", threading.Lock())
            with lock:
                solver = law._cache.get("solver")
                if solver is None:
                    solver = cls(law)
                    law._cache["solver"] = solver
        return solver

    # -- quadrature -------------------------------------------------------
    def _peak(self, zeta: float) -> tuple[float, float]:
        L = self.law.L

        def ell(x):
            return np.asarray(L(x)) - zeta * np.asarray(x) ** 2

        X, best = 1.0, 0.0
        for _ in range(400):
            e1, e2 = float(ell(X)), float(ell(2.0 * X))
            if e1 < best - 60.0 and e2 < e1:
                break
            best = max(best, e1, e2)
            X *= 2.0
        else:
            raise DivergentIntegrand(f"exp(L(x) - {zeta} x^2) does not decay")
        xs = np.linspace(0.0, X, 2049)
        vals = ell(xs)
        i = int(np.argmax(vals))
        return float(xs[i]), float(vals[i])

    def moments(self, zeta: float) -> tuple[float, float, float]:
        """``(G(ζ), E x^2, E x^4)`` under the Gibbs density ``∝ exp(L(x) - ζx^2)``."""
        zeta = float(zeta)
        if not zeta > self.B_half:
            raise DivergentIntegrand(f"zeta={zeta} is not above B/2={self.B_half}")
        center, shift = self._peak(zeta)
        L = self.law.L

        def f(x):
            w = np.exp(np.asarray(L(x)) - zeta * x * x - shift)
            x2 = x * x
            return np.stack([w, w * x2, w * x2 * x2])

        i0, i2, i4 = integrate(f, "whole", self.tol, decay=zeta - self.B_half, center=center, even=True)
        return math.log(i0) + shift, i2 / i0, i4 / i0

    def big_g(self, zeta: float) -> float:
        """``G(ζ) = log ∫ exp(L(x) - ζ x^2) dx``; ``ζ = B/2`` is allowed when ``l`` is finite."""
        if float(zeta) == self.B_half and self.limit_l() is not INFINITY:
            return self.g_at_boundary()
        return self.moments(zeta)[0]

    def big_g_prime(self, zeta: float) -> float:
        """``G'(ζ) = -E x^2`` under the Gibbs density."""
        return -self.moments(zeta)[1]

    def big_g_second(self, zeta: float) -> float:
        """``G''(ζ) = Var(x^2)`` under the Gibbs density."""
        _, m2, m4 = self.moments(zeta)
        return m4 - m2 * m2

    def limit_l(self) -> float | Marker:
        """
        ``l = -lim G'(ζ)`` as ``ζ ↓ B/2``.

        Evaluated along ``ζ = B/2 + 2^{-k}``, ``k = 1..40``; the `INFINITY` marker
        is returned once the sequence exceeds 1e8.
        """
        if self._l is not None:
            return self._l
        prev = None
        result: float | Marker | None = None
        for k in range(1, 41):
            c = -self.big_g_prime(self.B_half + 2.0**-k)
            if c > 1e8:
                result = INFINITY
                break
            if prev is not None and abs(c - prev) <= 1e-5 * max(1.0, c):
                result = c
                break
            prev = c
        if result is None:
            raise NonStableTail(f"-G'(B/2 + eps) did not settle for {self.law.name}")
        self._l = result
        return result

    def g_at_boundary(self) -> float:
        """``G(B/2)`` for laws with finite ``l`` (limit along ``ζ = B/2 + 2^{-k}``)."""
        if self.limit_l() is INFINITY:
            raise DivergentIntegrand("G(B/2) diverges when l is infinite")
        if self._g_boundary is None:
            prev = None
            for k in range(1, 60):
                g = self.moments(self.B_half + 2.0**-k)[0]
                if prev is not None and abs(g - prev) <= 1e-9:
                    self._g_boundary = g
                    break
                prev = g
            else:
                raise NonConvergent("l is finite but G(B/2) did not converge")
        return self._g_boundary

    # -- Legendre dual ----------------------------------------------------
    def zeta_of_c(self, C: float) -> float:
        """Solution of ``G'(ζ) = -C`` above ``B/2``; ``B/2`` itself when ``C >= l``."""
        C = float(C)
        if not C > 0.0:
            raise OutOfDomain("zeta_of_c requires C > 0")
        l = self.limit_l()
        if l is not INFINITY and C >= l:
            return self.B_half

        def f(z):
            return self.big_g_prime(z) + C

        bracket = None
        if self._table is not None:
            eps = self.zeta_fast(C) - self.B_half
            for width in (1e-6, 1e-4, 1e-2):
                lo, hi = self.B_half + eps * (1.0 - width), self.B_half + eps * (1.0 + width)
                if f(lo) <= 0.0 <= f(hi):
                    bracket = (lo, hi)
                    break
        if bracket is None:
            # grow geometrically in ζ - B/2 from 1, toward whichever side holds the root
            lo = hi = self.B_half + 1.0
            if f(hi) < 0.0:
                for _ in range(200):
                    lo, hi = hi, self.B_half + 2.0 * (hi - self.B_half)
                    if f(hi) >= 0.0:
                        break
                else:
                    raise BracketGrowthFailed(f"no upper bracket for zeta_C at C={C}")
            else:
                for _ in range(60):
                    hi, lo = lo, self.B_half + 0.5 * (lo - self.B_half)
                    if f(lo) <= 0.0:
                        break
                else:
                    raise BracketGrowthFailed(f"no lower bracket for zeta_C at C={C}")
            bracket = (lo, hi)
        return find_root(f, bracket, self.tol)

    def r_of_c(self, C: float) -> float:
        """``R(C) = C ζ_C + G(ζ_C)`` (affine ``B C/2 + G(B/2)`` for ``C >= l``)."""
        C = float(C)
        l = self.limit_l()
        if l is not INFINITY and C >= l:
            return self.B_half * C + self.g_at_boundary()
        z = self.zeta_of_c(C)
        return C * z + self.big_g(z)

    # -- fast table -------------------------------------------------------
    def _build_table(self) -> tuple:
        us = np.arange(self.U_MIN, self.U_MAX + 0.5 * self.U_STEP, self.U_STEP)
        rows = np.array([self.moments(self.B_half + math.exp(u)) for u in us])
        G, C, m4 = rows[:, 0], rows[:, 1], rows[:, 2]
        G2 = m4 - C * C
        eps = np.exp(us)
        order = np.argsort(np.log(C))
        v = np.log(C)[order]
        keep = np.concatenate([[True], np.diff(v) > 0.0])
        idx = order[keep]
        v = np.log(C[idx])
        S = C[idx] * eps[idx] + G[idx]
        S1 = C[idx] * eps[idx]
        S2 = S1 - C[idx] ** 2 / G2[idx]
        poly = BPoly.from_derivatives(v, np.column_stack([S, S1, S2]))
        return v, S, S1, poly, poly.derivative(), C[idx], self.B_half + eps[idx]

    def _ensure_table(self) -> tuple:
        if self._table is None:
            with self._lock:
                if self._table is None:
                    self._table = self._build_table()
        return self._table

    def table_nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """``(C, ζ_C)`` pairs stored in the interpolation table."""
        t = self._ensure_table()
        return t[5].copy(), t[6].copy()

    def _s_and_slope(self, C):
        v_nodes, S, S1, poly, dpoly, _, _ = self._ensure_table()
        v = np.log(C)
        lo, hi = v_nodes[0], v_nodes[-1]
        vin = np.clip(v, lo, hi)
        s = poly(vin)
        ds = dpoly(vin)
        s = np.where(v < lo, S[0] + S1[0] * (v - lo), s)
        ds = np.where(v < lo, S1[0], ds)
        s = np.where(v > hi, S[-1] + S1[-1] * (v - hi), s)
        ds = np.where(v > hi, S1[-1], ds)
        return s, ds

    def r_fast(self, C):
        """Table-based ``R(C)`` (vectorized)."""
        Ca = np.asarray(C, dtype=float)
        s, _ = self._s_and_slope(Ca)
        out = s + self.B_half * Ca
        l = self.limit_l()
        if l is not INFINITY:
            out = np.where(Ca >= l, self.B_half * Ca + self.g_at_boundary(), out)
        return float(out) if out.ndim == 0 else out

    def zeta_fast(self, C):
        """Table-based ``ζ_C`` (vectorized)."""
        Ca = np.asarray(C, dtype=float)
        _, ds = self._s_and_slope(Ca)
        out = self.B_half + ds / Ca
        l = self.limit_l()
        if l is not INFINITY:
            out = np.where(Ca >= l, self.B_half, out)
        return float(out) if out.ndim == 0 else out

    # -- K_θ --------------------------------------------------------------
    def k_theta(self, theta: float, alpha, exact: bool = False):
        """
        ``K_θ(α)`` (vectorized in α); ``K_θ(1) = θ^2``.

        ``exact=True`` evaluates ``R`` by quadrature and root finding instead of
        the interpolation table.
        """
        theta = float(theta)
        if not theta > 0.0:
            raise OutOfDomain("k_theta requires theta > 0")
        a = np.asarray(alpha, dtype=float)
        if np.any((a <= 0.0) | (a > 1.0)):
            raise OutOfDomain("k_theta requires alpha in (0, 1]")
        inner = a < 1.0
        aa = np.where(inner, a, 0.5)
        C = 4.0 * theta * theta * aa * (1.0 - aa)
        R = np.vectorize(self.r_of_c)(C) if exact else self.r_fast(C)
        K = (
            theta * theta * (aa * aa + self.B * (1.0 - aa) ** 2)
            + R
            - 0.5 * np.log1p(-aa)
            - math.log(2.0 * theta)
            - 0.5 * _LOG_2PI
            - 0.5
        )
        out = np.where(inner, K, theta * theta)
        return float(out) if out.ndim == 0 else out

    def k_theta_prime(self, theta: float, alpha: float) -> float:
        """``2θ²(α + B(α-1)) + 4θ² ζ_C (1-2α) + 1/(2(1-α))`` with ``C = 4θ²α(1-α)``."""
        a = float(alpha)
        t2 = theta * theta
        zeta = self.zeta_fast(4.0 * t2 * a * (1.0 - a))
        return 2.0 * t2 * (a + self.B * (a - 1.0)) + 4.0 * t2 * zeta * (1.0 - 2.0 * a) + 0.5 / (1.0 - a)


# ---------------------------------------------------------------------------
# F in the increasing-ψ regime
# ---------------------------------------------------------------------------


def _require(law: EntryLaw, tag: LawClass, what: str) -> None:
    got = classify(law).tag
    if got is not tag:
        raise WrongRegime(f"{what} needs a {tag.value} law; {law.name} is {got.value}")


def _alpha_grid() -> np.ndarray:
    return np.unique(
        np.concatenate([np.geomspace(1e-9, 0.5, 640), np.linspace(0.5, 1.0 - 1e-9, 385)])
    )


def _finish_increasing(solver, theta, alpha, cand, regime, exact_zeta) -> FProfile:
    t2 = theta * theta
    if cand <= t2:
        return FProfile(theta, t2, regime, alpha_opt=1.0, zeta_opt=None, validity=True)
    C = 4.0 * t2 * alpha * (1.0 - alpha)
    zeta = solver.zeta_of_c(C) if exact_zeta else solver.zeta_fast(C)
    return FProfile(theta, float(cand), regime, alpha_opt=float(alpha), zeta_opt=float(zeta), validity=True)


def _increasing_structured(solver: GibbsSolver, theta: float, exact_zeta: bool) -> FProfile:
    B = solver.B
    t2 = theta * theta
    disc = 1.0 - 1.0 / (t2 * (B - 1.0))
    alpha_minus = 0.5 * (1.0 - math.sqrt(disc))
    l = solver.limit_l()
    if l is not INFINITY and l <= 1.0 / (B - 1.0):
        alpha = alpha_minus
    else:
        hi = 0.5
        if l is not INFINITY and l < t2:
            hi = min(hi, 0.5 * (1.0 - math.sqrt(1.0 - l / t2)))

        def kprime(a):
            return derivative(lambda t: solver.k_theta(theta, t), a, 1, solver.tol)

        alpha = find_root(kprime, (alpha_minus, hi), solver.tol)
        check = solver.k_theta_prime(theta, alpha)
        if abs(check) > _K_PRIME_CHECK * max(1.0, t2):
            raise NonConvergent(f"analytic K' = {check:.3g} at the finite-difference critical point")
    cand = solver.k_theta(theta, alpha)
    return _finish_increasing(solver, theta, alpha, cand, FRegime.INCREASING_STRUCTURED, exact_zeta)


def _increasing_grid(solver: GibbsSolver, theta: float, exact_zeta: bool) -> FProfile:
    a, v = maximize_1d(lambda t: solver.k_theta(theta, t), (1e-9, 1.0 - 1e-9), solver.tol, grid=_alpha_grid())
    return _finish_increasing(solver, theta, a, v, FRegime.INCREASING_GRID, exact_zeta)


def f_increasing(law: EntryLaw, theta: float, *, method: str = "auto", exact_zeta: bool = True) -> FProfile:
    """
    ``F(θ)`` for a law with nondecreasing ψ.

    Parameters
    ----------
    method : {"auto", "structured", "grid"}
        ``structured`` locates the critical point of ``K_θ`` in
        ``[α_-, min(β_-, 1/2)]`` by root finding on a finite-difference ``K_θ'``
        (requires ``θ^2 (B-1) > 1``); ``grid`` maximizes ``K_θ`` over a
        1025-point α-grid with golden polishing.  ``auto`` tries the
        structured path and falls back to the grid.
    exact_zeta : bool
        Refine ``zeta_opt`` by exact root finding (``|G'(ζ) + C| <= 1e-8``).

    Raises
    ------
    WrongRegime
        When the law is not classified as increasing ψ.
    """
    _require(law, LawClass.INCREASING_PSI, "f_increasing")
    theta = float(theta)
    A = tail_constants(law).A
    if theta <= small_theta_threshold(A):
        return FProfile(theta, theta * theta, FRegime.SMALL_THETA, alpha_opt=1.0, validity=True)
    solver = GibbsSolver.for_law(law)
    structured_ok = theta * theta * (solver.B - 1.0) > 1.0
    if method == "structured" or (method == "auto" and structured_ok):
        if not structured_ok:
            raise WrongRegime("structured path needs θ²(B-1) > 1")
        try:
            return _increasing_structured(solver, theta, exact_zeta)
        except (InvalidBracket, NonConvergent):
            if method == "structured":
                raise
    elif method not in ("auto", "grid"):
        raise OutOfDomain(f"unknown method {method!r}")
    return _increasing_grid(solver, theta, exact_zeta)


# ---------------------------------------------------------------------------
# F in the compact case
# ---------------------------------------------------------------------------


def compact_v(theta: float, A: float, alpha):
    """``V(α) = θ²(A-1)α² + θ² + log(1-α)/2``."""
    a = np.asarray(alpha, dtype=float)
    out = theta * theta * (A - 1.0) * a * a + theta * theta + 0.5 * np.log1p(-a)
    return float(out) if out.ndim == 0 else out


def compact_closed_form(theta: float, A: float) -> tuple[float, float]:
    """
    ``(V(α+), α+)`` with ``α+ = (1 + s)/2`` and ``s = sqrt(1 - 1/(θ²(A-1)))``.

    The value is ``(θ²/4)(A-1)(1+s)² + θ² + log(1-s)/2 - log(2)/2``.
    """
    t = theta * theta * (A - 1.0)
    if t < 1.0:
        raise OutOfDomain("closed form needs θ²(A-1) >= 1")
    s = math.sqrt(1.0 - 1.0 / t)
    value = 0.25 * t * (1.0 + s) ** 2 + theta * theta + 0.5 * math.log1p(-s) - 0.5 * math.log(2.0)
    return value, 0.5 * (1.0 + s)


def _crossing_gap(t: float) -> float:
    s = math.sqrt(1.0 - 1.0 / t)
    return 0.25 * t * (1.0 + s) ** 2 + 0.5 * math.log1p(-s) - 0.5 * math.log(2.0)


# V(α+) - θ² depends on θ only through t = θ²(A-1); it vanishes at t = T_CROSS
T_CROSS = find_root(_crossing_gap, (1.0, 4.0))


def compact_validity_threshold(A: float) -> float:
    """Smallest θ with ``V(α+) >= θ²``, namely ``sqrt(T_CROSS/(A-1))``."""
    return math.sqrt(T_CROSS / (A - 1.0))


def _compact_grid_sup(theta: float, A: float, tol: Tolerances, lo: float = 0.0) -> tuple[float, float]:
    return maximize_1d(lambda a: compact_v(theta, A, a), (lo, 1.0 - 1e-15), tol)


def f_compact(law: EntryLaw, theta: float) -> FProfile:
    """
    ``F(θ) = max(θ², V(α+))`` for a compact-case law.

    The closed form is cross-checked against `maximize_1d` of ``V`` (agreement
    within 1e-8 is enforced).  ``validity`` is true from the crossing point
    `compact_validity_threshold` on.
    """
    _require(law, LawClass.COMPACT_CASE, "f_compact")
    theta = float(theta)
    A = tail_constants(law).A
    t2 = theta * theta
    valid = theta >= compact_validity_threshold(A)
    if t2 * (A - 1.0) < 1.0:
        _, v = _compact_grid_sup(theta, A, DEFAULT_TOL)
        return FProfile(theta, max(t2, v), FRegime.COMPACT_GRID, validity=False)
    cf, a_plus = compact_closed_form(theta, A)
    if cf >= t2:
        # V is convex up to its interior minimum and concave after, and α+ >= 1/2
        _, v = _compact_grid_sup(theta, A, DEFAULT_TOL, lo=0.5)
        if abs(v - cf) > 1e-8 * max(1.0, abs(cf)):
            raise NonConvergent(f"closed form {cf!r} and grid maximum {v!r} of V disagree")
    value = max(t2, cf)
    return FProfile(
        theta,
        value,
        FRegime.COMPACT_EXPLICIT,
        alpha_opt=a_plus if cf >= t2 else None,
        validity=valid,
    )


# ---------------------------------------------------------------------------
# Dispatcher and θ0
# ---------------------------------------------------------------------------


def f_value(law: EntryLaw, theta: float, *, exact_zeta: bool = True) -> FProfile:
    """
    ``F(θ)`` for any law, dispatched on `classify`.

    Sharp laws give ``θ²``.  Unclassified laws give ``θ²`` below the small-θ
    threshold and an upper-bound-only profile (``value = θ²``,
    ``upper = Aθ²``, ``validity = False``) above it.
    """
    theta = float(theta)
    if theta < 0.0:
        raise OutOfDomain("theta must be nonnegative")
    tag = classify(law).tag
    A = tail_constants(law).A
    t2 = theta * theta
    if tag is LawClass.SHARP or theta <= small_theta_threshold(A):
        return FProfile(theta, t2, FRegime.SMALL_THETA, alpha_opt=1.0, validity=True)
    if tag is LawClass.INCREASING_PSI:
        return f_increasing(law, theta, exact_zeta=exact_zeta)
    if tag is LawClass.COMPACT_CASE:
        if theta >= compact_validity_threshold(A):
            return f_compact(law, theta)
        _, v = _compact_grid_sup(theta, A, DEFAULT_TOL)
        return FProfile(theta, max(t2, v), FRegime.COMPACT_GRID, validity=False)
    return FProfile(theta, t2, FRegime.UPPER_BOUND_ONLY, validity=False, upper=A * t2)


def theta_zero(law: EntryLaw) -> float | Marker:
    """
    ``θ0 = inf{θ : F(θ) > θ²}`` by bisection on ``F(θ) > θ² + 1e-7``.

    Sharp laws return the `INFINITY` marker.  The initial bracket is
    ``[1/(2 sqrt(A-1)), 10 max(1, 1/sqrt(A-1))]``, doubled on the right until
    the predicate holds there.
    """
    tag = classify(law).tag
    if tag is LawClass.SHARP:
        return INFINITY
    if tag is LawClass.UNCLASSIFIED:
        raise WrongRegime("theta_zero needs an increasing-ψ or compact-case law")
    A = tail_constants(law).A

    def above(t: float) -> bool:
        return f_value(law, t, exact_zeta=False).value > t * t + _THETA0_MARGIN

    lo = small_theta_threshold(A)
    hi = 10.0 * max(1.0, 1.0 / math.sqrt(A - 1.0))
    for _ in range(30):
        if above(hi):
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise BracketGrowthFailed("F(θ) stayed at θ² along the bracket")
    while hi - lo > 1e-10 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if above(mid):
            hi = mid
        else:
            lo = mid
    return hi


def kink_at_theta_zero(law: EntryLaw, h: float = 1e-3) -> tuple[float, float]:
    """One-sided difference quotients of ``F`` at ``θ0`` (left, right)."""
    t0 = theta_zero(law)
    if t0 is INFINITY:
        raise WrongRegime("no θ0 for sharp laws")
    F = lambda t: f_value(law, t, exact_zeta=False).value
    f0 = F(t0)
    return (f0 - F(t0 - h)) / h, (F(t0 + h) - f0) / h
