"""
Entry laws of Wigner matrices.

An `EntryLaw` is a symmetric, unit-variance distribution presented through its
log-Laplace transform ``L(x) = log E[exp(x ξ)]``.  Every builtin law is a finite
mixture of two kinds of components, which keeps ``L``, ``L'`` and exact
(tilted) samplers analytic:

``("normal", v)``
    centered Gaussian of variance ``v``; ``log E e^{xξ} = v x^2 / 2``.
``("pair", β)``
    symmetric pair of atoms at ``±β`` (``β = 0`` is an atom at zero);
    ``log E e^{xξ} = log cosh(β x)``.

Custom laws may instead supply ``L`` directly (and optionally a sampler).

The shape of ``ψ(x) = L(x)/x^2`` drives everything downstream:
``A = 2 sup ψ`` and ``B = 2 lim ψ(x)`` as ``x → ∞``, and `classify` places a
law into one of the regimes handled by `wigner_ldp.annealed`.
"""

from __future__ import annotations

import enum
import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy.special import logsumexp

from .errors import InvalidParameters, NonStableTail, TiltOutOfRange
from .numerics import DEFAULT_TOL, derivative, maximize_1d

__all__ = [
    "Component",
    "EntryLaw",
    "TailConstants",
    "LawClass",
    "LawClassification",
    "psi",
    "tail_constants",
    "classify",
    "diagnostic_grid",
    "sample",
    "sample_tilted",
    "gaussian",
    "rademacher",
    "sparse_gaussian",
    "gauss_rademacher_mix",
    "rademacher_mixture",
    "three_point",
    "builtin_laws",
    "law_from_spec",
    "CLASSIFICATION_MARGIN",
    "MONOTONE_TOL",
]

CLASSIFICATION_MARGIN = 1e-3
MONOTONE_TOL = 1e-9
PSI_SMALL_X = 1e-4
N_DIAGNOSTIC = 2048
_X_START = 50.0
_X_LIMIT = 1e6
_B_STABLE = 1e-6
_PARAM_TOL = 1e-12


def _logcosh(t: np.ndarray) -> np.ndarray:
    a = np.abs(t)
    return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)


@dataclass(frozen=True)
class Component:
    """One mixture component: ``kind`` is ``"normal"`` (scale = variance) or ``"pair"`` (scale = atom)."""

    weight: float
    kind: str
    scale: float

    def log_mgf(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "normal":
            return 0.5 * self.scale * x * x
        return _logcosh(self.scale * x)

    def mgf_minus_one(self, x: np.ndarray) -> np.ndarray:
        # accurate near x = 0, where log_mgf is small
        if self.kind == "normal":
            return np.expm1(0.5 * self.scale * x * x)
        return 2.0 * np.sinh(0.5 * self.scale * x) ** 2

    def dlog_mgf(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "normal":
            return self.scale * x
        return self.scale * np.tanh(self.scale * x)


@dataclass(frozen=True)
class TailConstants:
    """
    Sub-Gaussian constants of a law.

    Attributes
    ----------
    A : float
        ``2 sup ψ`` (at least 1 since ``ψ(0) = 1/2``).
    B : float
        ``2 lim ψ(x)`` as ``x → ∞``.
    m_star : float or None
        Interior maximizer of ψ when the maximum exceeds the tail value.
    psi_second_at_mstar : float or None
        ``ψ''(m_star)``.
    x_max : float
        Right end of the diagnostic grid.
    B_declared : bool
        Whether B came from the law's closed form rather than extrapolation.
    """

    A: float
    B: float
    m_star: float | None
    psi_second_at_mstar: float | None
    x_max: float
    B_declared: bool


class LawClass(enum.Enum):
    SHARP = "SharpSubGaussian"
    INCREASING_PSI = "IncreasingPsi"
    COMPACT_CASE = "CompactCase"
    UNCLASSIFIED = "Unclassified"

    def __str__(self) -> str:  # pragma: no cover - trivial
        return self.value


@dataclass(frozen=True)
class LawClassification:
    tag: LawClass
    evidence: dict


@dataclass(frozen=True, eq=False)
class EntryLaw:
    """
    Symmetric unit-variance entry law.

    Builtin constructors fill ``components``; custom laws fill ``L_func`` (and
    optionally ``L_prime_func``, ``sampler`` and ``support_bound``).  Instances
    are immutable; a private cache holds derived constants.

    Equality compares the kind, parameters and components, so a law rebuilt
    from its `spec` compares equal to the original.
    """

    name: str
    kind: str
    params: dict
    components: tuple[Component, ...] | None = None
    L_func: Callable | None = None
    L_prime_func: Callable | None = None
    sampler: Callable | None = None
    support_bound: float | None = None
    declared_B: float | None = None
    has_density: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def custom(
        cls,
        name: str,
        L: Callable,
        *,
        L_prime: Callable | None = None,
        sampler: Callable | None = None,
        support_bound: float | None = None,
        B: float | None = None,
        has_density: bool = False,
    ) -> "EntryLaw":
        """
        Law given by its log-Laplace transform.

        ``sampler(rng, size)`` draws untilted samples.  Tilted draws use
        rejection against the untilted law and therefore need a compact
        support ``|ξ| <= support_bound``.
        """
        return cls(
            name=name,
            kind="custom",
            params={},
            L_func=L,
            L_prime_func=L_prime,
            sampler=sampler,
            support_bound=support_bound,
            declared_B=B,
            has_density=has_density,
        )

    # -- identity ---------------------------------------------------------
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EntryLaw):
            return NotImplemented
        if self.kind == "custom" or other.kind == "custom":
            return self is other
        return self.kind == other.kind and self.params == other.params and self.components == other.components

    def __hash__(self) -> int:
        if self.kind == "custom":
            return id(self)
        return hash((self.kind, json.dumps(self.params, sort_keys=True)))

    def spec(self) -> dict:
        """JSON-compatible description, inverse of `law_from_spec`."""
        if self.kind == "custom":
            raise InvalidParameters("custom laws have no serializable specification")
        return {"kind": self.kind, **self.params}

    @property
    def support(self) -> str:
        if self.components is None:
            return "custom"
        kinds = {c.kind for c in self.components}
        if kinds == {"pair"}:
            return "discrete"
        if kinds == {"normal"}:
            return "whole-line"
        return "mixture"

    def discrete_points(self) -> list[tuple[float, float]] | None:
        """``(value, mass)`` atoms for purely discrete laws."""
        if self.support != "discrete":
            return None
        pts: dict[float, float] = {}
        for c in self.components:
            if c.scale == 0.0:
                pts[0.0] = pts.get(0.0, 0.0) + c.weight
            else:
                pts[c.scale] = pts.get(c.scale, 0.0) + 0.5 * c.weight
                pts[-c.scale] = pts.get(-c.scale, 0.0) + 0.5 * c.weight
        return sorted(pts.items())

    # -- transforms -------------------------------------------------------
    def _log_weights_and_mgf(self, x: np.ndarray) -> np.ndarray:
        return np.stack([math.log(c.weight) + c.log_mgf(x) for c in self.components])

    def L(self, x):
        """Log-Laplace transform (vectorized, overflow free)."""
        xa = np.asarray(x, dtype=float)
        if self.components is None:
            out = np.asarray(self.L_func(xa), dtype=float)
        else:
            lm = np.stack([c.log_mgf(xa) for c in self.components])
            with np.errstate(over="ignore", invalid="ignore"):
                small = np.log1p(sum(c.weight * c.mgf_minus_one(xa) for c in self.components))
            large = logsumexp(self._log_weights_and_mgf(xa), axis=0)
            out = np.where(np.max(lm, axis=0) < 0.5, small, large)
        return float(out) if out.ndim == 0 else out

    def L_prime(self, x):
        """Derivative of `L`; analytic for mixtures, finite differences otherwise."""
        xa = np.asarray(x, dtype=float)
        if self.components is not None:
            lw = self._log_weights_and_mgf(xa)
            p = np.exp(lw - logsumexp(lw, axis=0))
            out = np.sum(p * np.stack([c.dlog_mgf(xa) for c in self.components]), axis=0)
        elif self.L_prime_func is not None:
            out = np.asarray(self.L_prime_func(xa), dtype=float)
        else:
            out = np.vectorize(lambda t: derivative(self.L, t, 1))(xa)
        return float(out) if np.ndim(out) == 0 else out


def psi(law: EntryLaw, x):
    """``ψ(x) = L(x)/x^2``, with the exact value 1/2 for ``|x| <= 1e-4``."""
    xa = np.asarray(x, dtype=float)
    safe = np.where(np.abs(xa) > PSI_SMALL_X, xa, 1.0)
    out = np.where(np.abs(xa) > PSI_SMALL_X, np.asarray(law.L(safe)) / (safe * safe), 0.5)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Tail constants and classification
# ---------------------------------------------------------------------------


def _extrapolate_B(law: EntryLaw) -> tuple[float, float]:
    X = _X_START
    prev = psi(law, X)
    while X <= _X_LIMIT:
        nxt = psi(law, 2.0 * X)
        if math.isfinite(nxt) and abs(nxt - prev) <= _B_STABLE:
            return 2.0 * nxt, 2.0 * X
        X *= 2.0
        prev = nxt
    raise NonStableTail(f"psi did not stabilize for {law.name} up to x = {_X_LIMIT:g}")


def diagnostic_grid(law: EntryLaw) -> np.ndarray:
    """The 2048-point log-spaced grid on ``[1e-3, x_max]`` used for diagnostics."""
    return np.geomspace(1e-3, tail_constants(law).x_max, N_DIAGNOSTIC)


def tail_constants(law: EntryLaw) -> TailConstants:
    """
    Compute ``A``, ``B``, ``m*`` and ``ψ''(m*)`` (cached per law).

    B uses the law's closed form when declared, otherwise ``2 ψ(X)`` along
    ``X = 50, 100, 200, ...`` until two consecutive values agree within 1e-6.
    A is the larger of the refined grid maximum of ``2ψ`` and ``B``.

    Raises
    ------
    NonStableTail
        When the B extrapolation has not stabilized by ``X = 1e6``.
    """
    cached = law._cache.get("tail")
    if cached is not None:
        return cached
    if law.declared_B is not None:
        B, x_max, declared = float(law.declared_B), _X_START, True
    else:
        B, x_stable = _extrapolate_B(law)
        x_max, declared = max(_X_START, x_stable), False
    grid = np.geomspace(1e-3, x_max, N_DIAGNOSTIC)
    vals = psi(law, grid)
    i = int(np.argmax(vals))
    m_star = None
    psi2 = None
    best = max(float(vals[i]), 0.5)
    if 0 < i < grid.size - 1:
        m, v = maximize_1d(lambda t: psi(law, t), (grid[i - 1], grid[i + 1]), n_grid=33)
        best = max(best, v)
        if 2.0 * v > B + CLASSIFICATION_MARGIN:
            m_star = m
            psi2 = derivative(lambda t: psi(law, t), m, 2)
    A = max(2.0 * best, B, 1.0)
    tc = TailConstants(A=A, B=B, m_star=m_star, psi_second_at_mstar=psi2, x_max=x_max, B_declared=declared)
    law._cache["tail"] = tc
    return tc


def _count_local_maxima(vals: np.ndarray) -> int:
    d = np.diff(vals)
    s = np.sign(np.where(np.abs(d) <= 1e-13, 0.0, d))
    s = s[s != 0]
    return int(np.sum((s[:-1] > 0) & (s[1:] < 0)))


def classify(law: EntryLaw) -> LawClassification:
    """
    Regime of a law.

    ``SHARP`` when ``A = 1``; ``INCREASING_PSI`` when ``A = B`` within the
    classification margin and ψ never decreases by more than 1e-9 between
    neighbouring points of the diagnostic grid; ``COMPACT_CASE`` when
    ``B < A - margin`` with a single interior maximum ``m*`` and
    ``ψ''(m*) < 0``; ``UNCLASSIFIED`` otherwise.
    """
    cached = law._cache.get("class")
    if cached is not None:
        return cached
    tc = tail_constants(law)
    vals = psi(law, diagnostic_grid(law))
    d = np.diff(vals)
    violations = d < -MONOTONE_TOL
    evidence = {
        "A": tc.A,
        "B": tc.B,
        "m_star": tc.m_star,
        "psi_second_at_mstar": tc.psi_second_at_mstar,
        "monotonicity_violations": int(np.sum(violations)),
        "largest_decrease": float(max(0.0, -float(np.min(d)))),
        "local_maxima": _count_local_maxima(vals),
        "margin": CLASSIFICATION_MARGIN,
    }
    if tc.A <= 1.0 + MONOTONE_TOL:
        tag = LawClass.SHARP
    elif abs(tc.A - tc.B) <= CLASSIFICATION_MARGIN and not np.any(violations):
        tag = LawClass.INCREASING_PSI
    elif (
        tc.B < tc.A - CLASSIFICATION_MARGIN
        and tc.m_star is not None
        and evidence["local_maxima"] == 1
        and tc.psi_second_at_mstar < 0.0
    ):
        tag = LawClass.COMPACT_CASE
    else:
        tag = LawClass.UNCLASSIFIED
    out = LawClassification(tag=tag, evidence=evidence)
    law._cache["class"] = out
    return out


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _draw_mixture(law: EntryLaw, gamma: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    shape = gamma.shape
    # The three uniform/normal arrays are always drawn in this order, so a
    # zero tilt reproduces `sample` bit for bit.
    u = rng.random(shape)
    z = rng.standard_normal(shape)
    s = rng.random(shape)
    lw = np.stack([math.log(c.weight) + c.log_mgf(gamma) for c in law.components])
    probs = np.exp(lw - logsumexp(lw, axis=0))
    cum = np.cumsum(probs, axis=0)
    idx = np.sum(u[None, ...] >= cum[:-1], axis=0)
    out = np.empty(shape)
    for k, c in enumerate(law.components):
        sel = idx == k
        if not np.any(sel):
            continue
        g = gamma[sel]
        if c.kind == "normal":
            out[sel] = math.sqrt(c.scale) * z[sel] + c.scale * g
        else:
            p_plus = 0.5 * (1.0 + np.tanh(c.scale * g))
            out[sel] = np.where(s[sel] < p_plus, c.scale, -c.scale)
    return out


def _draw_custom(law: EntryLaw, gamma: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if law.sampler is None:
        raise InvalidParameters(f"law {law.name} has no sampler")
    shape = gamma.shape
    n = int(np.prod(shape, dtype=int))
    if not np.any(gamma):
        return np.asarray(law.sampler(rng, n), dtype=float).reshape(shape)
    if law.support_bound is None:
        raise InvalidParameters("tilted sampling of a custom law requires a compact support bound")
    g = gamma.reshape(-1)
    if not np.all(np.isfinite(np.asarray(law.L(g)))):
        raise TiltOutOfRange(f"L(gamma) is not finite for {law.name}")
    out = np.empty(n)
    todo = np.arange(n)
    for _ in range(10_000):
        if todo.size == 0:
            return out.reshape(shape)
        x = np.asarray(law.sampler(rng, todo.size), dtype=float)
        gt = g[todo]
        # envelope exp(γx) <= exp(|γ| b) on the support |x| <= b
        accept = np.log(rng.random(todo.size)) <= gt * x - np.abs(gt) * law.support_bound
        out[todo[accept]] = x[accept]
        todo = todo[~accept]
    raise TiltOutOfRange("rejection sampler acceptance rate too low for the requested tilt")


def sample(law: EntryLaw, rng: np.random.Generator, size=None):
    """Exact draw(s) from the law; a float when ``size`` is None."""
    return sample_tilted(law, 0.0 if size is None else np.zeros(size), rng)


def sample_tilted(law: EntryLaw, gamma, rng: np.random.Generator, size=None):
    """
    Exact draw(s) from ``exp(γx - L(γ)) μ(dx)``.

    ``gamma`` may be an array (one tilt per draw) or a scalar broadcast to
    ``size``.  Mixture weights are reweighted by the component Laplace
    transforms; a Gaussian component of variance ``v`` becomes ``N(vγ, v)``
    and a pair ``±β`` puts mass ``e^{βγ}/(2 cosh βγ)`` on ``+β``.
    """
    g = np.asarray(gamma, dtype=float)
    if size is not None:
        g = np.broadcast_to(g, np.shape(np.empty(size))).copy()
    if not np.all(np.isfinite(g)):
        raise TiltOutOfRange("tilt must be finite")
    out = _draw_mixture(law, g, rng) if law.components is not None else _draw_custom(law, g, rng)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Builtin laws
# ---------------------------------------------------------------------------


def _require(cond: bool, constraint: str) -> None:
    if not cond:
        raise InvalidParameters(f"constraint violated: {constraint}")


def _mixture(name: str, kind: str, params: dict, comps, declared_B: float, has_density: bool) -> EntryLaw:
    comps = tuple(Component(float(w), k, float(s)) for w, k, s in comps if w > 0.0)
    return EntryLaw(
        name=name,
        kind=kind,
        params=params,
        components=comps,
        declared_B=declared_B,
        has_density=has_density,
    )


def gaussian() -> EntryLaw:
    """Standard normal law, ``L(x) = x^2/2``."""
    return _mixture("gaussian", "gaussian", {}, [(1.0, "normal", 1.0)], 1.0, True)


def rademacher() -> EntryLaw:
    """Uniform law on ``{-1, +1}``, ``L(x) = log cosh x``."""
    return _mixture("rademacher", "rademacher", {}, [(1.0, "pair", 1.0)], 0.0, False)


def sparse_gaussian(p: float) -> EntryLaw:
    """
    ``ξ = ζ g / sqrt(p)`` with ``ζ ~ Bernoulli(p)`` and ``g`` standard normal.

    ``L(x) = log(p e^{x^2/(2p)} + 1 - p)``, so ``A = B = 1/p``.
    """
    p = float(p)
    _require(0.0 < p < 1.0, "p in (0,1)")
    return _mixture(
        f"sparse_gaussian(p={p:g})",
        "sparse_gaussian",
        {"p": p},
        [(p, "normal", 1.0 / p), (1.0 - p, "pair", 0.0)],
        1.0 / p,
        False,
    )


def gauss_rademacher_mix(a: float, b: float, bvar: float | None = None) -> EntryLaw:
    """
    Mixture ``a N(0, bvar) + (1 - a) Rademacher(b)``.

    ``L(x) = log(a e^{bvar x^2/2} + (1 - a) cosh(b x))``, with the unit-variance
    constraint ``a*bvar + (1 - a) b^2 = 1``.  When ``bvar`` is omitted it is
    solved from that constraint.
    """
    a, b = float(a), float(b)
    _require(0.0 < a < 1.0, "a in (0,1)")
    _require(b >= 0.0, "b >= 0")
    if bvar is None:
        bvar = (1.0 - (1.0 - a) * b * b) / a
    bvar = float(bvar)
    _require(bvar >= 0.0, "bvar >= 0")
    _require(abs(a * bvar + (1.0 - a) * b * b - 1.0) <= _PARAM_TOL, "a*bvar + (1-a)*b^2 = 1")
    return _mixture(
        f"gauss_rademacher_mix(a={a:g},b={b:g},bvar={bvar:g})",
        "gauss_rademacher_mix",
        {"a": a, "b": b, "bvar": bvar},
        [(a, "normal", bvar), (1.0 - a, "pair", b)],
        bvar,
        True,
    )


def rademacher_mixture(weights, atoms) -> EntryLaw:
    """
    ``Σ_i weights[i] * Rademacher(atoms[i])`` with ``Σ w = 1`` and ``Σ w β^2 = 1``.
    """
    w = [float(v) for v in weights]
    beta = [abs(float(v)) for v in atoms]
    _require(len(w) == len(beta) and len(w) > 0, "weights and atoms of equal nonzero length")
    _require(all(v >= 0.0 for v in w), "weights >= 0")
    _require(abs(sum(w) - 1.0) <= _PARAM_TOL, "sum(weights) = 1")
    _require(abs(sum(wi * bi * bi for wi, bi in zip(w, beta)) - 1.0) <= _PARAM_TOL, "sum(weights*atoms^2) = 1")
    label = ",".join(f"{wi:g}@{bi:g}" for wi, bi in zip(w, beta))
    return _mixture(
        f"rademacher_mixture({label})",
        "rademacher_mixture",
        {"weights": w, "atoms": beta},
        [(wi, "pair", bi) for wi, bi in zip(w, beta)],
        0.0,
        False,
    )


def three_point(p: float) -> EntryLaw:
    """
    Atoms ``±1/sqrt(p)`` with mass ``p/2`` each and ``0`` with mass ``1 - p``.

    ``L(x) = log(p (cosh(x/sqrt(p)) - 1) + 1)``; bounded support gives ``B = 0``.
    """
    p = float(p)
    _require(0.0 < p < 1.0, "p in (0,1)")
    return _mixture(
        f"three_point(p={p:g})",
        "three_point",
        {"p": p},
        [(p, "pair", 1.0 / math.sqrt(p)), (1.0 - p, "pair", 0.0)],
        0.0,
        False,
    )


_DEFAULT_MIXTURE_WEIGHTS = (0.05, 0.95)
_DEFAULT_MIXTURE_ATOMS = (3.0, math.sqrt(0.55 / 0.95))


def builtin_laws() -> dict[str, EntryLaw]:
    """One representative of every builtin family, keyed by family name."""
    return {
        "gaussian": gaussian(),
        "rademacher": rademacher(),
        "sparse_gaussian": sparse_gaussian(0.5),
        "gauss_rademacher_mix": gauss_rademacher_mix(0.6, 0.5, 1.5),
        "rademacher_mixture": rademacher_mixture(_DEFAULT_MIXTURE_WEIGHTS, _DEFAULT_MIXTURE_ATOMS),
        "three_point": three_point(0.2),
    }


_FACTORIES: dict[str, Callable[..., EntryLaw]] = {
    "gaussian": gaussian,
    "rademacher": rademacher,
    "sparse_gaussian": sparse_gaussian,
    "gauss_rademacher_mix": gauss_rademacher_mix,
    "rademacher_mixture": rademacher_mixture,
    "three_point": three_point,
}


def _parse_inline(text: str) -> dict:
    kind, _, rest = text.partition(":")
    spec: dict[str, Any] = {"kind": kind.strip()}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise InvalidParameters(f"malformed law parameter {item!r} (expected key=value)")
        parts = value.split("/")
        try:
            nums = [float(v) for v in parts]
        except ValueError as exc:
            raise InvalidParameters(f"law parameter {key} is not numeric: {value!r}") from exc
        spec[key.strip()] = nums if len(parts) > 1 or key.strip() in ("weights", "atoms") else nums[0]
    return spec


def law_from_spec(spec) -> EntryLaw:
    """
    Build a law from a spec.

    Accepts a mapping ``{"kind": ..., **params}``, a JSON string, a path to a
    JSON file, or an inline string such as ``"sparse_gaussian:p=0.5"`` or
    ``"rademacher_mixture:weights=0.05/0.95,atoms=3/0.7609"``.
    """
    if isinstance(spec, str):
        text = spec.strip()
        if text.startswith("{"):
            spec = json.loads(text)
        elif os.path.isfile(text):
            with open(text, encoding="utf-8") as fh:
                spec = json.load(fh)
        else:
            spec = _parse_inline(text)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidParameters("law spec must carry a 'kind'")
    params = dict(spec)
    kind = params.pop("kind")
    factory = _FACTORIES.get(kind)
    if factory is None:
        raise InvalidParameters(f"unknown law kind {kind!r}; known: {sorted(_FACTORIES)}")
    try:
        return factory(**params)
    except TypeError as exc:
        raise InvalidParameters(f"bad parameters for {kind}: {exc}") from exc
