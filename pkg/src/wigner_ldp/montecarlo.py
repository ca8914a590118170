"""
Wigner ensembles under the natural and the exponentially tilted measure.

Entries: ``X_ij = ξ_ij / sqrt(N)`` for ``i < j`` and ``X_ii = ξ_ii sqrt(2/N)``
with ``ξ`` i.i.d. from the entry law.  Tilting by ``exp(θN<e, X e>)``
factorizes over entries: ``ξ_ij`` is drawn from ``exp(γx - L(γ)) μ(dx)`` with
``γ_ij = 2θ sqrt(N) e_i e_j`` (``i < j``) and ``γ_ii = sqrt(2N) θ e_i²``.

Sample ``k`` of a run always uses ``rng_stream(seed, k)``, so results do not
depend on how samples are distributed over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .eigen import eig_full, eig_top
from .errors import DegenerateWeights, InvalidParameters
from .freeprob import k_sigma, semicircle_cdf
from .laws import EntryLaw, sample_tilted
from .numerics import rng_stream
from .rate import worker_count

__all__ = [
    "Tilt",
    "WignerEnsembleConfig",
    "SpectrumStats",
    "LocalizationStats",
    "BBPSummary",
    "TiltedEstimate",
    "tilt_gammas",
    "sample_wigner",
    "sample_tilted_wigner",
    "spectrum_stats",
    "semicircle_ks",
    "bbp_experiment",
    "localized_direction",
    "localization_stats",
    "tail_estimate_direct",
    "tail_estimate_tilted",
    "map_samples",
    "DEFAULT_DELTA",
    "MAX_N",
]

DEFAULT_DELTA = 0.1
MAX_N = 1000
MIN_ESS = 10.0


@dataclass(frozen=True)
class Tilt:
    """Tilt strength ``θ >= 0`` and a unit direction (array or ``"uniform"``)."""

    theta: float
    direction: np.ndarray | str = "uniform"


@dataclass(frozen=True)
class WignerEnsembleConfig:
    law: EntryLaw
    N: int
    n_samples: int
    seed: int
    tilt: Tilt | None = None
    max_N: int = MAX_N

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise InvalidParameters("constraint violated: N is a positive integer")
        if self.N > self.max_N:
            raise InvalidParameters(f"constraint violated: N <= {self.max_N} (raise max_N explicitly)")
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise InvalidParameters("constraint violated: n_samples is a positive integer")
        if self.tilt is not None:
            if not self.tilt.theta >= 0.0:
                raise InvalidParameters("constraint violated: tilt theta >= 0")
            d = self.tilt.direction
            if isinstance(d, str):
                if d != "uniform":
                    raise InvalidParameters(f"unknown direction token {d!r}")
            else:
                d = np.asarray(d, dtype=float)
                if d.shape != (self.N,):
                    raise InvalidParameters("constraint violated: direction has length N")
                if abs(float(np.linalg.norm(d)) - 1.0) > 1e-12:
                    raise InvalidParameters("constraint violated: direction has unit norm (1e-12)")

    def direction(self) -> np.ndarray:
        if self.tilt is None:
            raise InvalidParameters("config has no tilt")
        d = self.tilt.direction
        if isinstance(d, str):
            return np.full(self.N, 1.0 / math.sqrt(self.N))
        return np.asarray(d, dtype=float)


@dataclass(frozen=True)
class SpectrumStats:
    lambda_max: float
    ks_to_semicircle: float
    spectral_radius: float
    top_eigenvector: np.ndarray | None = None


@dataclass(frozen=True)
class LocalizationStats:
    """
    Bucket and delocalization summary of a unit vector.

    The bucket holds entries with ``|u_i| / (sqrt(r2) N^{-1/4}) in [1-ε, 1+ε]``;
    ``small_mass`` sums ``u_i²`` over entries outside the bucket with
    ``|u_i| <= ε N^{exponent}``.
    """

    epsilon: float
    r2: float
    bucket_count: int
    bucket_mass: float
    small_mass: float
    overlap_sq: float | None
    deloc_violation_count: int


@dataclass(frozen=True)
class BBPSummary:
    theta: float
    N: int
    mean_lambda: float
    stderr_lambda: float
    predicted_lambda: float
    mean_overlap: float
    stderr_overlap: float
    predicted_overlap: float
    lambdas: np.ndarray = field(repr=False)
    overlaps: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class TiltedEstimate:
    """
    Importance-sampling estimate of ``P(event)`` from the tilted ensemble.

    ``log_p_per_N = -log(p_hat)/N``; ``stderr`` is its delta-method standard
    error.  ``mean_weight`` (and ``weight_stderr``) is the indicator-free
    average of the likelihood ratio, equal to 1 in expectation.
    """

    N: int
    x: float
    theta: float
    p_hat: float
    log_p_per_N: float
    stderr: float
    ess: float
    mean_weight: float
    weight_stderr: float
    hits: int


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _entry_scale(N: int) -> np.ndarray:
    iu = np.triu_indices(N)
    return np.where(iu[0] == iu[1], math.sqrt(2.0 / N), 1.0 / math.sqrt(N))


def tilt_gammas(N: int, theta: float, e) -> np.ndarray:
    """Upper-triangular matrix of per-entry tilts (zero below the diagonal)."""
    e = np.asarray(e, dtype=float)
    G = 2.0 * theta * math.sqrt(N) * np.outer(e, e)
    np.fill_diagonal(G, math.sqrt(2.0 * N) * theta * e * e)
    return np.triu(G)


def _draw(cfg: WignerEnsembleConfig, sample_index: int, gamma_ut: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    N = cfg.N
    rng = rng_stream(cfg.seed, sample_index)
    xi = sample_tilted(cfg.law, gamma_ut, rng)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    X = np.zeros((N, N))
    iu = np.triu_indices(N)
    X[iu] = xi * _entry_scale(N)
    X = X + np.triu(X, 1).T
    return X, xi


def sample_wigner(cfg: WignerEnsembleConfig, sample_index: int) -> np.ndarray:
    """Untilted Wigner matrix for sample ``sample_index`` of the run."""
    if cfg.tilt is not None:
        raise InvalidParameters("sample_wigner expects a config without tilt")
    return _draw(cfg, sample_index, np.zeros(cfg.N * (cfg.N + 1) // 2))[0]


def _gamma_vector(cfg: WignerEnsembleConfig) -> np.ndarray:
    G = tilt_gammas(cfg.N, cfg.tilt.theta, cfg.direction())
    return G[np.triu_indices(cfg.N)]


def sample_tilted_wigner(cfg: WignerEnsembleConfig, sample_index: int) -> np.ndarray:
    """Wigner matrix under the tilt ``exp(θN<e, X e>)``; a zero tilt reproduces `sample_wigner`."""
    if cfg.tilt is None:
        raise InvalidParameters("sample_tilted_wigner expects a tilt")
    return _draw(cfg, sample_index, _gamma_vector(cfg))[0]


# ---------------------------------------------------------------------------
# Spectra
# ---------------------------------------------------------------------------


def semicircle_ks(eigenvalues) -> float:
    """Kolmogorov distance between the empirical spectral CDF and the semicircle CDF."""
    lam = np.sort(np.asarray(eigenvalues, dtype=float))
    n = lam.size
    F = semicircle_cdf(lam)
    k = np.arange(1, n + 1)
    return float(max(np.max(k / n - F), np.max(F - (k - 1) / n)))


def spectrum_stats(X, full: bool = True, keep_vector: bool = False) -> SpectrumStats:
    """
    Top eigenvalue, semicircle distance and spectral radius.

    ``full`` computes every eigenvalue with `eig_full` (needed for the KS
    distance); otherwise only `eig_top` runs and the KS field is NaN.
    """
    u = None
    if full:
        w = eig_full(X)
        lam = float(w[-1])
        ks = semicircle_ks(w)
        radius = float(max(abs(w[0]), abs(w[-1])))
        if keep_vector:
            lam, u = eig_top(X)
    else:
        lam, u = eig_top(X)
        ks = math.nan
        # the bottom eigenvalue is the top one of -X
        radius = max(abs(lam), abs(eig_top(-np.asarray(X))[0]))
    return SpectrumStats(lam, ks, max(radius, lam), u if keep_vector else None)


def map_samples(fn, n: int, workers: int | None = None) -> list:
    """Apply ``fn`` to sample indices ``0..n-1``; the result order never depends on ``workers``."""
    k = worker_count(workers)
    if k > 1 and n > 1:
        with ThreadPoolExecutor(max_workers=k) as pool:
            return list(pool.map(fn, range(n)))
    return [fn(i) for i in range(n)]


def bbp_experiment(
    law: EntryLaw,
    N: int,
    theta: float,
    e=None,
    *,
    n_samples: int,
    seed: int,
    workers: int | None = None,
) -> BBPSummary:
    """
    Top eigenvalue and overlap ``<u, e>²`` under the tilt ``(θ, e)``.

    The rank-one mean ``2θ ee^T`` predicts an outlier at ``K_σ(2θ)`` with
    squared overlap ``1 - 1/(2θ)²`` when ``2θ > 1``; below the transition the
    prediction is the bulk edge 2 and overlap 0.
    """
    cfg = WignerEnsembleConfig(law, N, n_samples, seed, Tilt(float(theta), "uniform" if e is None else e))
    d = cfg.direction()

    def one(k):
        lam, u = eig_top(sample_tilted_wigner(cfg, k))
        return lam, float(np.dot(u, d) ** 2)

    res = np.array(map_samples(one, n_samples, workers))
    lams, ovs = res[:, 0], res[:, 1]
    supercritical = 2.0 * theta > 1.0
    se = lambda a: float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else math.nan
    return BBPSummary(
        theta=float(theta),
        N=N,
        mean_lambda=float(lams.mean()),
        stderr_lambda=se(lams),
        predicted_lambda=k_sigma(2.0 * theta) if supercritical else 2.0,
        mean_overlap=float(ovs.mean()),
        stderr_overlap=se(ovs),
        predicted_overlap=1.0 - 1.0 / (2.0 * theta) ** 2 if supercritical else 0.0,
        lambdas=lams,
        overlaps=ovs,
    )


# ---------------------------------------------------------------------------
# Localization
# ---------------------------------------------------------------------------


def localized_direction(N: int, v: float, r2: float) -> np.ndarray:
    """
    Unit vector with ``floor(v sqrt(N))`` entries equal to ``sqrt(r2) N^{-1/4}``.

    The remaining mass is spread evenly over the other entries.
    """
    k = int(math.floor(v * math.sqrt(N)))
    a = math.sqrt(r2) * N**-0.25
    mass = k * a * a
    if k > N or mass > 1.0 + 1e-12:
        raise InvalidParameters("constraint violated: localized part carries at most unit mass")
    u = np.empty(N)
    u[:k] = a
    rest = max(1.0 - mass, 0.0)
    u[k:] = math.sqrt(rest / (N - k)) if N > k else 0.0
    return u / np.linalg.norm(u)


def localization_stats(u, epsilon: float, r2: float, direction=None, exponent: float = -0.25) -> LocalizationStats:
    """
    Bucket counts and masses of a unit vector.

    ``exponent`` sets the delocalization threshold ``ε N^{exponent}``.
    """
    u = np.asarray(u, dtype=float)
    if abs(float(np.linalg.norm(u)) - 1.0) > 1e-9:
        raise InvalidParameters("constraint violated: u has unit norm")
    N = u.size
    a = np.abs(u)
    ratio = a / (math.sqrt(r2) * N**-0.25)
    bucket = (ratio >= 1.0 - epsilon) & (ratio <= 1.0 + epsilon)
    thr = epsilon * N**exponent
    small = (a <= thr) & ~bucket
    u2 = u * u
    overlap = None
    if direction is not None:
        overlap = float(np.dot(u, np.asarray(direction, dtype=float)) ** 2)
    return LocalizationStats(
        epsilon=float(epsilon),
        r2=float(r2),
        bucket_count=int(np.count_nonzero(bucket)),
        bucket_mass=float(np.sum(u2[bucket])),
        small_mass=float(np.sum(u2[small])),
        overlap_sq=overlap,
        deloc_violation_count=int(np.count_nonzero(a > thr)),
    )


# ---------------------------------------------------------------------------
# Tail estimates
# ---------------------------------------------------------------------------


def _top_eigenvalue(X) -> float:
    return eig_top(X)[0]


def tail_estimate_direct(
    law: EntryLaw, N: int, x: float, n_samples: int, seed: int, workers: int | None = None
) -> tuple[float, float]:
    """Frequency of ``λ_max >= x`` over untilted samples and its binomial standard error."""
    cfg = WignerEnsembleConfig(law, N, n_samples, seed)
    lams = np.array(map_samples(lambda k: _top_eigenvalue(sample_wigner(cfg, k)), n_samples, workers))
    p = float(np.mean(lams >= x))
    return p, math.sqrt(p * (1.0 - p) / n_samples)


def tail_estimate_tilted(
    law: EntryLaw,
    N: int,
    x: float,
    theta: float,
    n_samples: int,
    seed: int,
    *,
    delta: float = DEFAULT_DELTA,
    direction=None,
    event: str = "window",
    workers: int | None = None,
) -> TiltedEstimate:
    """
    Importance-sampling estimate of ``P(|λ_max - x| <= δ)`` (or ``P(λ_max >= x)``).

    Samples come from the tilted ensemble; each carries the exact likelihood
    ratio ``exp(-Σ γ ξ + Σ L(γ))`` (equivalently
    ``exp(-θN<e, Xe> + Σ_{i<=j} L(γ_ij))``).

    Raises
    ------
    DegenerateWeights
        When the effective sample size of the weighted indicator is below 10.
    """
    if event not in ("window", "upper"):
        raise InvalidParameters("event is 'window' or 'upper'")
    cfg = WignerEnsembleConfig(law, N, n_samples, seed, Tilt(float(theta), "uniform" if direction is None else direction))
    gamma = _gamma_vector(cfg)
    log_norm = float(np.sum(law.L(gamma))) if theta > 0.0 else 0.0

    def one(k):
        X, xi = _draw(cfg, k, gamma)
        lw = log_norm - float(np.dot(gamma, xi)) if theta > 0.0 else 0.0
        return _top_eigenvalue(X), lw

    res = np.array(map_samples(one, n_samples, workers))
    lams, lw = res[:, 0], res[:, 1]
    hit = np.abs(lams - x) <= delta if event == "window" else lams >= x
    w = np.exp(lw)
    terms = np.where(hit, w, 0.0)
    p_hat = float(terms.mean())
    mean_w = float(w.mean())
    w_se = float(w.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else math.nan
    s1, s2 = float(terms.sum()), float(np.sum(terms * terms))
    ess = s1 * s1 / s2 if s2 > 0.0 else 0.0
    if ess < MIN_ESS:
        raise DegenerateWeights(f"effective sample size {ess:.2f} < {MIN_ESS:g} ({int(hit.sum())} hits)")
    se_p = float(terms.std(ddof=1) / math.sqrt(n_samples))
    return TiltedEstimate(
        N=N,
        x=float(x),
        theta=float(theta),
        p_hat=p_hat,
        log_p_per_N=-math.log(p_hat) / N,
        stderr=se_p / (p_hat * N),
        ess=ess,
        mean_weight=mean_w,
        weight_stderr=w_se,
        hits=int(hit.sum()),
    )
