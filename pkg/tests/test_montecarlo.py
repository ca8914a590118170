from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate as sint
from scipy import optimize as sopt
from scipy import stats

from wigner_ldp.errors import DegenerateWeights, InvalidParameters
from wigner_ldp.laws import EntryLaw, gaussian, rademacher, sparse_gaussian, three_point
from wigner_ldp.montecarlo import (
    LocalizationStats,
    Tilt,
    WignerEnsembleConfig,
    bbp_experiment,
    localization_stats,
    localized_direction,
    sample_tilted_wigner,
    sample_wigner,
    semicircle_ks,
    spectrum_stats,
    tail_estimate_direct,
    tail_estimate_tilted,
    tilt_gammas,
)


def _uniform(N):
    return np.full(N, 1.0 / math.sqrt(N))


class TestConfig:
    def test_direction_norm(self):
        with pytest.raises(InvalidParameters):
            WignerEnsembleConfig(gaussian(), 4, 1, 0, Tilt(1.0, np.ones(4)))

    def test_direction_length(self):
        with pytest.raises(InvalidParameters):
            WignerEnsembleConfig(gaussian(), 4, 1, 0, Tilt(1.0, _uniform(5)))

    def test_bad_sizes(self):
        with pytest.raises(InvalidParameters):
            WignerEnsembleConfig(gaussian(), 0, 1, 0)
        with pytest.raises(InvalidParameters):
            WignerEnsembleConfig(gaussian(), 3, 0, 0)
        with pytest.raises(InvalidParameters):
            WignerEnsembleConfig(gaussian(), 3, 1, 0, Tilt(-1.0, "uniform"))

    def test_uniform_token(self):
        cfg = WignerEnsembleConfig(gaussian(), 9, 1, 0, Tilt(1.0, "uniform"))
        np.testing.assert_allclose(cfg.direction(), np.full(9, 1 / 3), atol=1e-15)


class TestSampling:
    def test_symmetric_and_scaled(self):
        N = 400
        X = sample_wigner(WignerEnsembleConfig(gaussian(), N, 1, 11), 0)
        assert np.array_equal(X, X.T)
        off = X[np.triu_indices(N, 1)]
        assert off.var() * N == pytest.approx(1.0, abs=0.1)
        assert abs(off.mean() * math.sqrt(N)) <= 0.05
        assert np.diag(X).var() * N / 2 == pytest.approx(1.0, abs=0.2)

    def test_deterministic_streams(self):
        cfg = WignerEnsembleConfig(rademacher(), 50, 2, 3)
        assert np.array_equal(sample_wigner(cfg, 1), sample_wigner(cfg, 1))
        assert not np.array_equal(sample_wigner(cfg, 0), sample_wigner(cfg, 1))

    def test_rejects_tilted_config(self):
        cfg = WignerEnsembleConfig(gaussian(), 5, 1, 0, Tilt(1.0, "uniform"))
        with pytest.raises(InvalidParameters):
            sample_wigner(cfg, 0)

    @pytest.mark.parametrize("law", [gaussian(), rademacher(), sparse_gaussian(0.5), three_point(0.2)],
                             ids=lambda l: l.name)
    def test_zero_tilt_bit_identical(self, law):
        plain = WignerEnsembleConfig(law, 30, 1, 5)
        tilted = WignerEnsembleConfig(law, 30, 1, 5, Tilt(0.0, "uniform"))
        assert np.array_equal(sample_wigner(plain, 0), sample_tilted_wigner(tilted, 0))

    def test_zero_tilt_ks(self):
        law = sparse_gaussian(0.5)
        a = np.concatenate([sample_wigner(WignerEnsembleConfig(law, 60, 4, 1), k)[np.triu_indices(60, 1)] for k in range(4)])
        b = np.concatenate(
            [sample_tilted_wigner(WignerEnsembleConfig(law, 60, 4, 2, Tilt(0.0, "uniform")), k)[np.triu_indices(60, 1)]
             for k in range(4)]
        )
        assert stats.ks_2samp(a, b).pvalue > 0.01

    def test_gammas(self):
        N, th = 6, 0.7
        e = _uniform(N)
        G = tilt_gammas(N, th, e)
        assert G[0, 1] == pytest.approx(2 * th * math.sqrt(N) / N, abs=1e-15)
        assert G[2, 2] == pytest.approx(math.sqrt(2 * N) * th / N, abs=1e-15)

    def test_gaussian_tilt_quadratic_form(self):
        # each Gaussian entry mean shifts by its tilt, so E<e, X e> = 2θ exactly
        N, th = 200, 1.0
        cfg = WignerEnsembleConfig(gaussian(), N, 200, 17, Tilt(th, "uniform"))
        e = cfg.direction()
        q = [e @ sample_tilted_wigner(cfg, k) @ e for k in range(200)]
        assert np.mean(q) == pytest.approx(2 * th, abs=0.1)

    def test_rademacher_tilt_entry_mean(self):
        N, th = 100, 1.0
        cfg = WignerEnsembleConfig(rademacher(), N, 20, 23, Tilt(th, "uniform"))
        vals = np.concatenate([sample_tilted_wigner(cfg, k)[np.triu_indices(N, 1)] * math.sqrt(N) for k in range(20)])
        gamma = 2 * th / math.sqrt(N)
        sd = math.sqrt((1 - math.tanh(gamma) ** 2) / vals.size)
        assert abs(vals.mean() - math.tanh(gamma)) <= 4 * sd


class TestSemicircleKS:
    @staticmethod
    def _cdf_quad(x):
        return sint.quad(lambda y: math.sqrt(max(4 - y * y, 0.0)) / (2 * math.pi), -2.0, x)[0]

    def test_quantiles(self):
        N = 200
        q = np.array(
            [sopt.brentq(lambda x, p=(k - 0.5) / N: self._cdf_quad(x) - p, -2.0, 2.0, xtol=1e-13) for k in range(1, N + 1)]
        )
        assert semicircle_ks(q) <= 1.0 / (2 * N) + 1e-9

    def test_zeros(self):
        assert semicircle_ks(np.zeros(10)) == pytest.approx(0.5, abs=1e-15)

    def test_goe_sample(self):
        cfg = WignerEnsembleConfig(gaussian(), 300, 1, 101)
        st = spectrum_stats(sample_wigner(cfg, 0), full=True)
        assert st.ks_to_semicircle <= 0.08
        assert st.lambda_max <= st.spectral_radius + 1e-12


class TestSpectrumStats:
    def test_vector_residual(self):
        X = sample_wigner(WignerEnsembleConfig(rademacher(), 120, 1, 4), 0)
        st = spectrum_stats(X, full=False, keep_vector=True)
        u = st.top_eigenvector
        assert np.linalg.norm(X @ u - st.lambda_max * u) <= 1e-8 * np.linalg.norm(X, 2)
        assert math.isnan(st.ks_to_semicircle)

    def test_full_and_top_agree(self):
        X = sample_wigner(WignerEnsembleConfig(gaussian(), 100, 1, 5), 0)
        a = spectrum_stats(X, full=True)
        b = spectrum_stats(X, full=False)
        assert a.lambda_max == pytest.approx(b.lambda_max, abs=1e-8)


class TestBBP:
    def test_supercritical_small(self):
        s = bbp_experiment(gaussian(), 200, 1.0, n_samples=15, seed=3)
        assert s.predicted_lambda == pytest.approx(2.5, abs=1e-15)
        assert s.predicted_overlap == pytest.approx(0.75, abs=1e-15)
        assert s.mean_lambda == pytest.approx(2.5, abs=0.12)
        assert s.mean_overlap == pytest.approx(0.75, abs=0.08)

    def test_subcritical_small(self):
        s = bbp_experiment(gaussian(), 200, 0.4, n_samples=10, seed=3)
        assert s.predicted_lambda == 2.0
        assert s.mean_lambda <= 2.15

    def test_workers_identical(self):
        a = bbp_experiment(rademacher(), 60, 1.0, n_samples=6, seed=1, workers=1)
        b = bbp_experiment(rademacher(), 60, 1.0, n_samples=6, seed=1, workers=3)
        np.testing.assert_array_equal(a.lambdas, b.lambdas)


class TestLocalization:
    def test_basis_vector(self):
        N = 400
        u = np.zeros(N)
        u[0] = 1.0
        s = localization_stats(u, 0.1, N ** -0.5)
        assert isinstance(s, LocalizationStats)
        assert s.bucket_count == 0
        assert s.deloc_violation_count == 1

    def test_uniform(self):
        N = 625
        eps = N ** -0.25
        s = localization_stats(_uniform(N), eps, 1.0)
        assert s.deloc_violation_count == 0
        assert s.small_mass == pytest.approx(1.0, abs=1e-12)

    def test_synthetic_localized(self):
        N, v, r2 = 900, 0.5, 1.0
        u = localized_direction(N, v, r2)
        k = int(math.floor(v * math.sqrt(N)))
        assert np.linalg.norm(u) == pytest.approx(1.0, abs=1e-12)
        s = localization_stats(u, 0.05, r2)
        assert s.bucket_count == k
        big = np.abs(u) >= 0.5 * math.sqrt(r2) * N ** -0.25
        assert s.bucket_mass == pytest.approx(float(np.sum(u[big] ** 2)), abs=1e-12)
        assert s.bucket_mass + s.small_mass <= 1 + 1e-9

    def test_overlap_and_permutation(self):
        N = 256
        rng = np.random.default_rng(0)
        u = rng.standard_normal(N)
        u /= np.linalg.norm(u)
        e = localized_direction(N, 0.5, 2.0)
        a = localization_stats(u, 0.2, 2.0, direction=e)
        perm = rng.permutation(N)
        b = localization_stats(u[perm], 0.2, 2.0, direction=e[perm])
        assert 0.0 <= a.overlap_sq <= 1.0 + 1e-12
        assert a.overlap_sq == pytest.approx(b.overlap_sq, abs=1e-14)
        assert (a.bucket_count, a.deloc_violation_count) == (b.bucket_count, b.deloc_violation_count)
        assert a.bucket_mass == pytest.approx(b.bucket_mass, abs=1e-14)
        assert a.small_mass == pytest.approx(b.small_mass, abs=1e-14)

    def test_exponent_parameter(self):
        # with the literal +1/4 exponent every unit vector is delocalized
        u = np.zeros(100)
        u[0] = 1.0
        assert localization_stats(u, 0.5, 1.0, exponent=0.25).deloc_violation_count == 0

    def test_requires_unit(self):
        with pytest.raises(InvalidParameters):
            localization_stats(np.ones(4), 0.1, 1.0)

    def test_localized_too_heavy(self):
        with pytest.raises(InvalidParameters):
            localized_direction(100, 2.0, 1.0)


class TestTails:
    def test_direct_trivial(self):
        p, se = tail_estimate_direct(gaussian(), 40, 0.0, 30, 1)
        assert p == 1.0 and se == 0.0

    def test_direct_far(self):
        p, _ = tail_estimate_direct(gaussian(), 100, 10.0, 60, 2)
        assert p == 0.0

    def test_direct_monotone(self):
        ps = [tail_estimate_direct(gaussian(), 30, x, 80, 5)[0] for x in np.linspace(1.6, 2.6, 6)]
        assert all(a >= b for a, b in zip(ps, ps[1:]))

    def test_tilted_zero_theta(self):
        d, _ = tail_estimate_direct(gaussian(), 30, 1.9, 200, 9)
        t = tail_estimate_tilted(gaussian(), 30, 1.9, 0.0, 200, 9, event="upper")
        assert t.p_hat == d
        assert t.mean_weight == 1.0

    def test_weight_unbiased(self):
        t = tail_estimate_tilted(gaussian(), 10, 0.0, 0.2, 3000, 4, event="upper")
        assert abs(t.mean_weight - 1.0) <= 3 * t.weight_stderr

    def test_weight_unbiased_rademacher(self):
        t = tail_estimate_tilted(rademacher(), 10, 0.0, 0.2, 3000, 6, event="upper")
        assert abs(t.mean_weight - 1.0) <= 3 * t.weight_stderr

    def test_degenerate(self):
        with pytest.raises(DegenerateWeights):
            tail_estimate_tilted(gaussian(), 20, 9.0, 1.0, 20, 1)

    def test_agrees_with_direct(self):
        t = tail_estimate_tilted(gaussian(), 10, 2.2, 0.3, 2000, 3, event="upper")
        d, d_se = tail_estimate_direct(gaussian(), 10, 2.2, 4000, 8)
        assert t.ess >= 10 and t.log_p_per_N > 0
        p_se = t.stderr * t.p_hat * 10
        assert abs(t.p_hat - d) <= 3 * math.hypot(p_se, d_se)

    def test_custom_law_requires_bound(self):
        law = EntryLaw.custom("ct", L=lambda x: 0.5 * np.asarray(x) ** 2,
                              sampler=lambda rng, n: rng.standard_normal(n))
        cfg = WignerEnsembleConfig(law, 4, 1, 0, Tilt(0.5, "uniform"))
        with pytest.raises(InvalidParameters):
            sample_tilted_wigner(cfg, 0)
