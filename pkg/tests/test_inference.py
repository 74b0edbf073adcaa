from dataclasses import replace

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specreproj.errors import ConfigError
from specreproj.fourier import (
    NoiseModel,
    SpectralData,
    add_noise,
    dft_forward,
    dft_matrix,
    fourier_partial_sum,
    inv_variance_for_snr,
    inverse_dft_matrix,
    make_grid,
    synthesize_clean_coeffs,
)
from specreproj.inference import (
    BcdConfig,
    HyperParams,
    analytic_band,
    bsr_map,
    bsr_objective,
    bsr_observable,
    bsr_precision,
    bsr_update_beta,
    bsr_update_f,
    bsr_update_gamma,
    credible_band,
    fixed_posterior,
    gbsr_map,
    gbsr_objective,
    gbsr_system,
    gbsr_update_f,
    gbsr_update_gamma,
    sample_posterior,
)
from specreproj.reprojection import build_operators, gegenbauer_reconstruct
from specreproj.specfun import GegParams


def cos_shift(x):
    return np.cos(1.4 * np.pi * (x + 1))


def ops_for(n=48, lam=4.0, m=9):
    return build_operators(make_grid(n), GegParams(lam, min(m, n - 1)))


def noisy(n=48, snr=10.0, seed=0, func=cos_shift):
    clean = synthesize_clean_coeffs(func, n)
    return add_noise(clean, NoiseModel(inv_variance_for_snr(clean, snr), seed))


def mp_projector(n, lam, m):
    """A = G (2/N) H G^T W rebuilt entry by entry in 40-digit arithmetic."""
    mp.mp.dps = 40
    x = [mp.mpf(-1) + mp.mpf(2) * j / n for j in range(n)]
    lam = mp.mpf(lam)
    G = mp.matrix(n, m + 1)
    for j in range(n):
        for l in range(m + 1):
            G[j, l] = mp.fsum(
                (-1) ** k * mp.gamma(l - k + lam) / (mp.gamma(lam) * mp.factorial(k) * mp.factorial(l - 2 * k))
                * (2 * x[j]) ** (l - 2 * k)
                for k in range(l // 2 + 1)
            )
    h = [
        mp.sqrt(mp.pi) * mp.gamma(l + 2 * lam) / (mp.factorial(l) * mp.gamma(2 * lam))
        * mp.gamma(lam + mp.mpf(1) / 2) / (mp.gamma(lam) * (l + lam))
        for l in range(m + 1)
    ]
    W = [(1 - xx * xx) ** (lam - mp.mpf(1) / 2) for xx in x]
    A = mp.matrix(n, n)
    for i in range(n):
        for j in range(n):
            A[i, j] = mp.fsum(G[i, l] * G[j, l] / h[l] for l in range(m + 1)) * 2 * W[j] / n
    return A


class TestHyperParams:
    def test_positive(self):
        with pytest.raises(ValueError):
            HyperParams(0.0, 1.0)
        with pytest.raises(ValueError):
            HyperParams(1.0, -1.0)
        assert HyperParams(1.0, 1.0, 1.0, 0.0).rate == 0.0

    def test_bcd_config_validation(self):
        with pytest.raises(ConfigError):
            BcdConfig(rel_tol=0)
        with pytest.raises(ConfigError):
            BcdConfig(max_iter=0)
        with pytest.raises(ConfigError):
            BcdConfig(gbsr_adjoint="sideways")


class TestBsrObjective:
    def test_all_terms_vanish(self):
        ops = ops_for(8, 1.0, 3)
        assert bsr_objective(np.zeros(8), HyperParams(1, 1, 1, 0), np.zeros(8), ops) == 0.0

    @given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(0, 1))
    @settings(max_examples=25, deadline=None)
    def test_linear_in_rate(self, gamma, beta, d):
        ops = ops_for(16, 2.0, 5)
        f = np.linspace(-1, 1, 16) ** 2
        y = np.cos(np.arange(16.0))
        j1 = bsr_objective(f, HyperParams(gamma, beta, 1.0, d), y, ops)
        j2 = bsr_objective(f, HyperParams(gamma, beta, 1.0, 2 * d), y, ops)
        assert j2 - j1 == pytest.approx(gamma * d + beta * d, rel=1e-9, abs=1e-9 * max(1, abs(j1)))

    def test_small_instance_against_mpmath(self):
        n, lam, m = 4, 1.5, 2
        ops = ops_for(n, lam, m)
        A = mp_projector(n, lam, m)
        f = [0.3, -1.2, 0.7, 2.0]
        y = [1.0, 0.5, -0.25, 0.125]
        gamma, beta, c, d = 2.5, 0.75, 1.0, 1e-4
        Af = [mp.fsum(A[i, j] * f[j] for j in range(n)) for i in range(n)]
        r1 = mp.fsum((y[i] - Af[i]) ** 2 for i in range(n))
        r2 = mp.fsum((f[i] - Af[i]) ** 2 for i in range(n))
        e = c + mp.mpf(n) / 2 - 1
        ref = -e * mp.log(gamma) - e * mp.log(beta) + gamma / 2 * r1 + beta / 2 * r2 + d * gamma + d * beta
        got = bsr_objective(np.array(f), HyperParams(gamma, beta, c, d), np.array(y), ops)
        assert got == pytest.approx(float(ref), rel=1e-12)


class TestBsrUpdates:
    def test_zero_observable(self):
        ops = ops_for()
        np.testing.assert_array_equal(bsr_update_f(HyperParams(3.0, 2.0), np.zeros(48), ops), 0.0)

    def test_equal_precisions_against_stacked_least_squares(self):
        ops = ops_for(8, 2.0, 3)
        A, M = ops.projector, ops.complement
        y = np.random.default_rng(0).standard_normal(8)
        f = bsr_update_f(HyperParams(1.7, 1.7), y, ops)
        ref = np.linalg.lstsq(np.vstack([A, M]), np.concatenate([y, np.zeros(8)]), rcond=None)[0]
        np.testing.assert_allclose(f, ref, rtol=1e-9, atol=1e-12)

    def test_likelihood_dominated_limit(self):
        ops = ops_for()
        A = ops.projector
        target = np.sin(np.pi * make_grid(48).points)
        y = A @ target
        prev = np.inf
        for beta in (1e-2, 1e-5, 1e-8):
            f = bsr_update_f(HyperParams(1.0, beta), y, ops)
            res = np.linalg.norm(A @ f - y)
            assert res <= prev
            prev = res
        assert prev < 1e-6 * np.linalg.norm(y)

    def test_gamma_zero_residual(self):
        ops = ops_for()
        y = np.zeros(48)
        assert bsr_update_gamma(np.zeros(48), y, ops, 1.0, 1e-4) == pytest.approx(240000.0, rel=1e-12)

    def test_gamma_unit_residual(self):
        ops = ops_for()
        y = np.zeros(48)
        y[0] = 1.0
        assert bsr_update_gamma(np.zeros(48), y, ops, 1.0, 0.0) == pytest.approx(48.0, rel=1e-14)

    def test_beta_mirrors_gamma(self):
        ops = ops_for()
        f = ops.geg_synthesis @ np.arange(10.0)  # in the range of A up to quadrature error
        exact = np.zeros(48)
        assert bsr_update_beta(exact, ops, 1.0, 1e-4) == bsr_update_gamma(exact, exact, ops, 1.0, 1e-4)
        assert bsr_update_beta(f, ops) > 0

    def test_each_block_is_a_minimizer(self):
        ops = ops_for()
        y = bsr_observable(ops, noisy())
        h = HyperParams(3.0, 5.0)
        f = bsr_update_f(h, y, ops)
        j0 = bsr_objective(f, h, y, ops)
        rng = np.random.default_rng(1)
        for _ in range(5):
            assert bsr_objective(f + 1e-3 * rng.standard_normal(48), h, y, ops) >= j0
        g = bsr_update_gamma(f, y, ops)
        for s in (0.9, 1.1):
            assert bsr_objective(f, replace(h, likelihood_precision=g * s), y, ops) >= bsr_objective(
                f, replace(h, likelihood_precision=g), y, ops
            )


class TestGbsrObjective:
    def test_all_terms_vanish(self):
        ops = ops_for(8, 1.0, 3)
        assert gbsr_objective(np.zeros(8), HyperParams(1, 1, 1, 0), np.zeros(8), ops) == 0.0

    def test_complex_misfit_has_no_half(self):
        ops = ops_for(4, 1.0, 1)
        b = np.zeros(4, complex)
        b[3] = 3 + 4j
        h = HyperParams(2.0, 1.0, 1.0, 0.0)
        assert gbsr_objective(np.zeros(4), h, b, ops) - gbsr_objective(np.zeros(4), h, np.zeros(4), ops) == (
            pytest.approx(2.0 * 25.0)
        )

    def test_small_instance_against_mpmath(self):
        n, lam, m = 4, 1.5, 2
        ops = ops_for(n, lam, m)
        A = mp_projector(n, lam, m)
        f = [0.3, -1.2, 0.7, 2.0]
        b = [0.1 + 0.2j, -0.3j, 0.5, 0.25 - 0.125j]
        gamma, beta, c, d = 2.5, 0.75, 1.0, 1e-4
        x = [mp.mpf(-1) + mp.mpf(2) * j / n for j in range(n)]
        ks = range(-n // 2, n // 2)
        Ff = [mp.fsum(mp.exp(-1j * k * mp.pi * x[j]) * f[j] for j in range(n)) / n for k in ks]
        r1 = mp.fsum(abs(mp.mpc(b[i]) - Ff[i]) ** 2 for i in range(n))
        Mf = [f[i] - mp.fsum(A[i, j] * f[j] for j in range(n)) for i in range(n)]
        r2 = mp.fsum(v**2 for v in Mf)
        ref = (
            -(c + n - 1) * mp.log(gamma)
            - (c + mp.mpf(n) / 2 - 1) * mp.log(beta)
            + gamma * r1
            + beta / 2 * r2
            + d * gamma
            + d * beta
        )
        got = gbsr_objective(np.array(f), HyperParams(gamma, beta, c, d), np.array(b), ops)
        assert got == pytest.approx(float(ref), rel=1e-12)


class TestGbsrUpdates:
    @pytest.mark.parametrize("adjoint", ["normalized", "unnormalized"])
    def test_fast_system_matches_dense(self, adjoint):
        ops = ops_for()
        data = noisy()
        P1, r1 = gbsr_system(3.0, 2.0, data, ops, adjoint, dense=False)
        P2, r2 = gbsr_system(3.0, 2.0, data, ops, adjoint, dense=True)
        assert np.max(np.abs(P1 - P2)) <= 1e-12 * np.max(np.abs(P1))
        assert np.max(np.abs(r1 - r2)) <= 1e-12 * np.max(np.abs(r1))

    @pytest.mark.parametrize("n", [4, 16, 48, 128, 256])
    def test_unnormalized_gram_is_identity(self, n):
        g = make_grid(n)
        assert np.max(np.abs((inverse_dft_matrix(g) @ dft_matrix(g)).real - np.eye(n))) <= 1e-12

    @pytest.mark.parametrize("adjoint", ["normalized", "unnormalized"])
    def test_prior_free_limit_is_fourier_partial_sum(self, adjoint):
        g = make_grid(32)
        k = np.arange(1, 15)
        f = np.cos(np.pi * np.outer(g.points, k)) @ (1.0 / k**2)
        data = dft_forward(f, g)
        est = gbsr_update_f(HyperParams(1.0, 1e-12), data, ops_for(32, 2.0, 5), adjoint)
        np.testing.assert_allclose(est, fourier_partial_sum(data, g), atol=1e-9)

    def test_normalized_update_is_exact_block_minimizer(self):
        ops = ops_for()
        data = noisy(snr=2.0)
        h = HyperParams(40.0, 7.0)
        f = gbsr_update_f(h, data, ops, "normalized")
        # analytic gradient of the objective in f
        F, M = dft_matrix(ops.grid), ops.complement
        grad = -2 * h.likelihood_precision * (F.conj().T @ (data.coeffs - F @ f)).real + h.prior_precision * (
            M.T @ (M @ f)
        )
        assert np.linalg.norm(grad) <= 1e-10 * np.linalg.norm(h.prior_precision * (M.T @ (M @ f))) + 1e-12
        j0 = gbsr_objective(f, h, data, ops)
        rng = np.random.default_rng(0)
        for _ in range(5):
            assert gbsr_objective(f + 1e-4 * rng.standard_normal(48), h, data, ops) >= j0

    def test_unnormalized_update_overweights_data(self):
        ops = ops_for()
        data = noisy(snr=2.0)
        h = HyperParams(40.0, 7.0)
        f_norm = gbsr_update_f(h, data, ops, "normalized")
        f_un = gbsr_update_f(h, data, ops, "unnormalized")
        # same as the normalized update with gamma scaled by N
        np.testing.assert_allclose(f_un, gbsr_update_f(HyperParams(40.0 * 48, 7.0), data, ops), atol=1e-10)
        assert gbsr_objective(f_un, h, data, ops) > gbsr_objective(f_norm, h, data, ops)

    def test_gamma_update(self):
        ops = ops_for()
        assert gbsr_update_gamma(np.zeros(48), np.zeros(48), ops, 1.0, 1e-4) == pytest.approx(48 / 1e-4)
        b = np.zeros(48, complex)
        b[0] = 1j
        assert gbsr_update_gamma(np.zeros(48), b, ops, 1.0, 0.0) == pytest.approx(48.0)


class TestMap:
    @pytest.mark.parametrize("method", [bsr_map, gbsr_map])
    def test_single_sweep(self, method):
        res = method(noisy(), ops_for(), BcdConfig(max_iter=1))
        assert res.iterations == 1
        assert len(res.objective_trace) == 2
        assert len(res.block_trace) == 1 and len(res.block_trace[0]) == 4

    def test_bsr_clean_data_matches_reprojection(self):
        ops = ops_for()
        clean = synthesize_clean_coeffs(cos_shift, 48)
        res = bsr_map(clean, ops)
        y = gegenbauer_reconstruct(ops, clean)
        assert res.converged
        assert np.linalg.norm(res.estimate - y) <= 1e-3 * np.linalg.norm(y)

    def test_bsr_observable_is_reprojection(self):
        ops, data = ops_for(), noisy()
        np.testing.assert_array_equal(bsr_observable(ops, data), gegenbauer_reconstruct(ops, data))

    @pytest.mark.parametrize("method", [bsr_map, gbsr_map])
    def test_zero_data_guard(self, method):
        res = method(SpectralData(np.zeros(48)), ops_for())
        np.testing.assert_array_equal(res.estimate, 0.0)
        assert res.iterations == 0 and res.converged
        assert res.hyper.prior_precision == pytest.approx(48 / 2e-4)

    def test_gbsr_beats_reprojection_on_reference_signal(self):
        g = make_grid(128)
        exp_sin = lambda x: np.exp(x) * np.sin(5 * x)  # noqa: E731
        ops = ops_for(128)
        truth = exp_sin(g.points)
        mid = np.abs(g.points) <= 0.5
        errs = []
        for seed in range(20):
            data = add_noise(synthesize_clean_coeffs(exp_sin, 128), NoiseModel(2e-3, seed))
            est_g = gbsr_map(data, ops).estimate
            est_r = gegenbauer_reconstruct(ops, data)
            errs.append(
                [
                    np.linalg.norm((est_g - truth)[mid]),
                    np.linalg.norm((est_r - truth)[mid]),
                    np.linalg.norm(est_g - truth),
                    np.linalg.norm(est_r - truth),
                ]
            )
        interior_g, interior_r, full_g, full_r = np.mean(errs, axis=0)
        assert interior_g < interior_r
        assert full_g < 0.5 * full_r

    @given(
        st.sampled_from([16, 48, 128]),
        st.sampled_from([2.0, 10.0, 30.0]),
        st.integers(1, 8),
        st.integers(0, 1000),
        st.sampled_from(["bsr", "gbsr"]),
        st.sampled_from(["normalized", "unnormalized"]),
    )
    @settings(max_examples=30, deadline=None)
    def test_monotone_descent_and_positivity(self, n, snr, lam, seed, method, adjoint):
        ops = ops_for(n, float(lam), 9)
        data = noisy(n, snr, seed)
        cfg = BcdConfig(gbsr_adjoint=adjoint)
        res = (bsr_map if method == "bsr" else gbsr_map)(data, ops, cfg)
        for sweep in res.block_trace:
            # the gamma and beta blocks are exact minimizers for both adjoints
            assert sweep[2] <= sweep[1] + 1e-10 * max(1.0, abs(sweep[1]))
            assert sweep[3] <= sweep[2] + 1e-10 * max(1.0, abs(sweep[2]))
            if method == "bsr" or adjoint == "normalized":
                assert sweep[1] <= sweep[0] + 1e-10 * max(1.0, abs(sweep[0]))
        assert res.hyper.likelihood_precision > 0 and res.hyper.prior_precision > 0

    @pytest.mark.parametrize("method", ["bsr", "gbsr"])
    def test_stationarity(self, method):
        ops, data = ops_for(), noisy(seed=3)
        res = (bsr_map if method == "bsr" else gbsr_map)(data, ops)
        assert res.converged
        f = res.estimate
        if method == "bsr":
            g = bsr_update_gamma(f, bsr_observable(ops, data), ops)
        else:
            g = gbsr_update_gamma(f, data, ops)
        b = bsr_update_beta(f, ops)
        assert g == pytest.approx(res.hyper.likelihood_precision, rel=1e-8)
        assert b == pytest.approx(res.hyper.prior_precision, rel=1e-8)

    @pytest.mark.parametrize("n, lam", [(16, 1.0), (48, 1.0), (48, 4.0), (48, 8.0), (128, 4.0), (256, 8.0)])
    def test_common_kernel(self, n, lam):
        ops = ops_for(n, lam, 9)
        P = bsr_precision(1.0, 1.0, ops)
        assert np.linalg.eigvalsh(P)[0] > 0

    def test_deterministic(self):
        a = gbsr_map(noisy(seed=5), ops_for())
        b = gbsr_map(noisy(seed=5), ops_for())
        np.testing.assert_array_equal(a.estimate, b.estimate)
        assert a.objective_trace == b.objective_trace


class TestPosterior:
    @pytest.mark.parametrize("method", ["bsr", "gbsr"])
    def test_mean_is_map_f_update(self, method):
        ops, data = ops_for(), noisy()
        res = (bsr_map if method == "bsr" else gbsr_map)(data, ops)
        post = fixed_posterior(method, res.hyper, data, ops)
        if method == "bsr":
            ref = bsr_update_f(res.hyper, bsr_observable(ops, data), ops)
        else:
            ref = gbsr_update_f(res.hyper, data, ops)
        np.testing.assert_allclose(post.mean, ref, rtol=1e-10, atol=1e-12)
        assert np.max(np.abs(post.precision - post.precision.T)) <= 1e-12 * np.max(np.abs(post.precision))

    def test_covariance_against_dense_inverse(self):
        ops = ops_for(8, 2.0, 3)
        data = noisy(8)
        h = HyperParams(5.0, 2.0)
        A, M = ops.projector, ops.complement
        C_ref = np.linalg.inv(5.0 * A.T @ A + 2.0 * M.T @ M)
        post = fixed_posterior("bsr", h, data, ops)
        np.testing.assert_allclose(post.covariance(), C_ref, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(post.marginal_std(), np.sqrt(np.diag(C_ref)), rtol=1e-9)
        C_g = np.linalg.inv(2 * 5.0 / 8 * np.eye(8) + 2.0 * M.T @ M)
        np.testing.assert_allclose(fixed_posterior("gbsr", h, data, ops).covariance(), C_g, rtol=1e-9, atol=1e-12)

    def test_sampler_moments(self):
        ops = ops_for(16, 2.0, 5)
        data = noisy(16)
        post = fixed_posterior("gbsr", HyperParams(50.0, 3.0), data, ops)
        samples = sample_posterior(post, 100_000, seed=1)
        assert samples.shape == (100_000, 16)
        assert np.linalg.norm(samples.mean(0) - post.mean) <= 0.01 * np.linalg.norm(post.mean)
        C = post.covariance()
        assert np.linalg.norm(np.cov(samples.T) - C) <= 0.05 * np.linalg.norm(C)

    def test_band_contains_mean(self):
        ops, data = ops_for(), noisy()
        res = gbsr_map(data, ops)
        post = fixed_posterior("gbsr", res.hyper, data, ops)
        band = credible_band(sample_posterior(post, 10_000, seed=0), 0.999)
        assert np.all(band.lower <= post.mean) and np.all(post.mean <= band.upper)
        exact = analytic_band(post, 0.999)
        width = exact.upper - exact.lower
        np.testing.assert_allclose(band.upper - band.lower, width, rtol=0.15)

    @pytest.mark.parametrize("level", [0.0, 1.0, 1.5])
    def test_bad_level(self, level):
        with pytest.raises(ValueError):
            credible_band(np.zeros((4, 3)), level)

    def test_bad_sample_count(self):
        post = fixed_posterior("gbsr", HyperParams(1.0, 1.0), noisy(16), ops_for(16, 2.0, 5))
        with pytest.raises(ValueError):
            sample_posterior(post, 1)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            fixed_posterior("other", HyperParams(1.0, 1.0), noisy(16), ops_for(16, 2.0, 5))
