"""Tests for the adaptive random-walk sampler and the two model fitters."""

from __future__ import annotations

import numpy as np
import pytest
from scipy import stats
from scipy.special import expit

from priorimpact import (
    BayesModel,
    Beta,
    BinomialLikelihood,
    Gamma,
    InverseGamma,
    McmcConfig,
    NormalVarianceLikelihood,
    PoissonLikelihood,
    SamplerError,
    ValidationError,
    bioassay,
    conjugate_update,
    fit_logistic,
    fit_skew_normal,
    half_sample_mode,
    log_posterior_unnorm,
    parse_prior,
    proper_prior,
    run_mcmc,
    skewed_demo_sample,
)


STD_NORMAL = lambda x: -0.5 * float(x[0]) ** 2


class TestRunMcmc:
    def test_standard_normal_moments_and_mixing(self):
        cfg = McmcConfig(chains=4, iterations=6000, burn_in=3000, thin=2, seed=0)
        cloud, diag = run_mcmc(STD_NORMAL, [0.0], cfg)
        draws = cloud.as_1d()
        assert abs(draws.mean()) < 0.05
        assert abs(draws.std() - 1.0) < 0.05
        assert diag.r_hat[0] < 1.02

    def test_seed_determinism(self):
        cfg = McmcConfig(chains=4, iterations=2000, burn_in=500, thin=1, seed=3)
        a, _ = run_mcmc(STD_NORMAL, [0.0], cfg)
        b, _ = run_mcmc(STD_NORMAL, [0.0], cfg)
        assert np.array_equal(a.points, b.points)
        c, _ = run_mcmc(STD_NORMAL, [0.0], McmcConfig(chains=4, iterations=2000, burn_in=500, thin=1, seed=4))
        assert not np.array_equal(a.points, c.points)

    def test_adaptation_lands_near_the_target_acceptance(self):
        cfg = McmcConfig(chains=4, iterations=6000, burn_in=3000, thin=2, seed=1)
        _, diag = run_mcmc(STD_NORMAL, [0.0], cfg)
        for rate in diag.acceptance_rates:
            assert 0.15 < rate < 0.5

    def test_multidimensional_target_diagnostics_per_coordinate(self):
        target = lambda x: -0.5 * (float(x[0]) ** 2 + float(x[1]) ** 2 / 4.0)
        cfg = McmcConfig(chains=4, iterations=4000, burn_in=2000, thin=2, seed=2)
        cloud, diag = run_mcmc(target, [0.0, 0.0], cfg)
        assert cloud.dim == 2
        assert len(diag.r_hat) == 2
        assert len(diag.ess) == 2
        assert abs(cloud.points[:, 1].std() - 2.0) < 0.25

    def test_init_outside_support_is_a_precondition_error(self):
        half_line = lambda x: -np.inf if x[0] < 0 else -float(x[0])
        with pytest.raises(ValidationError):
            run_mcmc(half_line, [-1.0], McmcConfig(chains=2, iterations=50, burn_in=10, thin=1))

    def test_fully_stuck_chains_raise_a_sampler_error(self):
        spike = lambda x: 0.0 if abs(float(x[0])) < 1e-300 else -np.inf
        with pytest.raises(SamplerError):
            run_mcmc(spike, [0.0], McmcConfig(chains=2, iterations=600, burn_in=300, thin=1, seed=0))

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            McmcConfig(chains=0)
        with pytest.raises(ValidationError):
            McmcConfig(iterations=100, burn_in=100)
        with pytest.raises(ValidationError):
            McmcConfig(thin=0)
        with pytest.raises(ValidationError):
            McmcConfig(target_acceptance=0.0)

    def test_stationary_frequencies_on_a_five_state_step_density(self):
        # discrete 5-state target embedded continuously; 10^6 total iterations
        weights = np.asarray([0.1, 0.3, 0.05, 0.35, 0.2])
        logw = np.log(weights)

        def log_step(x):
            v = float(x[0])
            if v < 0.0 or v >= 5.0:
                return -np.inf
            return float(logw[int(v)])

        cfg = McmcConfig(chains=4, iterations=250_000, burn_in=25_000, thin=1, seed=0)
        cloud, _ = run_mcmc(log_step, [2.5], cfg)
        draws = cloud.as_1d()
        freq = np.asarray([(np.floor(draws) == i).mean() for i in range(5)])
        assert np.abs(freq - weights).max() < 0.01


class TestConjugateOracle:
    CFG = McmcConfig(chains=4, iterations=14_000, burn_in=4000, thin=5, seed=0)
    MODELS = [
        BayesModel(PoissonLikelihood(), (3, 5, 4, 2, 6), proper_prior(Gamma(2.0, 1.0))),
        BayesModel(BinomialLikelihood(trials=20), (13,), proper_prior(Beta(2.0, 2.0))),
        BayesModel(
            NormalVarianceLikelihood(mean=0.0),
            tuple(np.random.default_rng(3).normal(0, 1.3, 12)),
            proper_prior(InverseGamma(3.0, 2.0)),
        ),
    ]

    @pytest.mark.parametrize(
        "model", MODELS, ids=["gamma-poisson", "beta-binomial", "ig-normal-variance"]
    )
    def test_sampler_matches_the_analytic_posterior(self, model):
        post = conjugate_update(model)
        cloud, diag = run_mcmc(
            lambda x: log_posterior_unnorm(model, float(x[0])),
            [post.distribution.mean],
            self.CFG,
        )
        ks = stats.kstest(cloud.as_1d(), post.distribution.cdf).statistic
        assert ks < 0.02
        assert diag.r_hat[0] < 1.02


class TestFitSkewNormal:
    CFG = McmcConfig(chains=4, iterations=2500, burn_in=1000, thin=3, seed=11)

    def test_shapes_and_determinism(self):
        data = skewed_demo_sample()
        fit = fit_skew_normal(data, parse_prior("t:0:0.5:2"), self.CFG)
        assert fit.joint_posterior.draws.dim == 3
        assert fit.shape_posterior.draws.dim == 1
        assert fit.shape_posterior.draws.size >= 1000
        again = fit_skew_normal(data, parse_prior("t:0:0.5:2"), self.CFG)
        assert np.array_equal(
            fit.joint_posterior.draws.points, again.joint_posterior.draws.points
        )

    def test_right_skewed_data_yields_a_positive_shape_mode(self):
        data = skewed_demo_sample()
        fit = fit_skew_normal(data, parse_prior("t:0:0.5:2"), self.CFG)
        alphas = fit.shape_posterior.draws.as_1d()
        assert np.median(alphas) > 0
        assert 1.0 < half_sample_mode(alphas) < 30.0

    def test_unbounded_prior_still_produces_finite_draws(self):
        # with no damping on the shape the posterior has an escaping tail;
        # the sampler must still return finite draws deterministically
        data = skewed_demo_sample()
        fit = fit_skew_normal(data, parse_prior("flat"), self.CFG)
        assert np.all(np.isfinite(fit.joint_posterior.draws.points))

    def test_short_data_is_rejected(self):
        with pytest.raises(ValidationError):
            fit_skew_normal([1.0, 2.0], parse_prior("flat"))


class TestFitLogistic:
    CFG = McmcConfig(chains=4, iterations=2500, burn_in=1000, thin=3, seed=11)

    def test_joint_mode_sits_near_the_standardized_mle(self):
        # under a flat prior the joint posterior density is the likelihood, so
        # the retained draw with the highest log-likelihood estimates the mode
        b = bioassay()
        fit = fit_logistic(b.log_doses, b.trials, b.deaths, slope_prior_scale=None, cfg=self.CFG)
        pts = fit.joint_posterior.draws.points
        z = (np.asarray(b.log_doses) - fit.dose_mean) / fit.dose_scale
        deaths = np.asarray(b.deaths, dtype=float)
        trials = np.asarray(b.trials, dtype=float)
        eta = pts[:, [0]] + pts[:, [1]] * z
        log_lik = (
            deaths * np.log(expit(eta)) + (trials - deaths) * np.log(expit(-eta))
        ).sum(axis=1)
        mode = pts[np.argmax(log_lik)]
        assert np.all(np.abs(mode - fit.mle_standardized) < 0.5)

    def test_ld50_cloud_is_the_back_transformed_slope_ratio(self):
        b = bioassay()
        fit = fit_logistic(b.log_doses, b.trials, b.deaths, slope_prior_scale=2.5, cfg=self.CFG)
        pts = fit.joint_posterior.draws.points
        keep = np.abs(pts[:, 1]) >= 1e-12
        expected = fit.dose_mean + fit.dose_scale * (-pts[keep, 0] / pts[keep, 1])
        assert fit.excluded == int((~keep).sum())
        assert np.allclose(fit.ld50_posterior.draws.as_1d(), expected)

    def test_standardization_of_the_dose_covariate(self):
        b = bioassay()
        fit = fit_logistic(b.log_doses, b.trials, b.deaths, cfg=self.CFG)
        doses = np.asarray(b.log_doses)
        assert fit.dose_mean == pytest.approx(doses.mean())
        assert fit.dose_scale == pytest.approx(2.0 * doses.std())
        z = (doses - fit.dose_mean) / fit.dose_scale
        assert z.mean() == pytest.approx(0.0, abs=1e-12)
        assert z.std() == pytest.approx(0.5)

    def test_input_validation(self):
        with pytest.raises(ValidationError):
            fit_logistic([0.1, 0.2], [5, 5], [1], slope_prior_scale=2.5)
        with pytest.raises(ValidationError):
            fit_logistic([0.1, 0.1], [5, 5], [1, 2], slope_prior_scale=2.5)
