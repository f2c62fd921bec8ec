"""Tests for conjugate posterior construction and the posterior container."""

from __future__ import annotations

import math

import numpy as np
import pytest

from priorimpact import (
    BayesModel,
    Beta,
    BinomialLikelihood,
    EmpiricalMeasure,
    Gamma,
    ImproperPosteriorError,
    InverseGamma,
    LogisticLikelihood,
    NormalVarianceLikelihood,
    PoissonLikelihood,
    Posterior,
    ValidationError,
    conjugate_update,
    flat_prior,
    improper_beta_prior,
    improper_gamma_prior,
    improper_inverse_gamma_prior,
    jeffreys_variance_prior,
    log_posterior_unnorm,
    posterior_predictive_sample,
    proper_prior,
)


NV_DATA = tuple(np.random.default_rng(0).normal(0.0, 1.0, 10))
NV_SQ_SUM = float(np.sum(np.square(NV_DATA)))


class TestConjugateUpdates:
    def test_poisson_gamma_update(self):
        model = BayesModel(PoissonLikelihood(), (3, 5, 4), proper_prior(Gamma(2.0, 1.0)))
        post = conjugate_update(model)
        assert post.is_analytic
        assert post.distribution.params == (2.0 + 12.0, 1.0 + 3.0)

    def test_poisson_flat_prior_acts_as_unit_shape_zero_rate(self):
        model = BayesModel(PoissonLikelihood(), (3, 5, 4), flat_prior())
        assert conjugate_update(model).distribution.params == (13.0, 3.0)

    def test_poisson_improper_gamma_prior(self):
        model = BayesModel(PoissonLikelihood(), (2, 2), improper_gamma_prior(0.5, 0.0))
        assert conjugate_update(model).distribution.params == (4.5, 2.0)

    def test_binomial_beta_update(self):
        model = BayesModel(BinomialLikelihood(trials=10), (7,), proper_prior(Beta(2.0, 3.0)))
        post = conjugate_update(model)
        assert post.distribution.params == (9.0, 6.0)

    def test_binomial_flat_prior_acts_as_uniform(self):
        model = BayesModel(BinomialLikelihood(trials=10), (7,), flat_prior())
        assert conjugate_update(model).distribution.params == (8.0, 4.0)

    def test_binomial_multiple_batches_pool_counts(self):
        model = BayesModel(BinomialLikelihood(trials=5), (2, 4, 0), flat_prior())
        # successes 6 of 15 trials
        assert conjugate_update(model).distribution.params == (7.0, 10.0)

    def test_normal_variance_inverse_gamma_update(self):
        model = BayesModel(
            NormalVarianceLikelihood(mean=0.0), NV_DATA, proper_prior(InverseGamma(3.0, 2.0))
        )
        post = conjugate_update(model)
        a, b = post.distribution.params
        assert a == pytest.approx(3.0 + 5.0)
        assert b == pytest.approx(2.0 + NV_SQ_SUM / 2.0)

    def test_normal_variance_jeffreys_prior(self):
        model = BayesModel(NormalVarianceLikelihood(mean=0.0), NV_DATA, jeffreys_variance_prior())
        a, b = conjugate_update(model).distribution.params
        assert a == pytest.approx(5.0)
        assert b == pytest.approx(NV_SQ_SUM / 2.0)

    def test_normal_variance_flat_prior_is_shape_minus_one_limit(self):
        model = BayesModel(NormalVarianceLikelihood(mean=0.0), NV_DATA, flat_prior())
        a, b = conjugate_update(model).distribution.params
        assert a == pytest.approx(4.0)
        assert b == pytest.approx(NV_SQ_SUM / 2.0)

    def test_known_mean_is_subtracted_before_squaring(self):
        shifted = tuple(x + 10.0 for x in NV_DATA)
        model = BayesModel(NormalVarianceLikelihood(mean=10.0), shifted, jeffreys_variance_prior())
        _, b = conjugate_update(model).distribution.params
        assert b == pytest.approx(NV_SQ_SUM / 2.0)

    def test_provenance_mentions_likelihood_and_prior(self):
        model = BayesModel(PoissonLikelihood(), (1,), flat_prior())
        assert "Poisson" in conjugate_update(model).provenance


class TestImproperPosteriors:
    def test_haldane_with_zero_successes_is_improper(self):
        model = BayesModel(BinomialLikelihood(trials=10), (0,), improper_beta_prior(0.0, 0.0))
        with pytest.raises(ImproperPosteriorError):
            conjugate_update(model)

    def test_haldane_with_all_successes_is_improper(self):
        model = BayesModel(BinomialLikelihood(trials=10), (10,), improper_beta_prior(0.0, 0.0))
        with pytest.raises(ImproperPosteriorError):
            conjugate_update(model)

    def test_haldane_with_interior_count_is_proper(self):
        model = BayesModel(BinomialLikelihood(trials=10), (7,), improper_beta_prior(0.0, 0.0))
        assert conjugate_update(model).distribution.params == (7.0, 3.0)

    def test_poisson_zero_counts_with_zero_shape_is_improper(self):
        model = BayesModel(PoissonLikelihood(), (0, 0), improper_gamma_prior(0.0, 0.0))
        with pytest.raises(ImproperPosteriorError):
            conjugate_update(model)

    def test_variance_posterior_needs_positive_shape(self):
        # flat prior contributes shape -1; a single observation gives n/2 = 1/2
        model = BayesModel(NormalVarianceLikelihood(mean=0.0), (0.7,), flat_prior())
        with pytest.raises(ImproperPosteriorError):
            conjugate_update(model)

    def test_variance_posterior_needs_positive_scale(self):
        data = (0.0, 0.0, 0.0, 0.0)  # all mass at the known mean
        model = BayesModel(NormalVarianceLikelihood(mean=0.0), data, jeffreys_variance_prior())
        with pytest.raises(ImproperPosteriorError):
            conjugate_update(model)

    def test_mismatched_improper_prior_is_rejected(self):
        model = BayesModel(PoissonLikelihood(), (1, 2), improper_inverse_gamma_prior(1.0, 1.0))
        with pytest.raises(ValidationError):
            conjugate_update(model)


class TestModelValidation:
    def test_poisson_data_must_be_counts(self):
        with pytest.raises(ValidationError):
            BayesModel(PoissonLikelihood(), (1.5,), flat_prior())
        with pytest.raises(ValidationError):
            BayesModel(PoissonLikelihood(), (-1,), flat_prior())

    def test_data_must_be_non_empty_and_finite(self):
        with pytest.raises(ValidationError):
            BayesModel(PoissonLikelihood(), (), flat_prior())
        with pytest.raises(ValidationError):
            BayesModel(PoissonLikelihood(), (math.nan,), flat_prior())

    def test_binomial_successes_cannot_exceed_trials(self):
        with pytest.raises(ValidationError):
            BayesModel(BinomialLikelihood(trials=5), (6,), flat_prior())

    def test_binomial_trials_must_be_positive_integer(self):
        with pytest.raises(ValidationError):
            BinomialLikelihood(trials=0)

    def test_logistic_dose_groups_validated(self):
        with pytest.raises(ValidationError):
            LogisticLikelihood(doses=(0.1,), trials=(5,))
        with pytest.raises(ValidationError):
            LogisticLikelihood(doses=(0.1, 0.1), trials=(5, 5))
        with pytest.raises(ValidationError):
            LogisticLikelihood(doses=(0.1, 0.2), trials=(5, 0))

    def test_logistic_data_must_match_groups(self):
        lik = LogisticLikelihood(doses=(0.1, 0.2), trials=(5, 5))
        with pytest.raises(ValidationError):
            BayesModel(lik, (1,), flat_prior())
        with pytest.raises(ValidationError):
            BayesModel(lik, (1, 6), flat_prior())


class TestPosteriorContainer:
    def test_analytic_xor_sampled(self):
        with pytest.raises(ValidationError):
            Posterior()
        with pytest.raises(ValidationError):
            Posterior(
                distribution=Gamma(1.0, 1.0),
                draws=EmpiricalMeasure(np.ones((1000, 1))),
                diagnostics=object(),
            )

    def test_sampled_posterior_needs_enough_draws(self):
        with pytest.raises(ValidationError):
            Posterior(draws=EmpiricalMeasure(np.ones((999, 1))), diagnostics=object())

    def test_sampled_posterior_needs_diagnostics(self):
        with pytest.raises(ValidationError):
            Posterior(draws=EmpiricalMeasure(np.ones((1000, 1))))

    def test_dim_reflects_draw_cloud(self):
        cloud = np.random.default_rng(1).normal(size=(1000, 3))
        post = Posterior(draws=EmpiricalMeasure(cloud), diagnostics=object())
        assert post.dim == 3
        assert not post.is_analytic
        assert Posterior(distribution=Gamma(1.0, 1.0)).dim == 1


class TestLogPosteriorDensity:
    @pytest.mark.parametrize(
        "model",
        [
            BayesModel(PoissonLikelihood(), (3, 5, 4), proper_prior(Gamma(2.0, 1.0))),
            BayesModel(PoissonLikelihood(), (3, 5, 4), flat_prior()),
            BayesModel(BinomialLikelihood(trials=10), (7,), proper_prior(Beta(0.5, 0.5))),
            BayesModel(
                NormalVarianceLikelihood(mean=0.0), NV_DATA, proper_prior(InverseGamma(3.0, 2.0))
            ),
            BayesModel(NormalVarianceLikelihood(mean=0.0), NV_DATA, jeffreys_variance_prior()),
        ],
        ids=["poisson-proper", "poisson-flat", "binomial", "variance-proper", "variance-jeffreys"],
    )
    def test_matches_analytic_posterior_up_to_a_constant(self, model):
        post = conjugate_update(model)
        pdf = post.distribution.pdf_fn()
        qf = post.distribution.quantile_fn()
        thetas = [float(qf(np.asarray([u]))[0]) for u in (0.2, 0.5, 0.8)]
        offsets = [
            log_posterior_unnorm(model, t) - math.log(float(pdf(np.asarray([t]))[0]))
            for t in thetas
        ]
        assert max(offsets) - min(offsets) < 1e-8

    def test_out_of_support_is_minus_infinity(self):
        model = BayesModel(PoissonLikelihood(), (3,), flat_prior())
        assert log_posterior_unnorm(model, -1.0) == -math.inf


class TestPosteriorPredictive:
    def test_poisson_gamma_predictive_mean(self):
        model = BayesModel(PoissonLikelihood(), (3, 5, 4), proper_prior(Gamma(2.0, 1.0)))
        post = conjugate_update(model)
        rng = np.random.default_rng(42)
        draws = posterior_predictive_sample(post, model, 20_000, rng)
        assert draws.shape == (20_000,)
        assert np.all(draws >= 0)
        a, b = post.distribution.params
        mean, var = a / b, (a / b) * (1 + 1 / b) + 0  # NB mean and a variance floor
        assert abs(draws.mean() - mean) < 5 * math.sqrt(var * (1 + a / b)) / math.sqrt(20_000)

    def test_binomial_predictive_stays_within_trials(self):
        model = BayesModel(BinomialLikelihood(trials=10), (7,), flat_prior())
        post = conjugate_update(model)
        draws = posterior_predictive_sample(post, model, 5000, np.random.default_rng(7))
        assert np.all((draws >= 0) & (draws <= 10))

    def test_seeded_predictive_is_deterministic(self):
        model = BayesModel(PoissonLikelihood(), (3,), flat_prior())
        post = conjugate_update(model)
        d1 = posterior_predictive_sample(post, model, 100, np.random.default_rng(5))
        d2 = posterior_predictive_sample(post, model, 100, np.random.default_rng(5))
        assert np.array_equal(d1, d2)
