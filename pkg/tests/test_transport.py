"""Transport distances: quadrature routes, exact matching, and the
independent brute-force oracle used by the acceptance suite."""

import itertools
import math

import numpy as np
import pytest

from priorimpact import (
    Beta,
    EmpiricalMeasure,
    Gamma,
    Normal,
    ValidationError,
    subsampled_wp,
    truncated_support,
    w1_cdf_detailed,
    w1_empirical_1d,
    w1_quantile,
    wp_empirical,
    wp_quantile,
)


def brute_force_wp(p: float, a: EmpiricalMeasure, b: EmpiricalMeasure) -> float:
    """Exact order-p distance between equal-size uniform clouds by trying
    every permutation pairing (Euclidean ground metric). Independent of
    the production solver."""
    assert a.size == b.size
    xs, ys = a.points, b.points
    best = math.inf
    for perm in itertools.permutations(range(a.size)):
        cost = 0.0
        for i, j in enumerate(perm):
            cost += math.sqrt(float(np.sum((xs[i] - ys[j]) ** 2))) ** p
        best = min(best, cost)
    return (best / a.size) ** (1.0 / p)


class TestEmpiricalMeasure:
    def test_one_dimensional_input_gets_column_shape(self):
        m = EmpiricalMeasure(np.array([3.0, 1.0, 2.0]))
        assert m.points.shape == (3, 1)
        assert m.size == 3 and m.dim == 1
        assert np.array_equal(m.sorted_1d, [1.0, 2.0, 3.0])

    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            EmpiricalMeasure(np.array([1.0, np.nan]))

    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            EmpiricalMeasure(np.empty((0, 2)))


class TestAnalyticRoutes:
    PAIRS = [
        (Gamma(2.5, 2.5), Gamma(3.5, 1.5)),
        (Gamma(52.5, 12.5), Gamma(53.5, 11.5)),
        (Beta(7.5, 3.5), Beta(8.0, 4.0)),
        (Normal(0.0, 1.0), Normal(0.5, 2.0)),
    ]

    @pytest.mark.parametrize("d1,d2", PAIRS, ids=lambda d: repr(d))
    def test_cdf_and_quantile_routes_agree(self, d1, d2):
        lo, hi, tail = truncated_support(d1.quantile_fn(), d2.quantile_fn())
        by_cdf, err = w1_cdf_detailed(d1.cdf_fn(), d2.cdf_fn(), (lo, hi), tail_bound=tail)
        by_quantile = w1_quantile(d1.quantile_fn(), d2.quantile_fn())
        assert err < 1e-6
        assert abs(by_cdf - by_quantile) < 1e-6

    def test_normal_shift_has_closed_distance(self):
        d = w1_quantile(Normal(0.0, 1.0).quantile_fn(), Normal(0.7, 1.0).quantile_fn())
        assert abs(d - 0.7) < 1e-7

    def test_normal_scale_order_two(self):
        # equal means: W2 between N(0,s1) and N(0,s2) is |s1 - s2|
        d = wp_quantile(2.0, Normal(0.0, 1.0).quantile_fn(), Normal(0.0, 3.0).quantile_fn())
        assert abs(d - 2.0) < 1e-7

    def test_identical_distributions_have_zero_distance(self):
        d = w1_quantile(Gamma(2.0, 2.0).quantile_fn(), Gamma(2.0, 2.0).quantile_fn())
        assert d < 1e-12


class TestEmpiricalRoutes:
    def test_sorted_route_matches_assignment_in_1d(self):
        rng = np.random.default_rng(5)
        a = EmpiricalMeasure(rng.normal(0, 1, 40))
        b = EmpiricalMeasure(rng.normal(1, 2, 40))
        sorted_val = w1_empirical_1d(a, b)
        lsa_val, _plan = wp_empirical(1.0, a, b)
        assert abs(sorted_val - lsa_val) < 1e-12

    def test_unequal_sizes_sorted_route(self):
        a = EmpiricalMeasure(np.array([0.0, 1.0]))
        b = EmpiricalMeasure(np.array([0.0, 0.5, 1.0]))
        # exact value by the LP route must agree with the quantile pairing
        lp_val, _ = wp_empirical(1.0, a, b)
        assert abs(w1_empirical_1d(a, b) - lp_val) < 1e-12

    def test_translation_invariance(self):
        rng = np.random.default_rng(9)
        x = rng.normal(0, 1, (15, 2))
        y = rng.normal(0, 1, (15, 2))
        base, _ = wp_empirical(2.0, EmpiricalMeasure(x), EmpiricalMeasure(y))
        shifted, _ = wp_empirical(2.0, EmpiricalMeasure(x + 3.0), EmpiricalMeasure(y + 3.0))
        assert abs(base - shifted) < 1e-9

    def test_matches_brute_force_small(self):
        rng = np.random.default_rng(3)
        for p in (1.0, 2.0):
            a = EmpiricalMeasure(rng.normal(0, 1, (5, 2)))
            b = EmpiricalMeasure(rng.normal(0.5, 1, (5, 2)))
            solver, _ = wp_empirical(p, a, b)
            assert abs(solver - brute_force_wp(p, a, b)) < 1e-10

    def test_plan_is_a_permutation_for_equal_sizes(self):
        rng = np.random.default_rng(4)
        a = EmpiricalMeasure(rng.normal(0, 1, (6, 3)))
        b = EmpiricalMeasure(rng.normal(0, 1, (6, 3)))
        _val, plan = wp_empirical(2.0, a, b)
        row_mass, col_mass = plan.marginals(6, 6)
        assert np.allclose(row_mass, 1.0 / 6.0)
        assert np.allclose(col_mass, 1.0 / 6.0)
        # every pair carries the full atom mass: a pure permutation coupling
        assert len(plan.pairs) == 6
        for _i, _j, mass in plan.pairs:
            assert abs(mass - 1.0 / 6.0) < 1e-12

    def test_subsampled_route_tracks_full_value(self):
        rng = np.random.default_rng(8)
        a = EmpiricalMeasure(rng.normal(0, 1, (400, 2)))
        b = EmpiricalMeasure(rng.normal(0.5, 1, (400, 2)))
        full, _ = wp_empirical(1.0, a, b)
        mean, sd = subsampled_wp(a, b, 1.0, 150, 8, np.random.default_rng(0))
        assert abs(mean - full) < 5 * sd + 0.05
