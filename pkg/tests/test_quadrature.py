"""Disc quadrature rules, refined panel rules, and seeded sampling."""

import numpy as np
import pytest

import holocomp as h


def const_one(z):
    return np.ones_like(z, dtype=float)


@pytest.mark.parametrize("gamma", [0.0, 1.0, 2.5])
def test_rule_mass_matches_closed_form(gamma):
    # integral of (1-|z|^2)^gamma over the disc, divided by pi, is 1/(gamma+1)
    rule = h.build_rule(gamma, 40, 64)
    res = h.integrate_disc(const_one, rule)
    assert abs(res.value - 1.0 / (gamma + 1.0)) < 1e-13


def test_second_moment_unweighted_disc():
    rule = h.build_rule(0.0, 40, 64)
    res = h.integrate_disc(lambda z: np.abs(z) ** 2, rule)
    assert abs(res.value - 0.5) < 1e-13


def test_refined_rule_log_weight_mass():
    # weight ((-log t)/2)^c with c=1 integrates to 1/2 over [0,1]
    rule = h.build_refined_rule(0.0, 1.0)
    res = h.integrate_disc(const_one, rule)
    assert abs(res.value - 0.5) < 1e-4


def test_integrate_disc_result_reports_nodes():
    rule = h.build_rule(0.0, 16, 32)
    res = h.integrate_disc(const_one, rule)
    assert isinstance(res, h.IntegralResult)
    assert res.nodes_used > 0
    assert res.error_estimate >= 0.0


def test_unattainable_tolerance_raises_with_estimate():
    rule = h.build_rule(0.0, 40, 64)
    near_singular = lambda z: 1.0 / np.abs(1.0 - 0.999 * z) ** 0.5
    with pytest.raises(h.AccuracyError) as exc:
        h.integrate_disc(near_singular, rule, tol=1e-15)
    assert np.isfinite(exc.value.estimate)


def test_coarsen_rule_shrinks_node_count():
    rule = h.build_rule(0.0, 40, 64)
    coarse = h.coarsen_rule(rule)
    assert coarse.t.size < rule.t.size


def test_mc_mean_is_weighted_sum_with_batch_stderr():
    vals = np.ones(64)
    wts = np.full(64, 0.25)
    m, se = h.mc_mean(vals, wts)
    assert m == pytest.approx(16.0)
    assert se == pytest.approx(0.0, abs=1e-15)

    rng = np.random.default_rng(5)
    noisy = rng.normal(size=6400)
    m2, se2 = h.mc_mean(noisy, np.ones(6400))
    assert se2 > 0.0
    # repeatable on identical input
    m3, se3 = h.mc_mean(noisy, np.ones(6400))
    assert (m2, se2) == (m3, se3)


def test_sample_cloud_deterministic_and_massed():
    c1 = h.sample_dVbeta(1.0, 2000, 7)
    c2 = h.sample_dVbeta(1.0, 2000, 7)
    assert np.array_equal(c1.points, c2.points)
    assert np.array_equal(c1.weights, c2.weights)
    assert c1.points.shape == (2000, 2)
    assert c1.total_mass == pytest.approx(0.25, rel=1e-12)

    c3 = h.sample_dVbeta(1.0, 2000, 8)
    assert not np.array_equal(c1.points, c3.points)


def test_sample_cloud_points_inside_bidisc():
    c = h.sample_dVbeta(0.0, 5000, 11)
    assert np.all(np.abs(c.points) < 1.0)
    assert c.size == 5000


def test_integrate2d_separable_product():
    rule = h.build_rule(0.0, 24, 48)
    res = h.integrate2d(lambda z1, z2: np.abs(z1) ** 2 * np.ones_like(np.abs(z2)), rule, rule)
    # (1/2) * 1 from the two factors
    assert abs(res.value - 0.5) < 1e-12
