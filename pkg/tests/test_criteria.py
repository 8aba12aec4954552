"""Identity verifiers, kernel-ratio diagnostics, and the weighted ratio family."""

import math
import warnings

import numpy as np
import pytest

import holocomp as h


# ---------------------------------------------------------------------------
# substitution identity


def test_identity_pair_substitution_gap_is_tiny():
    r = h.verify_change_of_variables(
        h.identity_symbol(), h.identity_symbol(), h.WeightPair(0.3, 0.3), "band_kernel"
    )
    assert r.gap < 1e-6
    assert r.lhs > 0 and r.rhs > 0


def test_gap_field_matches_reported_sides():
    r = h.verify_change_of_variables(
        h.Moebius(0.4), h.Moebius(-0.2), h.WeightPair(0.25, 0.25), "one"
    )
    want = abs(r.lhs - r.rhs) / max(abs(r.lhs), abs(r.rhs), 1e-300)
    assert r.gap == pytest.approx(want, rel=1e-12)
    assert r.resolution == dict(h.resolution_parameters(0), level=0, weight_form="log")


def test_resolution_ladder_doubles_density():
    p0 = h.resolution_parameters(0)
    p1 = h.resolution_parameters(1)
    assert p0 == {"q": 6, "angular": 24, "j0": 10, "j1": 8}
    assert p1["q"] == 2 * p0["q"] and p1["angular"] == 2 * p0["angular"]
    assert p1["j0"] == p0["j0"] + 2 and p1["j1"] == p0["j1"] + 2


def test_unknown_integrand_name_rejected_with_choices():
    with pytest.raises(h.DomainError, match="band_kernel"):
        h.verify_change_of_variables(
            h.Moebius(0.2), h.Moebius(0.2), h.WeightPair(0.3, 0.3), "nope"
        )


def test_builtin_integrands_nonnegative_on_samples():
    rng = np.random.default_rng(4)
    z1 = 0.8 * (rng.normal(size=32) + 1j * rng.normal(size=32)) / 3
    z2 = 0.8 * (rng.normal(size=32) + 1j * rng.normal(size=32)) / 3
    for name, g in h.BUILTIN_INTEGRANDS.items():
        vals = np.asarray(g.fn(z1, z2), dtype=float)
        assert np.all(vals >= 0), name


# ---------------------------------------------------------------------------
# norm expansion, two routes


def test_norm_expansion_moebius_pair_fixture():
    rep = h.verify_separated_norm_expansion(
        h.Separated(h.Moebius(0.2 + 0.1j), h.Moebius(-0.3)),
        h.WeightPair(0.5, 0.5),
        h.TaylorGrid2D([[0, 0, 0], [1, 0, 0.5]]),
    )
    assert rep.total_gap < 1e-3
    assert isinstance(rep.term_gaps, dict) and rep.term_gaps
    assert rep.route_coefficient and rep.route_counting


def test_norm_expansion_truncation_sentinel():
    with pytest.raises(h.AccuracyError):
        h.verify_separated_norm_expansion(
            h.Separated(h.Moebius(0.3), h.Moebius(-0.2)),
            h.WeightPair(0.25, 0.25),
            h.TaylorGrid2D([[0, 0], [0, 1]]),
            order=4,
        )


# ---------------------------------------------------------------------------
# kernel ratio


def test_identity_kernel_ratio_is_exactly_one():
    rep = h.kernel_ratio_sup(h.KernelRatioQuery(h.identity_symbol(), 1.0))
    assert rep.sup == 1.0
    assert np.max(np.abs(rep.values - 1.0)) < 1e-12
    assert rep.n_flagged_points == 0


def test_moebius_kernel_ratio_hits_closed_form():
    alpha, beta = 0.5, 1.0
    rep = h.kernel_ratio_sup(h.KernelRatioQuery(h.Moebius(alpha), beta))
    oracle = ((1.0 + alpha) / (1.0 - alpha)) ** (beta / (beta + 2.0))
    assert abs(rep.sup - oracle) / oracle < 0.01


def test_beta_zero_moebius_ratio_is_constant():
    rep = h.kernel_ratio_sup(h.KernelRatioQuery(h.Moebius(0.3 + 0.2j), 0.0))
    assert np.max(np.abs(rep.values - 1.0)) < 1e-12


def test_ratio_matrix_is_symmetric():
    rep = h.kernel_ratio_sup(h.KernelRatioQuery(h.Moebius(0.3), 1.0))
    assert np.max(np.abs(rep.values - rep.values.T)) < 1e-12


def test_critical_point_flagging_and_finite_sup():
    rep = h.kernel_ratio_sup(h.KernelRatioQuery(h.Polynomial([0, 0, 1]), 1.0))
    assert rep.n_flagged_points >= 1
    assert np.isfinite(rep.sup)


def test_operator_bound_power_relation():
    q = h.KernelRatioQuery(h.Moebius(0.5), 1.0)
    rep = h.kernel_ratio_sup(q)
    assert h.operator_norm_bound(q) == pytest.approx(rep.sup ** 3.0, rel=1e-12)
    qi = h.KernelRatioQuery(h.identity_symbol(), 2.5)
    assert h.operator_norm_bound(qi) == pytest.approx(1.0)


def test_operator_bound_undefined_when_everything_flagged():
    # a huge flag threshold marks the whole grid
    with pytest.raises(h.UndefinedBoundError):
        h.operator_norm_bound(h.KernelRatioQuery(h.Moebius(0.2), 1.0, eps=10.0))


def test_tied_weight_relation():
    assert h.tied_weight(0.5, 0.25) == pytest.approx(0.5)
    assert h.tied_weight(0.25, 0.25) == pytest.approx(0.0)


# ---------------------------------------------------------------------------
# difference-quotient ratio family


def test_ratio_record_frozen_values():
    f = h.TaylorGrid1D([0, 1, 0.5, 0.25j])
    rec = h.balooch_wu_ratio(f, 0.0, 0.0, -0.75)
    assert rec.seminorm == pytest.approx(18.75, rel=1e-12)
    assert rec.double_integral == pytest.approx(0.9489434304934015, rel=1e-9)
    assert rec.ratio == pytest.approx(0.05061031629298141, rel=1e-9)
    assert rec.weight_exponent == pytest.approx(1.5)
    assert not rec.warned


def test_ratio_scale_invariance():
    f = h.TaylorGrid1D([0, 1, 0.5, 0.25j])
    g = h.TaylorGrid1D([0, 3.7, 3.7 * 0.5, 3.7 * 0.25j])
    r1 = h.balooch_wu_ratio(f, 0.0, 0.0, -0.75).ratio
    r2 = h.balooch_wu_ratio(g, 0.0, 0.0, -0.75).ratio
    assert r2 == pytest.approx(r1, rel=1e-12)


def test_constant_function_gives_zero_ratio():
    rec = h.balooch_wu_ratio(h.TaylorGrid1D([3.0]), 0.0, 0.0, -0.75)
    assert rec.ratio == 0.0


@pytest.mark.parametrize(
    "params", [(0.0, 0.0, 1.5), (0.0, 0.0, -1.2), (-1.5, 0.0, -0.5), (2.0, 2.0, 3.0)]
)
def test_parameter_window_enforced(params):
    f = h.TaylorGrid1D([0, 1])
    with pytest.raises(h.DomainError):
        h.balooch_wu_ratio(f, *params)


def test_family_band_and_members():
    fam = [
        h.TaylorGrid1D([0, 1, 0.5, 0.25j]),
        h.TaylorGrid1D([0, 1]),
        h.TaylorGrid1D([0, 0, 0.7, 0, 0.2]),
        h.TaylorGrid1D([0.3, 0.3, 0, 0.1]),
    ]
    rep = h.balooch_wu_family(fam, 0.0, 0.0, -0.75)
    assert len(rep.records) == 4
    assert rep.min_ratio == pytest.approx(0.023199797941547754, rel=1e-6)
    assert rep.max_ratio == pytest.approx(0.0873621173053567, rel=1e-6)
    assert 0.0 < rep.min_ratio <= rep.max_ratio
    assert rep.max_ratio / rep.min_ratio < 10.0


def test_steep_kernel_issues_resolution_warning():
    f = h.TaylorGrid1D([0, 1, 0.5, 0.25j])
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        rec = h.balooch_wu_ratio(f, 1.0, 1.0, 1.0)
    assert rec.warned
    assert any("kernel exponent" in str(x.message) for x in w)
