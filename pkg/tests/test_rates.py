import numpy as np
import pytest

from eiolib.errors import InputValidationError
from eiolib.rates import (
    PHASE_TRANSITION_FLAG,
    SpectralProfile,
    appspace_quantities,
    critical_dimension_check,
    cutoff_risk_bound,
    rate_prediction,
    ridge_risk_bound,
    truncation_bias_bound,
)


def profile_of(n_seq, w2_seq=None):
    n_seq = np.asarray(n_seq, dtype=float)
    w2 = np.arange(1, n_seq.size + 1, dtype=float) ** 2 if w2_seq is None else w2_seq
    return SpectralProfile(n_seq=n_seq, tail_seq=n_seq, w2_seq=w2)


def test_ridge_variance_on_a_short_spectrum():
    risk = ridge_risk_bound(profile_of([100.0, 25.0, 4.0, 1.0]), np.zeros(4), g2=1.0, kappa=2.0)
    assert risk.constants["J"] == 3
    assert risk.variance_term == pytest.approx(5.8)
    assert risk.exact_bias == 0.0


def test_ridge_exact_variance_never_exceeds_the_bound(rng):
    n_seq = np.sort(rng.uniform(0.1, 100.0, size=12))[::-1]
    for g2 in (0.01, 0.5, 3.0):
        risk = ridge_risk_bound(profile_of(n_seq), rng.standard_normal(12), g2=g2, kappa=2.0)
        assert risk.exact_variance <= risk.variance_term * (1.0 + 1e-12)


def test_ridge_flags_the_phase_transition():
    profile = profile_of([100.0, 25.0, 4.0], w2_seq=np.array([1.0, 1e6, 1e12]))
    risk = ridge_risk_bound(profile, np.zeros(3), g2=1.0, kappa=2.0)
    assert PHASE_TRANSITION_FLAG in risk.flags


def test_cutoff_risk():
    profile = profile_of([100.0, 25.0, 4.0])
    risk = cutoff_risk_bound(profile, [1.0, 1.0, 2.0], j=2, kappa=2.0)
    assert risk.variance_term == pytest.approx(0.8)
    assert risk.bias_term == pytest.approx(4.0)
    assert cutoff_risk_bound(profile, [1.0, 1.0, 2.0], j=3, kappa=2.0).bias_term == 0.0
    with pytest.raises(InputValidationError):
        cutoff_risk_bound(profile, [1.0, 1.0, 2.0], j=4, kappa=2.0)


def test_appspace_quantities_on_a_diagonal_operator():
    a_star = np.diag([10.0, 5.0])
    first = appspace_quantities(a_star, 2, 1)
    np.testing.assert_allclose(first.n_seq, [100.0, 25.0])
    assert first.tail == pytest.approx(25.0)
    assert first.applicable is False
    assert type(first.to_dict()["applicable"]) is bool
    full = appspace_quantities(a_star, 2, 2)
    assert full.tail == 0.0
    assert full.trace_bound == pytest.approx(0.05)
    assert full.trace_exact == pytest.approx(0.05)


def test_appspace_trace_bound_dominates_the_exact_trace(rng):
    a_star = np.diag(np.linspace(10.0, 4.0, 5)) + 0.1 * rng.standard_normal((5, 5))
    a_star = np.vstack([a_star, 0.05 * rng.standard_normal((3, 5))])
    result = appspace_quantities(a_star, 3, 6)
    assert result.applicable
    assert result.trace_exact <= result.trace_bound


def test_truncation_bias_bound_vanishes_without_truncation():
    profile = SpectralProfile.parametric(4, 6, s=1.0, beta=1.0, n1=100.0)
    assert truncation_bias_bound(profile, np.ones(4), 4, 6, 2.0).value == 0.0
    assert truncation_bias_bound(profile, [1.0, 0.0, 0.0, 0.0], 1, 4, 2.0).value == 0.0


def test_rate_exponents():
    prediction = rate_prediction(1.0, 1.0, 1.0, 1e5)
    assert prediction.j_exponent == pytest.approx(0.2)
    assert prediction.risk_exponent == pytest.approx(-0.4)
    assert prediction.j_opt == 10
    assert prediction.risk_order == pytest.approx(1e5**-0.4)
    assert rate_prediction(1.0, 1e6, 1.0, 1e5).risk_exponent == pytest.approx(-1.0, abs=1e-5)


def test_rate_prediction_row_count_follows_the_tail():
    profile = SpectralProfile.parametric(20, 30, s=1.0, beta=1.0, n1=1e5)
    prediction = rate_prediction(1.0, 1.0, 1.0, 1e5, p=20, profile=profile)
    n_j = 1e5 * prediction.j_opt**-2.0
    assert profile.tail(prediction.m_opt + 1) <= 0.5 * n_j
    assert profile.tail(prediction.m_opt) > 0.5 * n_j


def test_rate_prediction_validates():
    with pytest.raises(InputValidationError):
        rate_prediction(0.5, 1.0, 1.0, 1e4)
    with pytest.raises(InputValidationError):
        rate_prediction(1.0, 1.0, 1.0, 1e4, rho=0.8)


def test_critical_dimension():
    low = critical_dimension_check(1, 1, 100.0, 100.0)
    assert low.ratio == pytest.approx(1e-4)
    assert low.consistent is True
    high = critical_dimension_check(10, 10, 10.0, 10.0)
    assert high.ratio == pytest.approx(1.0)
    assert not high.consistent


def test_profile_validation():
    with pytest.raises(InputValidationError):
        SpectralProfile(n_seq=[1.0, 2.0], tail_seq=[1.0], w2_seq=[1.0, 1.0])
