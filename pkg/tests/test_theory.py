import numpy as np
import pytest
from conftest import random_parameter, reference_generator

from eiolib.errors import InputValidationError
from eiolib.infomatrix import InfoMatrix
from eiolib.model import region_membership, score
from eiolib.parameter import LocalRegion, NoiseModel, ScoreVector, TruthSpec
from eiolib.penalty import ElementwisePenalty, PenaltyConfig, RidgePenalty, RowScalarPenalty, RowTruncationPenalty
from eiolib.schur import min_eig
from eiolib.theory import (
    Applicability,
    assemble_info,
    bias_bound_check,
    bias_closed_form,
    deviation_radius,
    efficient_score,
    effective_dimension,
    expansion_bounds,
    fisher_leading_term,
    leading_covariance,
    normalized_score_covariance,
    penalized_bias_vector,
    prepare_theorem,
    score_covariance,
    score_norm_bound,
    semiparametric_block,
    variance_bound,
)


def consistent_info(rng, p, q, mu2, pen=None):
    param = random_parameter(rng, p, q)
    return InfoMatrix.from_parameter(param.with_values(z=param.a @ param.theta), mu2, pen)


def test_semiparametric_block_inverts_the_theta_block_of_the_inverse(rng):
    p = 3
    info = consistent_info(rng, p, 4, 8.0, PenaltyConfig(RidgePenalty(0.5)))
    inverse = np.linalg.inv(info.dense())
    np.testing.assert_allclose(semiparametric_block(info), np.linalg.inv(inverse[:p, :p]), rtol=1e-8, atol=1e-10)


def test_leading_term_matches_dense_solve(rng):
    p, q = 3, 4
    info = consistent_info(rng, p, q, 5.0)
    s = ScoreVector(rng.standard_normal(q), rng.standard_normal((q, p)), 5.0)
    dense = np.linalg.solve(info.dense(), s.as_parameter().flat())
    lead = fisher_leading_term(info, s)
    np.testing.assert_allclose(lead, dense[:p], rtol=1e-9, atol=1e-10)
    xi = efficient_score(info, s)
    assert xi @ xi == pytest.approx(lead @ info.schur_theta @ lead, rel=1e-10)


def test_zero_score_gives_zero_leading_term(rng):
    info = consistent_info(rng, 2, 3, 4.0)
    np.testing.assert_array_equal(fisher_leading_term(info, ScoreVector.zero(2, 3, 4.0)), 0.0)


@pytest.mark.parametrize(
    "pen",
    [
        PenaltyConfig(RidgePenalty(0.7)),
        PenaltyConfig(RidgePenalty(0.2), RowScalarPenalty([1.0, 3.0, 0.0, 2.0, 0.5])),
        PenaltyConfig(RidgePenalty(0.2), RowTruncationPenalty(3)),
        PenaltyConfig.truncation(2, 4),
    ],
)
def test_bias_closed_form_matches_the_block_solve(small_truth, pen):
    mu2 = 30.0
    info = InfoMatrix.from_parameter(small_truth.as_parameter(), mu2, pen, provenance="truth")
    closed = bias_closed_form(small_truth, mu2, pen)
    np.testing.assert_allclose(closed.vector, penalized_bias_vector(info, small_truth, pen).theta, rtol=1e-9, atol=1e-10)


def test_operator_bias_matrix_on_scalars():
    truth = TruthSpec([0.0], [[1.0]])
    result = bias_closed_form(truth, 1.0, PenaltyConfig(operator=ElementwisePenalty([[1.0]])))
    np.testing.assert_allclose(result.s_k, [[0.25]])
    np.testing.assert_allclose(result.vector, [0.0])


def test_bias_without_operator_penalty(small_truth):
    pen = PenaltyConfig(RidgePenalty(1.0))
    result = bias_closed_form(small_truth, 20.0, pen, q_map=np.eye(3)[:1])
    np.testing.assert_array_equal(result.s_k, 0.0)
    np.testing.assert_allclose(result.schur @ result.vector, small_truth.theta_star, rtol=1e-10)
    assert result.weighted.shape == (1,)


def test_effective_dimension_with_row_truncation():
    dims = effective_dimension(NoiseModel(), 1.0, PenaltyConfig(operator=RowTruncationPenalty(3)), 2.0, p=5, q=10)
    assert dims.p_a == pytest.approx(240.0)
    assert dims.p_z == pytest.approx(160.0)
    assert dims.to_dict()["total"] == pytest.approx(400.0)


def test_deviation_radius():
    assert deviation_radius(np.eye(4), 2.0) == pytest.approx(4.0)
    assert deviation_radius(np.zeros((3, 3)), 1.0) == 0.0
    with pytest.raises(InputValidationError):
        deviation_radius(np.eye(2), 0.0)


def test_variance_bound_on_scalars():
    bound = variance_bound(1.0, 0.0, 0.1, 2.0, [[4.0]])
    np.testing.assert_allclose(bound.matrix, [[8.0]])
    assert bound.trace == pytest.approx(8.0)
    assert bound.efficient_trace == pytest.approx(8.0)


def test_score_covariance_diagonal_of_the_leading_term(rng):
    info = consistent_info(rng, 2, 3, 6.0)
    noise = NoiseModel(0.5, 2.0)
    full = score_covariance(info, noise)
    np.testing.assert_allclose(leading_covariance(info, noise), full[:2, :2], rtol=1e-12, atol=1e-14)
    inverse = np.linalg.inv(info.dense())
    var_score = np.diag(np.concatenate([np.zeros(2), np.full(3, 0.25), np.full(6, 6.0 * 4.0)]))
    np.testing.assert_allclose(full, inverse @ var_score @ inverse, rtol=1e-8, atol=1e-12)


def test_semiparametric_block_dominates_the_scaled_metric_inside_the_region(small_truth):
    region = LocalRegion.from_truth(small_truth, 1e6)
    assert region_membership(small_truth.as_parameter(), region, small_truth).inside
    info = InfoMatrix.from_parameter(small_truth.as_parameter(), 1e6)
    assert min_eig(semiparametric_block(info) - region.d2 / region.kappa**2) >= -1e-8


def test_noiseless_expansion_has_zero_remainders(small_truth):
    mu2 = 100.0
    region = LocalRegion.from_truth(small_truth, mu2)
    setup = prepare_theorem(small_truth, mu2, None, NoiseModel(0.0, 0.0), region)
    assert setup.check.applicable
    assert setup.p_bar == 0.0 and setup.b_d == pytest.approx(0.0, abs=1e-12)
    zero = score(small_truth.noiseless_observation(mu2), small_truth)
    for item in ("fisher", "pac"):
        report = expansion_bounds(setup, item, zero, theta_fit=setup.theta_star_g)
        assert report.remainder_bound == pytest.approx(0.0, abs=1e-12)
        assert report.passed
    squared = expansion_bounds(setup, "squared", observed=0.0)
    assert squared.details["alpha_q"] == 0.0
    assert squared.passed


def test_expansion_bounds_validate_their_inputs(small_truth):
    region = LocalRegion.from_truth(small_truth, 100.0)
    setup = prepare_theorem(small_truth, 100.0, None, NoiseModel(), region)
    with pytest.raises(InputValidationError):
        expansion_bounds(setup, "fisher")
    with pytest.raises(InputValidationError):
        expansion_bounds(setup, "everything")
    with pytest.raises(InputValidationError):
        prepare_theorem(small_truth, 100.0, None, NoiseModel(), region, x=0.0)


def test_score_norm_bound_without_operator_penalty(small_obs, small_truth):
    s = score(small_obs, small_truth)
    omega2 = float(s.z_part @ s.z_part)
    noise2 = float(np.sum(s.operator_noise**2))
    bound = score_norm_bound(s, None, kappa=2.0)
    assert bound.nuisance_squared == pytest.approx(omega2 + noise2)
    assert bound.full_squared == pytest.approx(16.0 * (omega2 + noise2))
    truncated = score_norm_bound(s, PenaltyConfig(operator=RowTruncationPenalty(2)), kappa=1.0)
    assert truncated.nuisance_squared == pytest.approx(omega2 + float(np.sum(s.operator_noise[:2] ** 2)))


def test_normalized_score_covariance_scales_the_blocks(small_truth):
    mu2 = 50.0
    info = assemble_info(small_truth, mu2, at="truth")
    region = LocalRegion.from_truth(small_truth, mu2)
    noise = NoiseModel(0.5, 2.0)
    p, q = small_truth.p, small_truth.q
    scale = np.eye(info.dim)
    scale[:p, :p] = region.d
    scale[p + q :, p + q :] *= np.sqrt(mu2)
    np.testing.assert_allclose(
        normalized_score_covariance(info, noise, region),
        scale @ score_covariance(info, noise) @ scale.T,
        rtol=1e-9,
        atol=1e-12,
    )


def test_unpenalized_bias_check_is_exact():
    generator = reference_generator(p=4, q=6)
    setup = prepare_theorem(
        generator.truth(), generator.spec.mu2, None, generator.noise_model(), generator.region()
    )
    report = bias_bound_check(setup)
    assert report.item == "bias"
    assert report.observed_remainder == pytest.approx(0.0, abs=1e-6)
    assert report.passed


def test_applicability_slack_ratios():
    check = Applicability(radius=3.0, r=1.0, b=0.5, curvature=0.1)
    assert check.radius_slack == pytest.approx(2.0)
    assert check.curvature_slack == pytest.approx(4.0 / 0.9)
    assert check.slack == pytest.approx(2.0)
    payload = check.to_dict()
    assert payload["radius_slack"] == pytest.approx(2.0)
    assert payload["applicable"] is True


def test_applicability_slack_without_noise_is_unbounded():
    check = Applicability(radius=1.0, r=0.0, b=0.0, curvature=5.0)
    assert check.radius_slack == check.curvature_slack == np.inf
    assert check.to_dict()["radius_slack"] is None
    assert check.to_dict()["curvature_slack"] is None


def test_reports_carry_plain_booleans():
    generator = reference_generator()
    setup = prepare_theorem(
        generator.truth(), generator.spec.mu2, None, generator.noise_model(), generator.region()
    )
    assert type(setup.check.applicable) is bool
    assert type(setup.check.to_dict()["applicable"]) is bool
    squared = expansion_bounds(setup, "squared", observed=0.0)
    assert type(squared.passed) is bool
    assert type(squared.to_dict()["applicable"]) is bool
    assert type(bias_bound_check(setup).to_dict()["applicable"]) is bool
