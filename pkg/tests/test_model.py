import numpy as np
import pytest
from conftest import random_parameter

from eiolib.errors import DimensionMismatchError
from eiolib.model import (
    concavity_margin,
    fourth_directional,
    gradient,
    hessian_dense,
    hessian_quadratic_form,
    line_coefficients,
    metric_blocks,
    numerical_gradient,
    objective,
    region_membership,
    sample_local_point,
    score,
    smoothness_constants,
    third_directional,
)
from eiolib.parameter import FullParameter, LocalRegion, Observation, TruthSpec
from eiolib.penalty import ElementwisePenalty, PenaltyConfig, RidgePenalty


def test_objective_at_data_point_is_structural_residual_only():
    obs = Observation([1.0, 2.0], [[1.0], [1.0]], 3.0)
    param = FullParameter([1.0], [1.0, 2.0], [[1.0], [1.0]])
    assert objective(obs, param) == pytest.approx(-0.5)


def test_gradient_matches_finite_differences(rng):
    p, q = 3, 2
    pen = PenaltyConfig(RidgePenalty(0.7), ElementwisePenalty(rng.uniform(size=(q, p))))
    obs = Observation(rng.standard_normal(q), rng.standard_normal((q, p)), 2.5)
    param = random_parameter(rng, p, q)
    numeric = numerical_gradient(lambda x: objective(obs, FullParameter.from_flat(x, p, q), pen), param.flat())
    np.testing.assert_allclose(gradient(obs, param, pen).flat(), numeric, atol=1e-6)


def test_gradient_reports_zero_on_masked_coordinates(rng):
    pen = PenaltyConfig.truncation(1, 1)
    obs = Observation(rng.standard_normal(2), rng.standard_normal((2, 2)), 1.0)
    grad = gradient(obs, pen.project(random_parameter(rng, 2, 2)), pen)
    assert grad.theta[1] == 0.0
    np.testing.assert_array_equal(grad.a[1], 0.0)


def test_derivatives_match_the_quartic_along_a_line(rng):
    p, q, mu2 = 3, 4, 6.0
    obs = Observation(rng.standard_normal(q), rng.standard_normal((q, p)), mu2)
    param = random_parameter(rng, p, q)
    u = random_parameter(rng, p, q, scale=0.5)
    c = line_coefficients(obs, param, u)
    assert hessian_quadratic_form(param, mu2, u) == pytest.approx(-2.0 * c[2], rel=1e-7)
    assert third_directional(param, u) == pytest.approx(-6.0 * c[3], rel=1e-7, abs=1e-9)
    assert fourth_directional(u) == pytest.approx(-24.0 * c[4], rel=1e-7)


def test_scalar_derivatives():
    param = FullParameter([0.0], [0.0], [[1.0]])
    u = FullParameter([1.0], [0.0], [[1.0]])
    assert third_directional(param, u) == pytest.approx(6.0)
    assert fourth_directional(u) == pytest.approx(12.0)


def test_fourth_derivative_does_not_depend_on_the_point(rng):
    u = random_parameter(rng, 2, 3)
    obs = Observation(np.zeros(3), np.zeros((3, 2)), 1.0)
    first = line_coefficients(obs, random_parameter(rng, 2, 3), u)[4]
    second = line_coefficients(obs, random_parameter(rng, 2, 3, scale=3.0), u)[4]
    assert first == pytest.approx(second, rel=1e-7)


def test_direction_dims_are_checked(rng):
    with pytest.raises(DimensionMismatchError):
        third_directional(random_parameter(rng, 2, 3), random_parameter(rng, 3, 3))


def test_score_blocks(small_obs, small_truth):
    s = score(small_obs, small_truth)
    np.testing.assert_allclose(s.z_part, small_obs.z_obs - small_truth.image_star)
    np.testing.assert_allclose(s.operator_noise, small_obs.mu * (small_obs.a_hat - small_truth.a_star))
    np.testing.assert_array_equal(s.theta_part, np.zeros(small_truth.p))


def test_score_is_the_gradient_at_truth_without_penalty(small_obs, small_truth):
    s = score(small_obs, small_truth)
    grad = gradient(small_obs, small_truth.as_parameter())
    np.testing.assert_allclose(grad.flat(), s.as_parameter().flat(), atol=1e-12)


def test_region_membership_at_truth(small_truth):
    region = LocalRegion.from_truth(small_truth, 100.0)
    diag = region_membership(small_truth.as_parameter(), region, small_truth)
    assert diag.operator_deviation == 0.0
    assert diag.to_dict()["inside"] == diag.inside


def test_smoothness_bounds_hold_on_local_points(rng, small_truth):
    region = LocalRegion.from_truth(small_truth, 400.0)
    tau3, tau4 = smoothness_constants(region, region.mu)
    metric = metric_blocks(region, small_truth.q)
    for _ in range(25):
        point = sample_local_point(region, small_truth, rng)
        assert region_membership(point, region, small_truth).inside
        u = metric.normalize(random_parameter(rng, small_truth.p, small_truth.q))
        assert abs(third_directional(point, u)) <= tau3 * (1.0 + 1e-10)
        assert fourth_directional(u) <= tau4 * (1.0 + 1e-10)


def test_concavity_holds_when_theta_vanishes(rng):
    a_star = rng.standard_normal((4, 2)) + 2.0 * np.eye(4, 2)
    truth = TruthSpec(np.zeros(2), a_star)
    region = LocalRegion.from_truth(truth, 25.0)
    margin = concavity_margin(truth.as_parameter(), region)
    assert margin.holds()
    assert margin.nuisance >= -1e-10


def test_dense_hessian_reproduces_the_quadratic_form(rng):
    p, q, mu2 = 2, 3, 4.0
    param = random_parameter(rng, p, q)
    u = random_parameter(rng, p, q)
    dense = hessian_dense(param, mu2)
    np.testing.assert_array_equal(dense, dense.T)
    assert u.flat() @ dense @ u.flat() == pytest.approx(hessian_quadratic_form(param, mu2, u), rel=1e-10)
