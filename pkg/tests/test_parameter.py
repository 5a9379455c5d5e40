import numpy as np
import pytest

from eiolib.errors import DimensionMismatchError, InputValidationError
from eiolib.parameter import FullParameter, LocalRegion, NoiseModel, Observation, ScoreVector, TruthSpec


def test_full_parameter_checks_operator_shape():
    with pytest.raises(DimensionMismatchError):
        FullParameter(np.zeros(2), np.zeros(3), np.zeros((2, 3)))


def test_full_parameter_rejects_non_finite():
    with pytest.raises(InputValidationError):
        FullParameter([np.nan], [0.0], [[0.0]])


def test_full_parameter_is_immutable(rng):
    param = FullParameter(rng.standard_normal(2), rng.standard_normal(3), rng.standard_normal((3, 2)))
    with pytest.raises(ValueError):
        param.theta[0] = 1.0


def test_flat_layout_is_theta_z_then_rows_of_a():
    param = FullParameter([1.0, 2.0], [3.0], [[4.0, 5.0]])
    np.testing.assert_array_equal(param.flat(), [1.0, 2.0, 3.0, 4.0, 5.0])
    rebuilt = FullParameter.from_flat(param.flat(), 2, 1)
    np.testing.assert_array_equal(rebuilt.a, param.a)
    assert param.dim == 5


def test_shifted_moves_every_block():
    param = FullParameter.zeros(2, 1)
    direction = FullParameter([1.0, 1.0], [1.0], [[1.0, 1.0]])
    np.testing.assert_array_equal(param.shifted(direction, 0.5).flat(), np.full(5, 0.5))


def test_observation_validates_rows_and_precision():
    with pytest.raises(DimensionMismatchError):
        Observation(np.zeros(3), np.zeros((2, 2)), 1.0)
    with pytest.raises(InputValidationError):
        Observation(np.zeros(2), np.zeros((2, 2)), -1.0)


def test_truth_image_and_noiseless_observation():
    truth = TruthSpec([1.0, 2.0], [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    np.testing.assert_array_equal(truth.image_star, [1.0, 2.0, 3.0])
    obs = truth.noiseless_observation(4.0)
    assert obs.mu == 2.0
    np.testing.assert_array_equal(obs.a_hat, truth.a_star)


def test_local_region_radius():
    region = LocalRegion(4.0 * np.eye(3), mu2=100.0, delta0=0.1)
    assert region.n_eff == pytest.approx(4.0)
    assert region.radius == pytest.approx(0.1 * 10.0 * 2.0)
    np.testing.assert_allclose(region.d, 2.0 * np.eye(3))


@pytest.mark.parametrize("delta0", [0.0, 0.2])
def test_local_region_rejects_delta0_outside_range(delta0):
    with pytest.raises(InputValidationError):
        LocalRegion(np.eye(2), mu2=1.0, delta0=delta0)


def test_score_operator_noise_is_rescaled():
    score = ScoreVector(np.zeros(2), 8.0 * np.ones((2, 1)), mu2=16.0)
    np.testing.assert_allclose(score.operator_noise, 2.0 * np.ones((2, 1)))
    np.testing.assert_array_equal(score.theta_part, [0.0])


def test_noise_model_validation():
    with pytest.raises(InputValidationError):
        NoiseModel(sigma_omega=-1.0)
    with pytest.raises(InputValidationError):
        NoiseModel(family="cauchy")
    assert NoiseModel().to_dict() == {"sigma_omega": 1.0, "sigma_u": 1.0, "family": "gaussian"}
