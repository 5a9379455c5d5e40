import numpy as np
import pytest
from conftest import reference_generator

from eiolib.bases import CosineBasis, DesignDensity, LegendreBasis, expectation, gauss_legendre, make_basis
from eiolib.datagen import (
    DirectModelGenerator,
    DirectModelSpec,
    InstrumentSpec,
    RegressionSpec,
    design_decomposition_check,
    gen_direct,
    gen_iv,
    gen_random_design,
    signal_from_weights,
)
from eiolib.errors import InputValidationError
from eiolib.estimator import maximize
from eiolib.parameter import NoiseModel


@pytest.mark.parametrize("basis", [LegendreBasis(6), CosineBasis(6)])
def test_bases_are_orthonormal(basis):
    x, w = gauss_legendre(64)
    values = basis.evaluate(x)
    np.testing.assert_allclose(values.T @ (w[:, None] * values), np.eye(6), atol=1e-10)


def test_make_basis_rejects_unknown_kinds():
    assert make_basis("legendre", 3).describe()["kind"] == "legendre"
    with pytest.raises(InputValidationError):
        make_basis("wavelet", 3)


def test_expectation_of_a_polynomial():
    result = expectation(lambda x: x**3, nodes=8)
    assert float(result.value) == pytest.approx(0.25)
    assert result.error_estimate < 1e-12


def test_signal_saturates_the_smoothness_budget():
    w2 = np.arange(1, 6, dtype=float) ** 2
    theta = signal_from_weights(w2, np.random.default_rng(1))
    assert float(np.sum(w2 * theta**2)) == pytest.approx(1.0)


def test_direct_generator_spectrum_and_seeds():
    generator = reference_generator()
    truth = generator.truth()
    eigs = np.linalg.eigvalsh(truth.a_star.T @ truth.a_star)[::-1]
    np.testing.assert_allclose(eigs, generator.spec.profile.n_seq, rtol=1e-10)
    first, again, other = generator.generate(7), generator.generate(7), generator.generate(8)
    np.testing.assert_array_equal(first.observation.a_hat, again.observation.a_hat)
    np.testing.assert_array_equal(first.observation.z_obs, again.observation.z_obs)
    assert not np.array_equal(first.observation.z_obs, other.observation.z_obs)
    np.testing.assert_array_equal(first.truth.theta_star, other.truth.theta_star)


def test_random_basis_keeps_the_spectrum():
    generator = reference_generator()
    spec = generator.spec
    rotated = DirectModelGenerator(
        DirectModelSpec(p=spec.p, q=spec.q, profile=spec.profile, mu2=spec.mu2, basis="random", truth_seed=3)
    ).truth()
    eigs = np.linalg.eigvalsh(rotated.a_star.T @ rotated.a_star)[::-1]
    np.testing.assert_allclose(eigs, spec.profile.n_seq, rtol=1e-9)


def test_noiseless_direct_instance_is_recovered():
    generator = reference_generator(noise=NoiseModel(0.0, 0.0))
    instance = generator.generate(0)
    np.testing.assert_array_equal(instance.observation.a_hat, instance.truth.a_star)
    fit = maximize(instance.observation)
    np.testing.assert_allclose(fit.theta, instance.truth.theta_star, atol=1e-8)


def test_operator_noise_is_centered():
    generator = reference_generator(p=2, q=2, mu2=1.0)
    draws = np.stack([generator.generate(seed).observation.a_hat for seed in range(2000)])
    standard_error = draws.std(axis=0, ddof=1) / np.sqrt(draws.shape[0])
    assert np.all(np.abs(draws.mean(axis=0) - generator.truth().a_star) <= 4.0 * standard_error)


def regression_spec(**changes):
    settings = {
        "n": 50,
        "signal_basis": LegendreBasis(3),
        "image_basis": LegendreBasis(4),
        "theta": [1.0, -0.5, 0.25],
        "noise_sd": 0.3,
        "nodes": 32,
    }
    settings.update(changes)
    return RegressionSpec(**settings)


def test_random_design_single_sample():
    spec = regression_spec(
        n=1, signal_basis=LegendreBasis(1), image_basis=LegendreBasis(1), theta=[2.0], noise_sd=0.0, normalize=False
    )
    instance = gen_random_design(spec, 5)
    np.testing.assert_allclose(instance.observation.a_hat, [[1.0]])
    np.testing.assert_allclose(instance.observation.z_obs, [2.0])


def test_random_design_identity_holds_without_noise():
    spec = regression_spec(noise_sd=0.0)
    obs = gen_random_design(spec, 11).observation
    np.testing.assert_allclose(obs.z_obs, obs.a_hat @ spec.theta, atol=1e-12)


def test_exogenous_instrument_reduces_to_random_design():
    spec = regression_spec()
    iv = gen_iv(InstrumentSpec(spec, strength=1.0, endogeneity=0.0), 4)
    direct = gen_random_design(spec, 4)
    np.testing.assert_allclose(iv.observation.a_hat, direct.observation.a_hat)
    np.testing.assert_allclose(iv.observation.z_obs, direct.observation.z_obs)
    np.testing.assert_allclose(iv.truth.a_star, direct.truth.a_star, rtol=1e-12)


def test_instrument_validation():
    with pytest.raises(InputValidationError):
        InstrumentSpec(regression_spec(), strength=0.0)
    with pytest.raises(InputValidationError):
        gen_random_design(regression_spec(design=DesignDensity(0.5, 0.5)), 0)


def test_design_decomposition():
    assert design_decomposition_check([2.0, 4.0], 1.0) == 0.0
    rng = np.random.default_rng(3)
    assert design_decomposition_check(rng.standard_normal((9, 3, 2)), rng.standard_normal((3, 2))) <= 1e-10


def test_gen_direct_matches_the_generator():
    generator = reference_generator(p=3, q=5)
    first, second = gen_direct(generator.spec, 9), generator.generate(9)
    np.testing.assert_array_equal(first.observation.z_obs, second.observation.z_obs)
    np.testing.assert_array_equal(first.observation.a_hat, second.observation.a_hat)
    np.testing.assert_array_equal(first.truth.theta_star, generator.truth().theta_star)
