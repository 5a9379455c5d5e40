import numpy as np
import pytest

from eiolib.datagen import DirectModelGenerator, DirectModelSpec
from eiolib.parameter import FullParameter, NoiseModel, Observation, TruthSpec
from eiolib.rates import SpectralProfile


def random_spd(rng: np.random.Generator, n: int, shift: float = 1.0) -> np.ndarray:
    m = rng.standard_normal((n, n))
    return m @ m.T + shift * np.eye(n)


def random_parameter(rng: np.random.Generator, p: int, q: int, scale: float = 1.0) -> FullParameter:
    return FullParameter(
        scale * rng.standard_normal(p), scale * rng.standard_normal(q), scale * rng.standard_normal((q, p))
    )


def reference_generator(**changes) -> DirectModelGenerator:
    """p=8, q=12, s=1, β=1, N₁=10⁴, μ²=10⁴, σ_ω=σ_U=1."""
    settings = {"p": 8, "q": 12, "n1": 1e4, "mu2": 1e4, "noise": NoiseModel()}
    settings.update(changes)
    profile = SpectralProfile.parametric(settings["p"], settings["q"], s=1.0, beta=1.0, n1=settings["n1"])
    return DirectModelGenerator(
        DirectModelSpec(
            p=settings["p"], q=settings["q"], profile=profile, mu2=settings["mu2"], noise=settings["noise"]
        )
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def small_truth(rng):
    a_star = rng.standard_normal((5, 3)) + 3.0 * np.eye(5, 3)
    return TruthSpec(rng.standard_normal(3), a_star)


@pytest.fixture
def small_obs(rng, small_truth):
    mu2 = 50.0
    z = small_truth.image_star + 0.1 * rng.standard_normal(small_truth.q)
    a_hat = small_truth.a_star + rng.standard_normal((small_truth.q, small_truth.p)) / np.sqrt(mu2)
    return Observation(z, a_hat, mu2)


@pytest.fixture
def reference():
    return reference_generator()
