"""
Synthetic instance builders.

Each generator turns a replicate seed into an `Instance`: the observation (Z, Â, μ²), the truth
(θ*, A*) when it is known, and metadata. The truth of a generator never depends on the replicate
seed, so a family of replicates shares one θ*_G. Replicate randomness comes from independent child
streams of `numpy.random.SeedSequence(seed)`: image noise, operator noise and design draws.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from scipy import stats

from .bases import DEFAULT_QUADRATURE_NODES, BasisDictionary, DesignDensity, QuadratureResult, expectation
from .errors import InputValidationError
from .parameter import DEFAULT_DELTA0, LocalRegion, NoiseModel, Observation, TruthSpec
from .rates import SpectralProfile
from .schur import DEFAULT_KAPPA

logger = logging.getLogger("eio")

STREAMS = ("noise", "operator", "design")
ImageBasis = Literal["identity", "random"]


def child_generators(seed: int) -> dict[str, np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.default_rng(child) for name, child in zip(STREAMS, children)}


def standard_noise(rng: np.random.Generator, family: str, shape) -> np.ndarray:
    """Zero-mean, unit-variance draws of the requested family."""
    if family == "gaussian":
        return rng.standard_normal(shape)
    if family == "laplace":
        return rng.laplace(scale=1.0 / np.sqrt(2.0), size=shape)
    if family == "rademacher":
        return 2.0 * rng.integers(0, 2, size=shape) - 1.0
    raise InputValidationError(f"unknown noise family {family!r}")


@dataclass(frozen=True)
class Instance:
    observation: Observation
    truth: Optional[TruthSpec] = None
    region: Optional[LocalRegion] = None
    noise: Optional[NoiseModel] = None
    meta: dict = field(default_factory=dict)


class InstanceGenerator(ABC):
    """Builds one instance per replicate seed."""

    @abstractmethod
    def truth(self) -> TruthSpec:
        pass

    @abstractmethod
    def generate(self, seed: int) -> Instance:
        pass

    @abstractmethod
    def describe(self) -> dict:
        pass


def signal_from_weights(w2_seq, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """θ*_j = ±(j⁻¹/(H_p w_j²))^{1/2}, which saturates Σ w_j²θ_j² = 1."""
    w2 = np.asarray(w2_seq, dtype=float)
    if np.any(w2 <= 0.0):
        raise InputValidationError("smoothness weights must be positive to draw a signal")
    j = np.arange(1, w2.size + 1, dtype=float)
    harmonic = float(np.sum(1.0 / j))
    theta = np.sqrt(1.0 / (j * harmonic * w2))
    if rng is not None:
        theta = theta * (2.0 * rng.integers(0, 2, size=theta.size) - 1.0)
    return theta


@dataclass(frozen=True)
class DirectModelSpec:
    """
    Attributes:
        p (int): Signal dimension
        q (int): Image dimension, at least p
        profile (SpectralProfile): N_j and w_j² of the instance
        mu2 (float): Operator-noise precision μ²
        noise (NoiseModel): σ_ω, σ_U and the noise family
        basis (str): "identity" gives A* = [diag √N_j; 0]; "random" a Haar-orthogonal left factor
        truth_seed (int): Seed for the left factor and the signs of θ*
        random_signs (bool): Draw the signs of θ* from `truth_seed` instead of all positive
        normalize (bool): Divide (Z, Â) and A* by σ_ω
    """

    p: int
    q: int
    profile: SpectralProfile
    mu2: float
    noise: NoiseModel = field(default_factory=NoiseModel)
    basis: ImageBasis = "identity"
    truth_seed: int = 0
    random_signs: bool = False
    normalize: bool = False
    delta0: float = DEFAULT_DELTA0
    kappa: float = DEFAULT_KAPPA

    def __post_init__(self):
        if self.p < 1 or self.q < self.p:
            raise InputValidationError(f"direct model needs 1 <= p <= q, got p={self.p}, q={self.q}")
        if self.profile.p != self.p:
            raise InputValidationError(f"profile has {self.profile.p} eigenvalues, expected p={self.p}")
        if self.mu2 <= 0.0:
            raise InputValidationError(f"mu2 must be positive, got {self.mu2}")
        if self.basis not in ("identity", "random"):
            raise InputValidationError(f"image basis must be 'identity' or 'random', got {self.basis!r}")


class DirectModelGenerator(InstanceGenerator):
    def __init__(self, spec: DirectModelSpec):
        self.spec = spec
        self._truth = self._build_truth()

    @property
    def scale(self) -> float:
        if self.spec.normalize and self.spec.noise.sigma_omega > 0.0:
            return self.spec.noise.sigma_omega
        return 1.0

    def _build_truth(self) -> TruthSpec:
        spec = self.spec
        rng = np.random.default_rng(spec.truth_seed)
        if spec.basis == "identity":
            left = np.eye(spec.q, spec.p)
        else:
            left = stats.ortho_group.rvs(spec.q, random_state=rng)[:, : spec.p] if spec.q > 1 else np.ones((1, 1))
        a_star = left * np.sqrt(spec.profile.n_seq)[None, :]
        theta = signal_from_weights(spec.profile.w2_seq, rng if spec.random_signs else None)
        return TruthSpec(theta, a_star / self.scale)

    def truth(self) -> TruthSpec:
        return self._truth

    def region(self) -> LocalRegion:
        return LocalRegion.from_truth(self._truth, self.spec.mu2, self.spec.delta0, self.spec.kappa)

    def noise_model(self) -> NoiseModel:
        noise = self.spec.noise
        if self.scale == 1.0:
            return noise
        return NoiseModel(noise.sigma_omega / self.scale, noise.sigma_u / self.scale, noise.family)

    def generate(self, seed: int) -> Instance:
        spec = self.spec
        streams = child_generators(seed)
        truth = self._truth
        omega = spec.noise.sigma_omega * standard_noise(streams["noise"], spec.noise.family, spec.q)
        operator = spec.noise.sigma_u * standard_noise(streams["operator"], spec.noise.family, (spec.q, spec.p))
        z_obs = truth.image_star + omega / self.scale
        a_hat = truth.a_star + operator / (np.sqrt(spec.mu2) * self.scale)
        return Instance(
            observation=Observation(z_obs, a_hat, spec.mu2),
            truth=truth,
            region=self.region(),
            noise=self.noise_model(),
            meta={"generator": "direct", "seed": seed, "scale": self.scale, **self.describe()},
        )

    def describe(self) -> dict:
        spec = self.spec
        return {
            "p": spec.p,
            "q": spec.q,
            "mu2": spec.mu2,
            "basis": spec.basis,
            "truth_seed": spec.truth_seed,
            "noise": spec.noise.to_dict(),
            "s": spec.profile.s,
            "beta": spec.profile.beta,
            "c_w": spec.profile.c_w,
            "n1": spec.profile.n1,
        }


def gen_direct(spec: DirectModelSpec, seed: int) -> Instance:
    return DirectModelGenerator(spec).generate(seed)


@dataclass(frozen=True)
class RegressionSpec:
    """
    Y = f(X) + ε with f = Ψᵀθ*, observed through Z_m = ΣᵢYᵢφ_m(Xᵢ) and Â = ΣᵢΦ(Xᵢ)Ψ(Xᵢ)ᵀ.

    Attributes:
        n (int): Sample count
        signal_basis (BasisDictionary): Ψ, p functions
        image_basis (BasisDictionary): Φ, q functions
        theta (np.ndarray): Coefficients of f in Ψ
        noise_sd (float): Standard deviation of ε
        design (DesignDensity): Density of X on [0, 1]
        mu2_scale (float): c in μ² = c·n
        normalize (bool): Divide (Z, Â) and A* by noise_sd·√n
        family (str): Noise family of ε
        nodes (int): Gauss-Legendre nodes per axis for A*
    """

    n: int
    signal_basis: BasisDictionary
    image_basis: BasisDictionary
    theta: np.ndarray
    noise_sd: float = 1.0
    design: DesignDensity = field(default_factory=DesignDensity)
    mu2_scale: float = 1.0
    normalize: bool = True
    family: str = "gaussian"
    nodes: int = DEFAULT_QUADRATURE_NODES

    def __post_init__(self):
        if self.n < 1:
            raise InputValidationError(f"sample count must be at least 1, got {self.n}")
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        if theta.shape != (self.signal_basis.size,):
            raise InputValidationError(f"theta has {theta.size} coefficients, the signal basis {self.signal_basis.size}")
        if self.noise_sd < 0.0 or self.mu2_scale <= 0.0:
            raise InputValidationError("noise_sd must be nonnegative and mu2_scale positive")
        object.__setattr__(self, "theta", theta)

    @property
    def p(self) -> int:
        return self.signal_basis.size

    @property
    def q(self) -> int:
        return self.image_basis.size

    @property
    def mu2(self) -> float:
        return self.mu2_scale * self.n

    @property
    def scale(self) -> float:
        if self.normalize and self.noise_sd > 0.0:
            return self.noise_sd * float(np.sqrt(self.n))
        return 1.0


@dataclass(frozen=True)
class InstrumentSpec:
    """
    The IV design: W ~ design, V ~ U(0, 1) independent, X = λW + (1 − λ)V and
    ε = γ(V − ½) + noise, so E{ε | W} = 0 while X and ε are correlated for γ ≠ 0, λ < 1.

    Attributes:
        regression (RegressionSpec): Sample size, bases (Φ evaluated at W), signal and noise
        strength (float): λ ∈ (0, 1]; λ = 1 makes W = X
        endogeneity (float): γ
    """

    regression: RegressionSpec
    strength: float = 0.7
    endogeneity: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.strength <= 1.0:
            raise InputValidationError(f"instrument strength must lie in (0, 1], got {self.strength}")


def _check_design(design: DesignDensity):
    if not design.bounded:
        raise InputValidationError(
            f"quadrature for A* needs a bounded design density, got Beta({design.a}, {design.b})"
        )


def regression_operator(spec: RegressionSpec) -> QuadratureResult:
    """A* = n·E[Φ(X)Ψ(X)ᵀ] by Gauss-Legendre quadrature against the design density."""
    _check_design(spec.design)

    def integrand(x):
        weight = spec.design.pdf(x)
        return weight[:, None, None] * spec.image_basis.evaluate(x)[:, :, None] * spec.signal_basis.evaluate(x)[:, None, :]

    result = expectation(integrand, dims=1, nodes=spec.nodes)
    return QuadratureResult(value=spec.n * result.value, error_estimate=spec.n * result.error_estimate, nodes=spec.nodes)


def instrument_operator(spec: InstrumentSpec) -> QuadratureResult:
    """A* = n·E[Φ(W)Ψ(X)ᵀ] over the joint density of (W, V)."""
    reg = spec.regression
    _check_design(reg.design)
    lam = spec.strength

    def integrand(w, v):
        x = lam * w + (1.0 - lam) * v
        weight = reg.design.pdf(w)
        return weight[:, None, None] * reg.image_basis.evaluate(w)[:, :, None] * reg.signal_basis.evaluate(x)[:, None, :]

    dims = 1 if lam == 1.0 else 2
    if dims == 1:
        result = expectation(lambda w: integrand(w, w), dims=1, nodes=reg.nodes)
    else:
        result = expectation(integrand, dims=2, nodes=reg.nodes)
    return QuadratureResult(value=reg.n * result.value, error_estimate=reg.n * result.error_estimate, nodes=reg.nodes)


class RandomDesignGenerator(InstanceGenerator):
    def __init__(self, spec: RegressionSpec):
        self.spec = spec
        self.quadrature = regression_operator(spec)

    def truth(self) -> TruthSpec:
        return TruthSpec(self.spec.theta, self.quadrature.value / self.spec.scale)

    def _sample(self, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Design points X, instrument points W and responses Y."""
        spec = self.spec
        streams = child_generators(seed)
        x = spec.design.sample(streams["design"], spec.n)
        noise = spec.noise_sd * standard_noise(streams["noise"], spec.family, spec.n)
        y = spec.signal_basis.evaluate(x) @ spec.theta + noise
        return x, x, y

    def _observe(self, x: np.ndarray, w: np.ndarray, y: np.ndarray) -> Observation:
        spec = self.spec
        phi = spec.image_basis.evaluate(w)
        psi = spec.signal_basis.evaluate(x)
        return Observation(phi.T @ y / spec.scale, phi.T @ psi / spec.scale, spec.mu2)

    def generate(self, seed: int) -> Instance:
        x, w, y = self._sample(seed)
        return Instance(
            observation=self._observe(x, w, y),
            truth=self.truth(),
            meta={"seed": seed, "scale": self.spec.scale, **self.describe()},
        )

    def describe(self) -> dict:
        spec = self.spec
        return {
            "generator": "random_design",
            "n": spec.n,
            "p": spec.p,
            "q": spec.q,
            "mu2": spec.mu2,
            "noise_sd": spec.noise_sd,
            "signal_basis": spec.signal_basis.describe(),
            "image_basis": spec.image_basis.describe(),
            "design": spec.design.describe(),
            "quadrature": self.quadrature.to_dict(),
        }


class InstrumentGenerator(RandomDesignGenerator):
    def __init__(self, spec: InstrumentSpec):
        self.instrument = spec
        self.spec = spec.regression
        self.quadrature = instrument_operator(spec)

    def _sample(self, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        spec, lam = self.spec, self.instrument.strength
        streams = child_generators(seed)
        w = spec.design.sample(streams["design"], spec.n)
        noise = spec.noise_sd * standard_noise(streams["noise"], spec.family, spec.n)
        if lam == 1.0 and self.instrument.endogeneity == 0.0:
            x, confounder = w, 0.0
        else:
            v = streams["operator"].uniform(size=spec.n)
            x = lam * w + (1.0 - lam) * v
            confounder = self.instrument.endogeneity * (v - 0.5)
        y = spec.signal_basis.evaluate(x) @ spec.theta + confounder + noise
        return x, w, y

    def describe(self) -> dict:
        return {
            **super().describe(),
            "generator": "iv",
            "strength": self.instrument.strength,
            "endogeneity": self.instrument.endogeneity,
        }


def gen_random_design(spec: RegressionSpec, seed: int) -> Instance:
    return RandomDesignGenerator(spec).generate(seed)


def gen_iv(spec: InstrumentSpec, seed: int) -> Instance:
    return InstrumentGenerator(spec).generate(seed)


def design_decomposition_check(a_hat_list, a) -> float:
    """|Σ‖Âᵢ − A‖² − Σ‖Âᵢ − Â‖² − n‖Â − A‖²| with Â the mean of the Âᵢ."""
    samples = np.asarray(a_hat_list, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    n = samples.shape[0]
    if n == 0:
        raise InputValidationError("design decomposition needs at least one sample")
    a = np.broadcast_to(np.asarray(a, dtype=float), samples.shape[1:])
    mean = samples.mean(axis=0)
    lhs = float(np.sum((samples - a) ** 2))
    rhs = float(np.sum((samples - mean) ** 2) + n * np.sum((mean - a) ** 2))
    return abs(lhs - rhs)
