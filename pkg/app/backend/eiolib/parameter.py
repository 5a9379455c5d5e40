from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg

from .errors import DimensionMismatchError, InputValidationError
from .schur import DEFAULT_KAPPA, frozen, sym_sqrt, symmetrize

DEFAULT_DELTA0 = 0.1


def _vector(value, label: str) -> np.ndarray:
    v = np.array(value, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise DimensionMismatchError(f"{label} must be a vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InputValidationError(f"{label} has non-finite entries")
    return frozen(v)


def _matrix(value, label: str) -> np.ndarray:
    m = np.array(value, dtype=float)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise DimensionMismatchError(f"{label} must be a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputValidationError(f"{label} has non-finite entries")
    return frozen(m)


@dataclass(frozen=True)
class FullParameter:
    """
    A point υ = (θ, z, A) of the extended parameter space, or a direction u = (α, h, Δ) in it.

    Attributes:
        theta (np.ndarray): Signal, length p
        z (np.ndarray): Image, length q
        a (np.ndarray): Operator, q×p
    """

    theta: np.ndarray
    z: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        theta = _vector(self.theta, "theta")
        z = _vector(self.z, "z")
        a = _matrix(self.a, "a")
        if a.shape != (z.shape[0], theta.shape[0]):
            raise DimensionMismatchError(
                f"operator shape {a.shape} inconsistent with len(z)={z.shape[0]}, len(theta)={theta.shape[0]}"
            )
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "a", a)

    @classmethod
    def zeros(cls, p: int, q: int) -> "FullParameter":
        return cls(np.zeros(p), np.zeros(q), np.zeros((q, p)))

    @classmethod
    def from_flat(cls, vector, p: int, q: int) -> "FullParameter":
        v = np.asarray(vector, dtype=float)
        if v.shape != (p + q + p * q,):
            raise DimensionMismatchError(f"flat vector has shape {v.shape}, expected ({p + q + p * q},)")
        return cls(v[:p], v[p : p + q], v[p + q :].reshape(q, p))

    @property
    def p(self) -> int:
        return self.theta.shape[0]

    @property
    def q(self) -> int:
        return self.z.shape[0]

    @property
    def dim(self) -> int:
        return self.p + self.q + self.p * self.q

    def flat(self) -> np.ndarray:
        """Canonical ordering (θ, z, A row-major)."""
        return np.concatenate([self.theta, self.z, self.a.ravel()])

    def shifted(self, direction: "FullParameter", step: float = 1.0) -> "FullParameter":
        return FullParameter(
            self.theta + step * direction.theta, self.z + step * direction.z, self.a + step * direction.a
        )

    def with_values(self, **changes) -> "FullParameter":
        return replace(self, **changes)

    def norm(self) -> float:
        return float(np.linalg.norm(self.flat()))

    def to_dict(self) -> dict:
        return {"theta": self.theta.tolist(), "z": self.z.tolist(), "a": self.a.tolist()}


@dataclass(frozen=True)
class Observation:
    """Data (Z, Â) with the operator-noise precision μ²."""

    z_obs: np.ndarray
    a_hat: np.ndarray
    mu2: float

    def __post_init__(self):
        z_obs = _vector(self.z_obs, "z_obs")
        a_hat = _matrix(self.a_hat, "a_hat")
        if a_hat.shape[0] != z_obs.shape[0]:
            raise DimensionMismatchError(f"a_hat has {a_hat.shape[0]} rows but Z has {z_obs.shape[0]} entries")
        mu2 = float(self.mu2)
        if not np.isfinite(mu2) or mu2 < 0.0:
            raise InputValidationError(f"mu2 must be finite and nonnegative, got {self.mu2}")
        object.__setattr__(self, "z_obs", z_obs)
        object.__setattr__(self, "a_hat", a_hat)
        object.__setattr__(self, "mu2", mu2)

    @property
    def p(self) -> int:
        return self.a_hat.shape[1]

    @property
    def q(self) -> int:
        return self.a_hat.shape[0]

    @property
    def mu(self) -> float:
        return float(np.sqrt(self.mu2))

    def data_norm(self) -> float:
        return float(np.sqrt(self.z_obs @ self.z_obs + np.sum(self.a_hat**2)))

    def check_parameter(self, param: FullParameter):
        if (param.p, param.q) != (self.p, self.q):
            raise DimensionMismatchError(f"parameter dims (p={param.p}, q={param.q}) != data dims (p={self.p}, q={self.q})")


@dataclass(frozen=True)
class TruthSpec:
    theta_star: np.ndarray
    a_star: np.ndarray

    def __post_init__(self):
        theta_star = _vector(self.theta_star, "theta_star")
        a_star = _matrix(self.a_star, "a_star")
        if a_star.shape[1] != theta_star.shape[0]:
            raise DimensionMismatchError(f"a_star has {a_star.shape[1]} columns but theta_star has {theta_star.shape[0]}")
        object.__setattr__(self, "theta_star", theta_star)
        object.__setattr__(self, "a_star", a_star)

    @property
    def p(self) -> int:
        return self.a_star.shape[1]

    @property
    def q(self) -> int:
        return self.a_star.shape[0]

    @property
    def image_star(self) -> np.ndarray:
        return self.a_star @ self.theta_star

    def as_parameter(self) -> FullParameter:
        return FullParameter(self.theta_star, self.image_star, self.a_star)

    def noiseless_observation(self, mu2: float) -> Observation:
        return Observation(self.image_star, self.a_star, mu2)

    def to_dict(self) -> dict:
        return {"theta_star": self.theta_star.tolist(), "a_star": self.a_star.tolist()}


@dataclass(frozen=True)
class LocalRegion:
    """
    The local set Υ° = {‖Dθ‖ ≤ R, ‖z‖ ≤ R, ‖(A − A*)D⁻¹‖_Fr ≤ δ₀} with R = δ₀μ√N and N = λ_min(D²).
    """

    d2: np.ndarray
    mu2: float
    delta0: float = DEFAULT_DELTA0
    kappa: float = DEFAULT_KAPPA

    def __post_init__(self):
        d2 = frozen(symmetrize(self.d2, "d2"))
        if not 0.0 < self.delta0 <= 0.1:
            raise InputValidationError(f"delta0 must lie in (0, 0.1], got {self.delta0}")
        if self.kappa <= 0.0:
            raise InputValidationError(f"kappa must be positive, got {self.kappa}")
        if self.mu2 < 0.0:
            raise InputValidationError(f"mu2 must be nonnegative, got {self.mu2}")
        object.__setattr__(self, "d2", d2)
        object.__setattr__(self, "mu2", float(self.mu2))

    @classmethod
    def from_truth(
        cls,
        truth: TruthSpec,
        mu2: float,
        delta0: float = DEFAULT_DELTA0,
        kappa: float = DEFAULT_KAPPA,
        g0: float = 0.0,
    ) -> "LocalRegion":
        d2 = truth.a_star.T @ truth.a_star + g0**2 * np.eye(truth.p)
        return cls(d2=d2, mu2=mu2, delta0=delta0, kappa=kappa)

    @property
    def p(self) -> int:
        return self.d2.shape[0]

    @property
    def n_eff(self) -> float:
        return float(linalg.eigvalsh(self.d2)[0])

    @property
    def mu(self) -> float:
        return float(np.sqrt(self.mu2))

    @property
    def radius(self) -> float:
        return self.delta0 * self.mu * float(np.sqrt(max(self.n_eff, 0.0)))

    @property
    def d(self) -> np.ndarray:
        return sym_sqrt(self.d2)

    def to_dict(self) -> dict:
        return {
            "n_eff": self.n_eff,
            "radius": self.radius,
            "delta0": self.delta0,
            "kappa": self.kappa,
            "mu2": self.mu2,
        }


@dataclass(frozen=True)
class ScoreVector:
    """∇ζ = (0, ω, μ𝕌) with ω = Z − A*θ* and μ𝕌 = μ²(Â − A*)."""

    z_part: np.ndarray
    a_part: np.ndarray
    mu2: float

    def __post_init__(self):
        z_part = _vector(self.z_part, "z_part")
        a_part = _matrix(self.a_part, "a_part")
        if a_part.shape[0] != z_part.shape[0]:
            raise DimensionMismatchError("score parts have inconsistent q")
        object.__setattr__(self, "z_part", z_part)
        object.__setattr__(self, "a_part", a_part)

    @property
    def p(self) -> int:
        return self.a_part.shape[1]

    @property
    def q(self) -> int:
        return self.a_part.shape[0]

    @property
    def theta_part(self) -> np.ndarray:
        return np.zeros(self.p)

    @property
    def operator_noise(self) -> np.ndarray:
        """𝕌 = μ(Â − A*)."""
        if self.mu2 == 0.0:
            return np.zeros_like(self.a_part)
        return self.a_part / np.sqrt(self.mu2)

    def as_parameter(self) -> FullParameter:
        return FullParameter(self.theta_part, self.z_part, self.a_part)

    @classmethod
    def zero(cls, p: int, q: int, mu2: float) -> "ScoreVector":
        return cls(np.zeros(q), np.zeros((q, p)), mu2)


# directions u = (α, h, Δ) share the parameter layout
Direction = FullParameter


NOISE_FAMILIES = ("gaussian", "laplace", "rademacher")


@dataclass(frozen=True)
class NoiseModel:
    """Homogeneous noise: Var(ω) = σ_ω²I_q and Var(𝕌_m) = σ_U²I_p for 𝕌 = μ(Â − A*)."""

    sigma_omega: float = 1.0
    sigma_u: float = 1.0
    family: str = "gaussian"

    def __post_init__(self):
        if self.sigma_omega < 0.0 or self.sigma_u < 0.0:
            raise InputValidationError("noise standard deviations must be nonnegative")
        if self.family not in NOISE_FAMILIES:
            raise InputValidationError(f"noise family must be one of {NOISE_FAMILIES}, got {self.family!r}")

    def to_dict(self) -> dict:
        return {"sigma_omega": self.sigma_omega, "sigma_u": self.sigma_u, "family": self.family}
