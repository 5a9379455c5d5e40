"""
The extended Error-in-Operator model: the quartic objective over υ = (θ, z, A), its derivatives, the
score and the local region Υ° where the objective is strongly concave.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import polynomial
from scipy import linalg

from .errors import DimensionMismatchError, InputValidationError, SingularBlockError
from .infomatrix import InfoMatrix
from .parameter import Direction, FullParameter, LocalRegion, Observation, ScoreVector, TruthSpec
from .penalty import PenaltyConfig, penalty_value
from .schur import min_eig, spd_solve

logger = logging.getLogger("eio")

THIRD_ORDER_FACTOR = 4.5
FOURTH_ORDER_FACTOR = 3.0


def objective(obs: Observation, param: FullParameter, pen: Optional[PenaltyConfig] = None) -> float:
    """L_G(υ) = −½‖Z−z‖² − (μ²/2)‖A−Â‖²_Fr − ½‖z−Aθ‖² − ½‖Gθ‖² − ½‖A‖²_K."""
    obs.check_parameter(param)
    pen = pen or PenaltyConfig.none()
    penalty = penalty_value(pen, param)
    fidelity = obs.z_obs - param.z
    structural = param.z - param.a @ param.theta
    operator = param.a - obs.a_hat
    return float(
        -0.5 * fidelity @ fidelity - 0.5 * obs.mu2 * np.sum(operator**2) - 0.5 * structural @ structural - penalty
    )


def gradient(obs: Observation, param: FullParameter, pen: Optional[PenaltyConfig] = None) -> FullParameter:
    """∇L_G(υ); masked coordinates are reported as zero."""
    obs.check_parameter(param)
    pen = pen or PenaltyConfig.none()
    pen.check_feasible(param)
    structural = param.z - param.a @ param.theta
    theta = param.a.T @ structural - pen.g2(param.p) * param.theta
    z = (obs.z_obs - param.z) - structural
    a = obs.mu2 * (obs.a_hat - param.a) + np.outer(structural, param.theta) - pen.k2(param.q, param.p) * param.a
    theta = np.where(pen.theta_mask(param.p), theta, 0.0)
    a = np.where(pen.row_mask(param.q)[:, None], a, 0.0)
    return FullParameter(theta, z, a)


def hessian_blocks(param: FullParameter, mu2: float, pen: Optional[PenaltyConfig] = None) -> InfoMatrix:
    return InfoMatrix.from_parameter(param, mu2, pen)


def hessian_dense(param: FullParameter, mu2: float, pen: Optional[PenaltyConfig] = None) -> np.ndarray:
    return hessian_blocks(param, mu2, pen).dense()


def hessian_quadratic_form(param: FullParameter, mu2: float, u: Direction) -> float:
    """uᵀ𝔽(υ)u = ‖h‖² + μ²‖Δ‖² + ‖h − (Aα + Δθ)‖² − 2(z − Aθ)ᵀΔα for u = (α, h, Δ)."""
    _check_direction(param, u)
    mixed = u.z - (param.a @ u.theta + u.a @ param.theta)
    residual = param.z - param.a @ param.theta
    return float(
        u.z @ u.z + mu2 * np.sum(u.a**2) + mixed @ mixed - 2.0 * residual @ (u.a @ u.theta)
    )


def third_directional(param: FullParameter, u: Direction) -> float:
    """−d³/dt³ L(υ + tu) at t = 0, which is 6(Aα + Δθ − h)ᵀΔα."""
    _check_direction(param, u)
    return float(6.0 * (param.a @ u.theta + u.a @ param.theta - u.z) @ (u.a @ u.theta))


def fourth_directional(u: Direction) -> float:
    """−d⁴/dt⁴ L(υ + tu) = 12‖Δα‖², the same at every υ."""
    delta_alpha = u.a @ u.theta
    return float(12.0 * delta_alpha @ delta_alpha)


def _check_direction(param: FullParameter, u: Direction):
    if (u.p, u.q) != (param.p, param.q):
        raise DimensionMismatchError(f"direction dims {(u.p, u.q)} != parameter dims {(param.p, param.q)}")


def line_coefficients(
    obs: Observation, param: FullParameter, u: Direction, pen: Optional[PenaltyConfig] = None, step: float = 1.0
) -> np.ndarray:
    """
    Coefficients c₀..c₄ of the quartic t ↦ L_G(υ + tu), interpolated through t = −2, −1, 0, 1, 2 (times `step`).
    """
    ts = step * np.arange(-2.0, 3.0)
    values = [objective(obs, param.shifted(u, t), pen) for t in ts]
    return polynomial.polyfit(ts, values, 4)


def score(obs: Observation, truth: TruthSpec) -> ScoreVector:
    """∇ζ = (0, ω, μ𝕌) with ω = Z − A*θ* and μ𝕌 = μ²(Â − A*)."""
    if (obs.p, obs.q) != (truth.p, truth.q):
        raise DimensionMismatchError("observation and truth dimensions differ")
    return ScoreVector(obs.z_obs - truth.image_star, obs.mu2 * (obs.a_hat - truth.a_star), obs.mu2)


@dataclass(frozen=True)
class RegionDiagnostic:
    theta_norm: float
    z_norm: float
    operator_deviation: float
    radius: float
    delta0: float

    @property
    def theta_inside(self) -> bool:
        return self.theta_norm <= self.radius

    @property
    def z_inside(self) -> bool:
        return self.z_norm <= self.radius

    @property
    def operator_inside(self) -> bool:
        return self.operator_deviation <= self.delta0

    @property
    def inside(self) -> bool:
        return self.theta_inside and self.z_inside and self.operator_inside

    def to_dict(self) -> dict:
        return {
            "theta_norm": self.theta_norm,
            "z_norm": self.z_norm,
            "operator_deviation": self.operator_deviation,
            "radius": self.radius,
            "delta0": self.delta0,
            "inside": self.inside,
        }


def region_membership(param: FullParameter, region: LocalRegion, truth: TruthSpec) -> RegionDiagnostic:
    """‖Dθ‖ ≤ R, ‖z‖ ≤ R and ‖(A − A*)D⁻¹‖_Fr ≤ δ₀, all closed."""
    if region.p != param.p or (truth.p, truth.q) != (param.p, param.q):
        raise DimensionMismatchError("region, truth and parameter dimensions differ")
    if region.n_eff <= 0.0:
        raise SingularBlockError("D", "smallest eigenvalue of D² is not positive")
    d = region.d
    # (A − A*)D⁻¹ = (D⁻¹(A − A*)ᵀ)ᵀ since D is symmetric
    deviation = spd_solve(d, (param.a - truth.a_star).T, "D")
    return RegionDiagnostic(
        theta_norm=float(np.linalg.norm(d @ param.theta)),
        z_norm=float(np.linalg.norm(param.z)),
        operator_deviation=float(np.linalg.norm(deviation)),
        radius=region.radius,
        delta0=region.delta0,
    )


def smoothness_constants(region: LocalRegion, mu: float) -> tuple[float, float]:
    """τ₃ = 4.5N^{-1/2}μ^{-1} and τ₄ = 3N^{-1}μ^{-2}."""
    n_eff = region.n_eff
    if n_eff <= 0.0 or mu <= 0.0:
        raise InputValidationError(f"smoothness constants need N > 0 and mu > 0, got N={n_eff}, mu={mu}")
    return float(THIRD_ORDER_FACTOR / (np.sqrt(n_eff) * mu)), float(FOURTH_ORDER_FACTOR / (n_eff * mu**2))


@dataclass(frozen=True)
class MetricBlocks:
    """𝒟² = block{D², I_q, μ²I_A}."""

    d2: np.ndarray
    q: int
    mu2: float

    @classmethod
    def from_region(cls, region: LocalRegion, q: int) -> "MetricBlocks":
        return cls(region.d2, q, region.mu2)

    @property
    def p(self) -> int:
        return self.d2.shape[0]

    def dense(self) -> np.ndarray:
        return linalg.block_diag(self.d2, np.eye(self.q), self.mu2 * np.eye(self.p * self.q))

    def norm(self, u: Direction) -> float:
        return float(np.sqrt(u.theta @ self.d2 @ u.theta + u.z @ u.z + self.mu2 * np.sum(u.a**2)))

    def normalize(self, u: Direction) -> Direction:
        size = self.norm(u)
        if size == 0.0:
            raise InputValidationError("cannot normalize the zero direction")
        return FullParameter(u.theta / size, u.z / size, u.a / size)


def metric_blocks(region: LocalRegion, q: int) -> MetricBlocks:
    return MetricBlocks.from_region(region, q)


@dataclass(frozen=True)
class ConcavityMargin:
    """min eig(𝔽(υ) − κ⁻²𝒟²) and min eig(𝔽_ηη(υ) − block{I_q, μ²I_A})."""

    full: float
    nuisance: float

    def holds(self, tol: float = 1e-8) -> bool:
        return self.full >= -tol and self.nuisance >= -tol


def concavity_margin(param: FullParameter, region: LocalRegion) -> ConcavityMargin:
    metric = metric_blocks(region, param.q)
    f = hessian_dense(param, region.mu2)
    p = param.p
    full = min_eig(f - metric.dense() / region.kappa**2)
    nuisance = min_eig(f[p:, p:] - metric.dense()[p:, p:])
    return ConcavityMargin(full=full, nuisance=nuisance)


def _unit(rng: np.random.Generator, shape) -> np.ndarray:
    draw = rng.standard_normal(shape)
    return draw / np.linalg.norm(draw)


def sample_local_point(region: LocalRegion, truth: TruthSpec, rng: np.random.Generator) -> FullParameter:
    """A point of Υ° with uniform directions and uniform fractions of each radius."""
    d = region.d
    fractions = rng.uniform(size=3)
    theta = linalg.solve(d, region.radius * fractions[0] * _unit(rng, truth.p), assume_a="pos")
    z = region.radius * fractions[1] * _unit(rng, truth.q)
    a = truth.a_star + region.delta0 * fractions[2] * _unit(rng, (truth.q, truth.p)) @ d
    return FullParameter(theta, z, a)


def numerical_gradient(fun: Callable[[np.ndarray], float], x: np.ndarray) -> np.ndarray:
    """Central differences with step eps^{1/3}·(1 + ‖x‖)."""
    x = np.asarray(x, dtype=float)
    h = np.finfo(float).eps ** (1.0 / 3.0) * (1.0 + np.linalg.norm(x))
    grad = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        grad[i] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return grad


def numerical_hessian(grad: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> np.ndarray:
    """Central differences of the gradient with step eps^{1/4}·(1 + ‖x‖), symmetrized."""
    x = np.asarray(x, dtype=float)
    h = np.finfo(float).eps ** 0.25 * (1.0 + np.linalg.norm(x))
    hess = np.empty((x.size, x.size))
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        hess[:, i] = (grad(x + e) - grad(x - e)) / (2.0 * h)
    return 0.5 * (hess + hess.T)
