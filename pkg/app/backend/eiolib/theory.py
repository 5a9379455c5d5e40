"""
Closed-form theoretical quantities for the penalized Error-in-Operator problem.

Everything here is computed from the information matrix 𝔽_G at a chosen point (υ*_G by default,
υ* on request): the semiparametric block, the Fisher and Wilks leading terms, the penalization
bias, the normalized score covariance and the remainder bounds of the expansion theorem.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Literal, Optional

import numpy as np

from .errors import InputValidationError
from .estimator import FitResult, SolveOptions, population_fit, profile_value
from .infomatrix import InfoMatrix
from .model import MetricBlocks, smoothness_constants
from .parameter import FullParameter, LocalRegion, NoiseModel, Observation, ScoreVector, TruthSpec
from .penalty import PenaltyConfig
from .schur import SpdFactor, op_norm, spd_solve, sym_sqrt, symmetrize

logger = logging.getLogger("eio")

DEFAULT_X = 3.0
DEFAULT_C4 = 3.0
RADIUS_FACTOR = 1.5
CURVATURE_LIMIT = 4.0 / 9.0
REMAINDER_FACTOR = 0.75
PASS_ATOL = 1e-7
MIN_APPLICABILITY_SLACK = 2.0

EvaluationPoint = Literal["population", "truth"]
ExpansionItem = Literal["fisher", "wilks", "bias", "pac", "l2", "squared"]
EXPANSION_ITEMS = ("fisher", "wilks", "bias", "pac", "l2", "squared")


def assemble_info(
    truth: TruthSpec,
    mu2: float,
    pen: Optional[PenaltyConfig] = None,
    at: EvaluationPoint = "population",
    population: Optional[FitResult] = None,
    opts: Optional[SolveOptions] = None,
) -> InfoMatrix:
    """𝔽_G at υ*_G (default) or at υ*."""
    pen = pen or PenaltyConfig.none()
    if at == "truth":
        return InfoMatrix.from_parameter(truth.as_parameter(), mu2, pen, provenance="truth")
    if at != "population":
        raise InputValidationError(f"evaluation point must be 'population' or 'truth', got {at!r}")
    population = population or population_fit(truth, mu2, pen, opts)
    return InfoMatrix.from_parameter(population.param, mu2, pen, provenance="population")


def semiparametric_block(info: InfoMatrix) -> np.ndarray:
    """Φ_{G,θθ} = 𝔽_θθ + G² − 𝔽_θη𝔽_{G,ηη}⁻¹𝔽_ηθ over the active signal coordinates."""
    return np.array(info.schur_theta)


def fisher_leading_term(info: InfoMatrix, score: ScoreVector) -> np.ndarray:
    """(𝔽_G⁻¹∇ζ)_θ, zero on masked coordinates."""
    x_theta, _, _ = info.solve_arrays(np.zeros(info.p), score.z_part, score.a_part)
    return x_theta


def efficient_score(info: InfoMatrix, score: ScoreVector) -> np.ndarray:
    """ξ̆_G = Φ_{G,θθ}^{1/2}(𝔽_G⁻¹∇ζ)_θ, laid out over the p signal coordinates."""
    lead = fisher_leading_term(info, score)
    active = info.theta_active
    xi = np.zeros(info.p)
    xi[active] = sym_sqrt(info.schur_theta) @ lead[active]
    return xi


def _metric(info: InfoMatrix, region: LocalRegion) -> MetricBlocks:
    return MetricBlocks(region.d2, info.q, info.mu2)


def score_norms(info: InfoMatrix, score: ScoreVector, region: LocalRegion) -> tuple[float, float]:
    """‖𝒟𝔽_G⁻¹∇ζ‖ and ‖𝒟_ηη𝔽_{G,ηη}⁻¹∇_ηζ‖."""
    full = info.solve(score.as_parameter())
    x_z, x_a = info.nuisance_solve(score.z_part, score.a_part)
    return _metric(info, region).norm(full), info.nuisance_metric_norm(x_z, x_a)


@dataclass(frozen=True)
class ScoreNormBound:
    full_squared: float
    nuisance_squared: float

    def to_dict(self) -> dict:
        return {"full_squared": self.full_squared, "nuisance_squared": self.nuisance_squared}


def score_norm_bound(score: ScoreVector, pen: Optional[PenaltyConfig], kappa: float) -> ScoreNormBound:
    """
    Pathwise bounds κ⁴‖ω‖² + Σ_m‖(κ⁻²I + μ⁻²K_m²)⁻¹𝕌_m‖² and ‖ω‖² + Σ_m‖(I + μ⁻²K_m²)⁻¹𝕌_m‖²
    over the active operator rows.
    """
    pen = pen or PenaltyConfig.none()
    if score.mu2 <= 0.0:
        raise InputValidationError("score norm bounds need mu2 > 0")
    rows = pen.row_mask(score.q)
    noise = score.operator_noise[rows]
    relative = pen.k2(score.q, score.p)[rows] / score.mu2
    omega2 = float(score.z_part @ score.z_part)
    full = kappa**4 * omega2 + float(np.sum((noise / (kappa**-2 + relative)) ** 2))
    nuisance = omega2 + float(np.sum((noise / (1.0 + relative)) ** 2))
    return ScoreNormBound(full_squared=full, nuisance_squared=nuisance)


def _penalty_image(truth: TruthSpec, pen: PenaltyConfig) -> FullParameter:
    """𝒢²υ* = (G²θ*, 0, K²A*)."""
    p, q = truth.p, truth.q
    return FullParameter(pen.g2(p) * truth.theta_star, np.zeros(q), pen.k2(q, p) * truth.a_star)


def _masked_part(info: InfoMatrix, truth: TruthSpec) -> FullParameter:
    theta = np.where(info.theta_mask, 0.0, truth.theta_star)
    a = np.where(info.row_mask[:, None], 0.0, truth.a_star)
    return FullParameter(theta, np.zeros(truth.q), a)


def penalized_bias_vector(info: InfoMatrix, truth: TruthSpec, pen: Optional[PenaltyConfig] = None) -> FullParameter:
    """
    𝔽_G⁻¹𝒢²υ* in the mask limit: masked coordinates equal those of υ*, the active ones solve
    𝔽_{G,aa}x_a = 𝒢²_aυ*_a − 𝔽_{ai}υ*_i.
    """
    pen = pen or PenaltyConfig.none()
    fixed = _masked_part(info, truth)
    rhs = _penalty_image(truth, pen)
    coupling = info.matvec(fixed)
    x_theta, x_z, x_a = info.solve_arrays(rhs.theta - coupling.theta, rhs.z - coupling.z, rhs.a - coupling.a)
    return FullParameter(x_theta + fixed.theta, x_z, x_a + fixed.a)


def bias_norm(info: InfoMatrix, truth: TruthSpec, pen: Optional[PenaltyConfig], region: LocalRegion) -> float:
    """b_𝒟 = ‖𝒟𝔽_G⁻¹𝒢²υ*‖."""
    return _metric(info, region).norm(penalized_bias_vector(info, truth, pen))


@dataclass(frozen=True)
class BiasResult:
    """
    The θ-part of 𝔽_G⁻¹𝒢²υ* at υ* together with the operator-penalty correction.

    Attributes:
        vector (np.ndarray): Φ_{G,θθ}⁻¹(G² − S_K)θ* (masked signal coordinates equal θ*)
        s_k (np.ndarray): S_K = ½Σ_m A*_mA*_mᵀK_m²(μ²I + K_m² + ½θ*θ*ᵀ)⁻¹, masked rows giving ½A*_mA*_mᵀ
        schur (np.ndarray): Φ_{G,θθ} over all p signal coordinates
        weighted (Optional[np.ndarray]): Q applied to `vector` when a weighting map was supplied
    """

    vector: np.ndarray
    s_k: np.ndarray
    schur: np.ndarray
    weighted: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        return {
            "vector": self.vector.tolist(),
            "s_k": self.s_k.tolist(),
            "weighted": None if self.weighted is None else self.weighted.tolist(),
        }


def operator_bias_matrix(truth: TruthSpec, mu2: float, pen: Optional[PenaltyConfig] = None) -> np.ndarray:
    pen = pen or PenaltyConfig.none()
    p, q = truth.p, truth.q
    theta = truth.theta_star
    k2 = pen.k2(q, p)
    rows = pen.row_mask(q)
    s_k = np.zeros((p, p))
    for m in range(q):
        a_m = truth.a_star[m]
        if not rows[m]:
            s_k += 0.5 * np.outer(a_m, a_m)
            continue
        if not np.any(k2[m]):
            continue
        block = mu2 * np.eye(p) + np.diag(k2[m]) + 0.5 * np.outer(theta, theta)
        # K_m²B⁻¹ = (B⁻¹K_m²)ᵀ since both factors are symmetric
        weighted = SpdFactor(block, f"operator_row[{m + 1}]").solve(np.diag(k2[m])).T
        s_k += 0.5 * np.outer(a_m, a_m) @ weighted
    return s_k


def bias_closed_form(
    truth: TruthSpec, mu2: float, pen: Optional[PenaltyConfig] = None, q_map: Optional[np.ndarray] = None
) -> BiasResult:
    pen = pen or PenaltyConfig.none()
    p = truth.p
    info = InfoMatrix.from_parameter(truth.as_parameter(), mu2, pen, provenance="truth")
    phi = replace(info, theta_mask=np.ones(p, dtype=bool)).schur_theta
    s_k = operator_bias_matrix(truth, mu2, pen)
    theta = truth.theta_star
    active = pen.theta_mask(p)
    inactive = ~active
    rhs = pen.g2(p) * theta - s_k @ theta - phi[:, inactive] @ theta[inactive]
    vector = np.array(theta, dtype=float)
    vector[active] = spd_solve(phi[np.ix_(active, active)], rhs[active], "schur_theta")
    weighted = None if q_map is None else np.asarray(q_map, dtype=float) @ vector
    return BiasResult(vector=vector, s_k=s_k, schur=np.array(phi), weighted=weighted)


def _score_columns(info: InfoMatrix, noise: NoiseModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """𝔽_G⁻¹Var(∇ζ)^{1/2}: columns σ_ω e_m on the image and μσ_U e_mj on the active operator rows."""
    p, q = info.p, info.q
    rows = np.flatnonzero(info.row_mask)
    k = q + rows.size * p
    rhs_z = np.zeros((q, k))
    rhs_z[:, :q] = noise.sigma_omega * np.eye(q)
    rhs_a = np.zeros((q, p, k))
    rhs_a[np.repeat(rows, p), np.tile(np.arange(p), rows.size), q + np.arange(rows.size * p)] = (
        np.sqrt(info.mu2) * noise.sigma_u
    )
    return info.solve_arrays(np.zeros((p, k)), rhs_z, rhs_a)


def _normalized_factor(info: InfoMatrix, noise: NoiseModel, region: LocalRegion) -> np.ndarray:
    x_theta, x_z, x_a = _score_columns(info, noise)
    k = x_z.shape[1]
    return np.vstack([region.d @ x_theta, x_z, np.sqrt(info.mu2) * x_a.reshape(info.q * info.p, k)])


def score_covariance(info: InfoMatrix, noise: NoiseModel) -> np.ndarray:
    """Var(𝔽_G⁻¹∇ζ) in the canonical flat ordering."""
    x_theta, x_z, x_a = _score_columns(info, noise)
    factor = np.vstack([x_theta, x_z, x_a.reshape(info.q * info.p, -1)])
    return factor @ factor.T


def normalized_score_covariance(info: InfoMatrix, noise: NoiseModel, region: LocalRegion) -> np.ndarray:
    """B_𝒟 = Var(𝒟𝔽_G⁻¹∇ζ)."""
    factor = _normalized_factor(info, noise, region)
    return factor @ factor.T


def leading_covariance(info: InfoMatrix, noise: NoiseModel) -> np.ndarray:
    """Var{(𝔽_G⁻¹∇ζ)_θ}."""
    x_theta, _, _ = _score_columns(info, noise)
    return x_theta @ x_theta.T


@dataclass(frozen=True)
class EffectiveDimension:
    p_z: float
    p_a: float

    @property
    def total(self) -> float:
        return self.p_z + self.p_a

    def to_dict(self) -> dict:
        return {"p_z": self.p_z, "p_a": self.p_a, "total": self.total}


def effective_dimension(
    noise: NoiseModel, mu2: float, pen: Optional[PenaltyConfig], kappa: float, p: int, q: int
) -> EffectiveDimension:
    """p_z = κ⁴σ_ω²q and p_A = κ⁴σ_U²Σ_{active m}Σ_j(1 + κ²μ⁻²k²_mj)⁻¹."""
    pen = pen or PenaltyConfig.none()
    if mu2 <= 0.0:
        raise InputValidationError("effective dimension needs mu2 > 0")
    rows = pen.row_mask(q)
    k2 = pen.k2(q, p)[rows]
    p_z = kappa**4 * noise.sigma_omega**2 * q
    p_a = kappa**4 * noise.sigma_u**2 * float(np.sum(1.0 / (1.0 + kappa**2 * k2 / mu2)))
    return EffectiveDimension(p_z=float(p_z), p_a=p_a)


def noise_constants(noise: NoiseModel, mu2: float, pen: Optional[PenaltyConfig], p: int, q: int) -> tuple[float, float]:
    """C_ω = ‖Var ω‖ and C_ν = ‖Var{(I + μ⁻²K²)⁻¹𝕌}‖ for the homogeneous noise model."""
    pen = pen or PenaltyConfig.none()
    if mu2 <= 0.0:
        raise InputValidationError("noise constants need mu2 > 0")
    rows = pen.row_mask(q)
    if not np.any(rows):
        return noise.sigma_omega**2, 0.0
    shrink = 1.0 / (1.0 + pen.k2(q, p)[rows] / mu2) ** 2
    return noise.sigma_omega**2, noise.sigma_u**2 * float(np.max(shrink))


def _radius(trace: float, norm: float, x: float) -> float:
    return float(np.sqrt(max(trace, 0.0)) + np.sqrt(2.0 * x * max(norm, 0.0)))


def deviation_radius(b, x: float) -> float:
    """r = √(tr B) + √(2x‖B‖), the upper bound for the x-level of ‖ξ‖ with Var ξ = B."""
    if x <= 0.0:
        raise InputValidationError(f"x must be positive, got {x}")
    b = symmetrize(b, "B")
    return _radius(float(np.trace(b)), op_norm(b), x)


@dataclass(frozen=True)
class VarianceBound:
    """
    Attributes:
        matrix (np.ndarray): 2κ²(C_ω + 4C_νδ₀²)(κ⁻²D² + G²)⁻¹
        trace (float): 2κ²(C_ω + 4C_νδ₀²)tr{Q(κ⁻²D² + G²)⁻¹Qᵀ}
        efficient_trace (float): 2(C_ω + 4C_νδ₀²)tr{(κ⁻²D² + G²)⁻¹D²}, the bound for E‖ξ̆_G‖²
    """

    matrix: np.ndarray
    trace: float
    efficient_trace: float

    def to_dict(self) -> dict:
        return {"matrix": self.matrix.tolist(), "trace": self.trace, "efficient_trace": self.efficient_trace}


def variance_bound(
    c_omega: float,
    c_nu: float,
    delta0: float,
    kappa: float,
    d2,
    g2=None,
    q_map: Optional[np.ndarray] = None,
) -> VarianceBound:
    if c_omega < 0.0 or c_nu < 0.0:
        raise InputValidationError("noise constants must be nonnegative")
    d2 = symmetrize(d2, "d2")
    p = d2.shape[0]
    if g2 is None:
        g2_matrix = np.zeros((p, p))
    else:
        g2 = np.asarray(g2, dtype=float)
        g2_matrix = np.diag(np.broadcast_to(g2, (p,))) if g2.ndim <= 1 else g2
    precision = SpdFactor(d2 / kappa**2 + g2_matrix, "kappa^-2 D^2 + G^2")
    inverse = precision.inverse()
    scale = 2.0 * (c_omega + 4.0 * c_nu * delta0**2)
    q = np.eye(p) if q_map is None else np.atleast_2d(np.asarray(q_map, dtype=float))
    return VarianceBound(
        matrix=kappa**2 * scale * inverse,
        trace=float(kappa**2 * scale * np.trace(q @ inverse @ q.T)),
        efficient_trace=float(scale * np.trace(precision.solve(d2))),
    )


def _finite_or_none(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


@dataclass(frozen=True)
class Applicability:
    radius: float
    r: float
    b: float
    curvature: float

    @property
    def scale(self) -> float:
        return max(self.r, self.b)

    @property
    def radius_ok(self) -> bool:
        return bool(self.radius >= RADIUS_FACTOR * self.scale)

    @property
    def curvature_ok(self) -> bool:
        return bool(self.curvature * self.scale < CURVATURE_LIMIT)

    @property
    def applicable(self) -> bool:
        return self.radius_ok and self.curvature_ok

    @property
    def radius_slack(self) -> float:
        """R/(1.5·max(r, b)); infinite when r = b = 0."""
        needed = RADIUS_FACTOR * self.scale
        return float(self.radius / needed) if needed > 0.0 else math.inf

    @property
    def curvature_slack(self) -> float:
        """(4/9)/(κ²τ₃·max(r, b)); infinite when r = b = 0."""
        used = self.curvature * self.scale
        return float(CURVATURE_LIMIT / used) if used > 0.0 else math.inf

    @property
    def slack(self) -> float:
        return min(self.radius_slack, self.curvature_slack)

    def reason(self) -> Optional[str]:
        if self.applicable:
            return None
        failed = []
        if not self.radius_ok:
            failed.append(f"R={self.radius:.4g} < 1.5*max(r, b)={RADIUS_FACTOR * self.scale:.4g}")
        if not self.curvature_ok:
            failed.append(f"kappa^2*tau3*max(r, b)={self.curvature * self.scale:.4g} >= 4/9")
        return "; ".join(failed)

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "r": self.r,
            "b": self.b,
            "applicable": self.applicable,
            "radius_slack": _finite_or_none(self.radius_slack),
            "curvature_slack": _finite_or_none(self.curvature_slack),
            "reason": self.reason(),
        }


def applicability(region: LocalRegion, tau3: float, r: float, b: float) -> Applicability:
    return Applicability(radius=region.radius, r=r, b=b, curvature=region.kappa**2 * tau3)


@dataclass(frozen=True)
class TheoremSetup:
    """
    Everything the expansion bounds need, computed once per (truth, μ², penalty, noise) instance.

    Attributes:
        population (FitResult): υ*_G
        info (InfoMatrix): 𝔽_G at the chosen evaluation point
        bias (FullParameter): 𝔽_G⁻¹𝒢²υ*
        b_d (float): b_𝒟 = ‖𝒟𝔽_G⁻¹𝒢²υ*‖
        p_bar (float): p̄_𝒟 = tr B_𝒟
        b_op (float): ‖B_𝒟‖
        r_d (float): r_𝒟 at level x
        lead_cov (np.ndarray): Var{(𝔽_G⁻¹∇ζ)_θ}
        qd_norm (float): ‖QD⁻¹‖
    """

    truth: TruthSpec
    pen: PenaltyConfig
    noise: NoiseModel
    region: LocalRegion
    x: float
    q_map: np.ndarray
    population: FitResult
    info: InfoMatrix
    tau3: float
    tau4: float
    bias: FullParameter
    b_d: float
    p_bar: float
    b_op: float
    r_d: float
    lead_cov: np.ndarray
    qd_norm: float
    check: Applicability

    @property
    def mu2(self) -> float:
        return self.info.mu2

    @property
    def theta_star_g(self) -> np.ndarray:
        return self.population.param.theta

    @property
    def bias_theta(self) -> np.ndarray:
        return self.bias.theta

    @property
    def remainder_constant(self) -> float:
        """‖QD⁻¹‖·(3/4)κ²τ₃."""
        return self.qd_norm * REMAINDER_FACTOR * self.region.kappa**2 * self.tau3

    @property
    def risk_q(self) -> float:
        """ℛ_Q = tr Var{Q(𝔽_G⁻¹∇ζ)_θ} + ‖Q bias‖²."""
        bias = self.q_map @ self.bias_theta
        return float(np.trace(self.q_map @ self.lead_cov @ self.q_map.T) + bias @ bias)

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "mu2": self.mu2,
            "tau3": self.tau3,
            "tau4": self.tau4,
            "b_d": self.b_d,
            "p_bar": self.p_bar,
            "r_d": self.r_d,
            "risk_q": self.risk_q,
            "qd_norm": self.qd_norm,
            "penalty": self.pen.describe(),
            "noise": self.noise.to_dict(),
            "region": self.region.to_dict(),
            "applicability": self.check.to_dict(),
            "population_converged": self.population.converged,
        }


def prepare_theorem(
    truth: TruthSpec,
    mu2: float,
    pen: Optional[PenaltyConfig],
    noise: NoiseModel,
    region: LocalRegion,
    x: float = DEFAULT_X,
    q_map: Optional[np.ndarray] = None,
    opts: Optional[SolveOptions] = None,
    at: EvaluationPoint = "population",
    population: Optional[FitResult] = None,
) -> TheoremSetup:
    if x <= 0.0:
        raise InputValidationError(f"x must be positive, got {x}")
    pen = pen or PenaltyConfig.none()
    population = population or population_fit(truth, mu2, pen, opts, region)
    if not population.converged:
        logger.warning("Population fit did not converge (grad %.3g); bounds use the last iterate", population.grad_norm)
    info = assemble_info(truth, mu2, pen, at=at, population=population)
    tau3, tau4 = smoothness_constants(region, float(np.sqrt(mu2)))
    bias = penalized_bias_vector(info, truth, pen)
    b_d = _metric(info, region).norm(bias)

    factor = _normalized_factor(info, noise, region)
    p_bar = float(np.sum(factor**2))
    gram = factor.T @ factor if factor.shape[1] < factor.shape[0] else factor @ factor.T
    b_op = op_norm(gram)
    r_d = _radius(p_bar, b_op, x)

    q_map = np.eye(truth.p) if q_map is None else np.atleast_2d(np.asarray(q_map, dtype=float))
    if q_map.shape[1] != truth.p:
        raise InputValidationError(f"weighting map has {q_map.shape[1]} columns, expected {truth.p}")
    qd = spd_solve(region.d, q_map.T, "D").T
    check = applicability(region, tau3, r_d, b_d)
    if not check.applicable:
        logger.info("Expansion bounds inapplicable: %s", check.reason())
    return TheoremSetup(
        truth=truth,
        pen=pen,
        noise=noise,
        region=region,
        x=float(x),
        q_map=q_map,
        population=population,
        info=info,
        tau3=tau3,
        tau4=tau4,
        bias=bias,
        b_d=b_d,
        p_bar=p_bar,
        b_op=b_op,
        r_d=r_d,
        lead_cov=leading_covariance(info, noise),
        qd_norm=op_norm(qd),
        check=check,
    )


@dataclass(frozen=True)
class ExpansionReport:
    item: str
    remainder_bound: float
    applicable: bool
    observed_remainder: Optional[float] = None
    leading_term: Optional[np.ndarray] = None
    details: dict = field(default_factory=dict)
    tolerance: float = PASS_ATOL

    @property
    def passed(self) -> Optional[bool]:
        if self.observed_remainder is None:
            return None
        return bool(self.observed_remainder <= self.remainder_bound + self.tolerance)

    def to_dict(self) -> dict:
        return {
            "item": self.item,
            "remainder_bound": self.remainder_bound,
            "observed_remainder": self.observed_remainder,
            "applicable": bool(self.applicable),
            "pass": self.passed,
            "leading_term": None if self.leading_term is None else self.leading_term.tolist(),
            **self.details,
        }


def _require(value, item: str, label: str):
    if value is None:
        raise InputValidationError(f"the {item} bound needs {label}")
    return value


def bias_bound_check(setup: TheoremSetup) -> ExpansionReport:
    """‖Q{θ*_G − θ* + bias}‖ against ‖QD⁻¹‖(3κ²τ₃/4)b_𝒟²."""
    gap = setup.q_map @ (setup.theta_star_g - setup.truth.theta_star + setup.bias_theta)
    return ExpansionReport(
        item="bias",
        remainder_bound=setup.remainder_constant * setup.b_d**2,
        applicable=setup.check.applicable,
        observed_remainder=float(np.linalg.norm(gap)),
        leading_term=setup.bias_theta,
        details={"b_d": setup.b_d},
    )


def expansion_bounds(
    setup: TheoremSetup,
    which: ExpansionItem,
    score: Optional[ScoreVector] = None,
    theta_fit=None,
    obs: Optional[Observation] = None,
    observed: Optional[float] = None,
    c4: float = DEFAULT_C4,
) -> ExpansionReport:
    """
    The right-hand side of one item of the expansion theorem, with the observed remainder when the
    fitted θ̃_G (and, for Wilks, the data) are supplied. For `l2` and `squared` the observed value is
    a Monte-Carlo risk passed in as `observed`.
    """
    if which not in EXPANSION_ITEMS:
        raise InputValidationError(f"unknown expansion item {which!r}; expected one of {EXPANSION_ITEMS}")
    info, region = setup.info, setup.region
    applicable = setup.check.applicable
    constant = setup.remainder_constant

    if which == "bias":
        return bias_bound_check(setup)

    if which == "l2":
        bound = float(np.sqrt(setup.risk_q) + constant * (setup.p_bar + setup.b_d**2))
        return ExpansionReport("l2", bound, applicable, observed, details={"risk_q": setup.risk_q})

    if which == "squared":
        risk = setup.risk_q
        numerator = constant * (c4 * setup.p_bar + setup.b_d**2)
        if risk > 0.0:
            alpha = numerator / np.sqrt(risk)
        else:
            alpha = 0.0 if numerator == 0.0 else np.inf
        lower, upper = (max(1.0 - alpha, 0.0)) ** 2 * risk, (1.0 + alpha) ** 2 * risk
        return ExpansionReport(
            "squared",
            float(upper),
            bool(applicable and alpha < 1.0),
            observed,
            details={"alpha_q": float(alpha), "lower": float(lower), "upper": float(upper), "risk_q": risk, "c4": c4},
        )

    score = _require(score, which, "the score")
    lead = fisher_leading_term(info, score)
    full, nuisance = score_norms(info, score, region)
    details = {"score_norm": full, "nuisance_score_norm": nuisance}

    if which == "fisher":
        observed_value = None
        if theta_fit is not None:
            residual = np.asarray(theta_fit, dtype=float) - setup.theta_star_g - lead
            observed_value = float(np.linalg.norm(setup.q_map @ residual))
        return ExpansionReport("fisher", constant * full**2, applicable, observed_value, lead, details)

    if which == "pac":
        observed_value = None
        if theta_fit is not None:
            residual = np.asarray(theta_fit, dtype=float) - setup.truth.theta_star - lead + setup.bias_theta
            observed_value = float(np.linalg.norm(setup.q_map @ residual))
        bound = constant * (full**2 + setup.b_d**2)
        return ExpansionReport("pac", bound, applicable, observed_value, lead, details)

    # wilks
    xi = efficient_score(info, score)
    observed_value = None
    if theta_fit is not None:
        obs = _require(obs, which, "the observation")
        gap = 2.0 * profile_value(obs, theta_fit, setup.pen) - 2.0 * profile_value(obs, setup.theta_star_g, setup.pen)
        observed_value = float(abs(gap - xi @ xi))
    bound = 0.5 * setup.tau3 * (full**3 + nuisance**3)
    return ExpansionReport("wilks", float(bound), applicable, observed_value, xi, details)
