"""
Penalized maximum likelihood over the extended parameter (θ, z, A).

The maximizer cycles exact block updates z → A → θ, each of which solves the first-order condition of
its block in closed form, then optionally polishes the iterate with Newton steps that reuse the
structured nuisance elimination of the information matrix.
"""

import logging
from dataclasses import dataclass, field
from typing import Literal, Optional, Union

import numpy as np

from .errors import InputValidationError, SingularBlockError
from .infomatrix import InfoMatrix
from .model import RegionDiagnostic, gradient, objective, region_membership
from .parameter import FullParameter, LocalRegion, Observation, TruthSpec
from .penalty import PenaltyConfig, SignalPenalty
from .schur import SpdFactor

logger = logging.getLogger("eio")

DEFAULT_MAX_ITERS = 500
DEFAULT_OBJ_RTOL = 1e-12
DEFAULT_GRAD_RTOL = 1e-8
GRAD_ROUNDOFF = 1e-13
MAX_NEWTON_STEPS = 25
MIN_NEWTON_STEP = 2.0**-20


@dataclass(frozen=True)
class SolveOptions:
    """
    Options for the block ascent.

    Attributes:
        max_iters (int): Maximum number of z → A → θ cycles
        obj_tol (Optional[float]): Absolute stall threshold on the objective increase; default 1e-12·(1 + |L|)
        grad_tol (Optional[float]): Threshold on the full gradient norm; default from `default_grad_tol`
        newton_refine (bool): Polish with Newton steps when the block ascent stalls
        init (Union[str, FullParameter]): "zeros", "plugin" or a starting point
        clamp_region (bool): Project every iterate onto Υ° (needs a region and the truth)
    """

    max_iters: int = DEFAULT_MAX_ITERS
    obj_tol: Optional[float] = None
    grad_tol: Optional[float] = None
    newton_refine: bool = True
    init: Union[Literal["zeros", "plugin"], FullParameter] = "plugin"
    clamp_region: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise InputValidationError(f"max_iters must be at least 1, got {self.max_iters}")
        for name in ("obj_tol", "grad_tol"):
            value = getattr(self, name)
            if value is not None and not value > 0.0:
                raise InputValidationError(f"{name} must be positive, got {value}")
        if isinstance(self.init, str) and self.init not in ("zeros", "plugin"):
            raise InputValidationError(f"init must be 'zeros', 'plugin' or a parameter, got {self.init!r}")


@dataclass(frozen=True)
class FitResult:
    param: FullParameter
    objective: float
    grad_norm: float
    iters: int
    converged: bool
    grad_tol: float
    newton_steps: int = 0
    region_diagnostic: Optional[RegionDiagnostic] = None

    @property
    def theta(self) -> np.ndarray:
        return self.param.theta

    def to_dict(self) -> dict:
        return {
            "theta": self.param.theta.tolist(),
            "z": self.param.z.tolist(),
            "a": self.param.a.tolist(),
            "objective": self.objective,
            "grad_norm": self.grad_norm,
            "grad_tol": self.grad_tol,
            "iters": self.iters,
            "newton_steps": self.newton_steps,
            "converged": self.converged,
            "region": self.region_diagnostic.to_dict() if self.region_diagnostic else None,
        }


def gradient_norm(grad: FullParameter) -> float:
    return float(np.linalg.norm(grad.flat()))


def default_grad_tol(obs: Observation) -> float:
    """
    1e-8·(1 + ‖(Z, Â)‖) + 1e-13·μ²‖Â‖. The second term is the roundoff floor of the operator block
    μ²(Â − A) + (z − Aθ)θᵀ of the gradient, whose entries carry μ² times the representation error of A.
    """
    a_norm = float(np.linalg.norm(obs.a_hat))
    return DEFAULT_GRAD_RTOL * (1.0 + obs.data_norm()) + GRAD_ROUNDOFF * obs.mu2 * a_norm


def block_update_z(obs: Observation, param: FullParameter) -> np.ndarray:
    """z ← (Z + Aθ)/2."""
    return 0.5 * (obs.z_obs + param.a @ param.theta)


def block_update_theta(obs: Observation, param: FullParameter, pen: Optional[PenaltyConfig] = None) -> np.ndarray:
    """θ ← (AᵀA + G²)⁻¹Aᵀz on the active signal coordinates, zero elsewhere."""
    pen = pen or PenaltyConfig.none()
    active = np.flatnonzero(pen.theta_mask(param.p))
    a_active = param.a[:, active]
    normal = a_active.T @ a_active + np.diag(pen.g2(param.p)[active])
    try:
        solved = SpdFactor(normal, "theta_normal").solve(a_active.T @ param.z)
    except SingularBlockError as exc:
        raise SingularBlockError("theta_normal", "AᵀA + G² is singular on the active coordinates; add a ridge penalty") from exc
    theta = np.zeros(param.p)
    theta[active] = solved
    return theta


def block_update_a(obs: Observation, param: FullParameter, pen: Optional[PenaltyConfig] = None) -> np.ndarray:
    """A_m ← (μ²I + θθᵀ + K_m²)⁻¹(μ²Â_m + z_mθ) on the active rows, zero elsewhere."""
    pen = pen or PenaltyConfig.none()
    theta = param.theta
    diagonal = obs.mu2 + pen.k2(param.q, param.p)
    rhs = obs.mu2 * obs.a_hat + np.outer(param.z, theta)
    rows = pen.row_mask(param.q)
    if np.all(diagonal[rows] > 0.0):
        # Sherman-Morrison on diag(μ² + k²_m) + θθᵀ, all rows at once
        d_inv_rhs = rhs / diagonal
        d_inv_theta = theta[None, :] / diagonal
        coefficient = (d_inv_rhs @ theta) / (1.0 + d_inv_theta @ theta)
        a = d_inv_rhs - coefficient[:, None] * d_inv_theta
    else:
        a = np.zeros_like(rhs)
        for m in np.flatnonzero(rows):
            system = np.outer(theta, theta) + np.diag(diagonal[m])
            a[m] = SpdFactor(system, f"a_row[{m + 1}]").solve(rhs[m])
    return np.where(rows[:, None], a, 0.0)


def plugin_lse(z_obs, a_hat) -> np.ndarray:
    """θ = (ÂᵀÂ)⁻¹ÂᵀZ."""
    a_hat = np.atleast_2d(np.asarray(a_hat, dtype=float))
    z_obs = np.atleast_1d(np.asarray(z_obs, dtype=float))
    return SpdFactor(a_hat.T @ a_hat, "plugin_normal").solve(a_hat.T @ z_obs)


def benchmark_ridge(z_obs, a_star, signal: Optional[SignalPenalty] = None) -> np.ndarray:
    """θ̂_G = (A*ᵀA* + G²)⁻¹A*ᵀZ, the estimator with a precisely known operator."""
    a_star = np.atleast_2d(np.asarray(a_star, dtype=float))
    z_obs = np.atleast_1d(np.asarray(z_obs, dtype=float))
    pen = PenaltyConfig(signal=signal) if signal is not None else PenaltyConfig.none()
    p = a_star.shape[1]
    active = np.flatnonzero(pen.theta_mask(p))
    a_active = a_star[:, active]
    normal = a_active.T @ a_active + np.diag(pen.g2(p)[active])
    theta = np.zeros(p)
    theta[active] = SpdFactor(normal, "benchmark_normal").solve(a_active.T @ z_obs)
    return theta


def initial_point(obs: Observation, pen: PenaltyConfig, opts: SolveOptions) -> FullParameter:
    if isinstance(opts.init, FullParameter):
        obs.check_parameter(opts.init)
        pen.check_feasible(opts.init)
        return opts.init
    if opts.init == "zeros":
        return FullParameter.zeros(obs.p, obs.q)
    a = np.where(pen.row_mask(obs.q)[:, None], obs.a_hat, 0.0)
    active = np.flatnonzero(pen.theta_mask(obs.p))
    theta = np.zeros(obs.p)
    try:
        theta[active] = plugin_lse(obs.z_obs, a[:, active])
    except SingularBlockError:
        logger.debug("Plug-in start is ill-posed, starting from theta = 0")
    return FullParameter(theta, 0.5 * (obs.z_obs + a @ theta), a)


def clamp_to_region(param: FullParameter, region: LocalRegion, truth: TruthSpec) -> FullParameter:
    """Radially shrink each block of `param` into Υ°."""
    diagnostic = region_membership(param, region, truth)
    theta_scale = min(1.0, diagnostic.radius / diagnostic.theta_norm) if diagnostic.theta_norm > 0 else 1.0
    z_scale = min(1.0, diagnostic.radius / diagnostic.z_norm) if diagnostic.z_norm > 0 else 1.0
    a_scale = min(1.0, region.delta0 / diagnostic.operator_deviation) if diagnostic.operator_deviation > 0 else 1.0
    return FullParameter(
        theta_scale * param.theta, z_scale * param.z, truth.a_star + a_scale * (param.a - truth.a_star)
    )


def _newton_refine(
    obs: Observation, pen: PenaltyConfig, param: FullParameter, value: float, grad_tol: float
) -> tuple[FullParameter, float, int]:
    steps = 0
    for _ in range(MAX_NEWTON_STEPS):
        grad = gradient(obs, param, pen)
        if gradient_norm(grad) <= grad_tol:
            break
        try:
            direction = InfoMatrix.from_parameter(param, obs.mu2, pen).solve(grad)
        except SingularBlockError as exc:
            logger.warning("Newton refinement stopped: %s", exc)
            break
        step = 1.0
        slack = DEFAULT_OBJ_RTOL * (1.0 + abs(value))
        while step >= MIN_NEWTON_STEP:
            candidate = pen.project(param.shifted(direction, step))
            candidate_value = objective(obs, candidate, pen)
            if candidate_value >= value - slack:
                break
            step *= 0.5
        else:
            logger.debug("Newton line search failed to make progress")
            break
        param, value = candidate, candidate_value
        steps += 1
    return param, value, steps


def maximize(
    obs: Observation,
    pen: Optional[PenaltyConfig] = None,
    opts: Optional[SolveOptions] = None,
    truth: Optional[TruthSpec] = None,
    region: Optional[LocalRegion] = None,
) -> FitResult:
    """υ̃_G = argmax L_G by block coordinate ascent."""
    pen = pen or PenaltyConfig.none()
    opts = opts or SolveOptions()
    if opts.clamp_region and (region is None or truth is None):
        raise InputValidationError("clamp_region needs both a region and the truth")
    grad_tol = opts.grad_tol if opts.grad_tol is not None else default_grad_tol(obs)

    param = initial_point(obs, pen, opts)
    value = objective(obs, param, pen)
    best, best_value = param, value
    grad_norm = gradient_norm(gradient(obs, param, pen))
    iters = 0
    while grad_norm > grad_tol and iters < opts.max_iters:
        iters += 1
        param = param.with_values(z=block_update_z(obs, param))
        param = param.with_values(a=block_update_a(obs, param, pen))
        param = param.with_values(theta=block_update_theta(obs, param, pen))
        if opts.clamp_region:
            param = clamp_to_region(param, region, truth)
        new_value = objective(obs, param, pen)
        increase = new_value - value
        value = new_value
        if value >= best_value:
            best, best_value = param, value
        grad_norm = gradient_norm(gradient(obs, param, pen))
        obj_tol = opts.obj_tol if opts.obj_tol is not None else DEFAULT_OBJ_RTOL * (1.0 + abs(value))
        if increase < obj_tol:
            break

    param, value = best, best_value
    newton_steps = 0
    if opts.newton_refine and not opts.clamp_region:
        grad_norm = gradient_norm(gradient(obs, param, pen))
        if grad_norm > grad_tol:
            param, value, newton_steps = _newton_refine(obs, pen, param, value, grad_tol)
    grad_norm = gradient_norm(gradient(obs, param, pen))
    converged = grad_norm <= grad_tol
    if not converged:
        logger.warning(
            "Fit did not converge after %d cycles and %d Newton steps: gradient norm %.3g > %.3g",
            iters,
            newton_steps,
            grad_norm,
            grad_tol,
        )

    diagnostic = None
    if region is not None and truth is not None:
        diagnostic = region_membership(param, region, truth)
        if not diagnostic.inside:
            logger.warning("Fit left the local region: %s", diagnostic.to_dict())
    logger.debug("Fit finished: objective %.12g, %d cycles, %d Newton steps", value, iters, newton_steps)
    return FitResult(
        param=param,
        objective=value,
        grad_norm=grad_norm,
        iters=iters,
        converged=converged,
        grad_tol=grad_tol,
        newton_steps=newton_steps,
        region_diagnostic=diagnostic,
    )


def population_fit(
    truth: TruthSpec,
    mu2: float,
    pen: Optional[PenaltyConfig] = None,
    opts: Optional[SolveOptions] = None,
    region: Optional[LocalRegion] = None,
) -> FitResult:
    """υ*_G: the maximizer of the expected objective, which is the fit on noiseless data."""
    return maximize(truth.noiseless_observation(mu2), pen, opts, truth=truth, region=region)


def profile_fit(obs: Observation, theta, pen: Optional[PenaltyConfig] = None) -> FullParameter:
    """
    The maximizer over the nuisance (z, A) at fixed θ.

    At fixed θ the objective is a concave quadratic in (z, A) whose Hessian is 𝔽_ηη(θ), so the
    maximizer solves 𝔽_ηη (z, A) = (Z, μ²Â) in one structured elimination.
    """
    pen = pen or PenaltyConfig.none()
    theta = np.asarray(theta, dtype=float)
    start = FullParameter(theta, np.zeros(obs.q), np.zeros((obs.q, obs.p)))
    pen.check_feasible(start)
    info = InfoMatrix.from_parameter(start, obs.mu2, pen)
    z, a = info.nuisance_solve(obs.z_obs, obs.mu2 * obs.a_hat)
    return FullParameter(theta, z, a)


def profile_value(obs: Observation, theta, pen: Optional[PenaltyConfig] = None) -> float:
    """𝕃_G(θ) = sup over (z, A) of L_G(θ, z, A)."""
    return objective(obs, profile_fit(obs, theta, pen), pen)
