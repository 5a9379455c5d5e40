"""
Spectral risk calculators: ridge and spectral-cutoff risk, the approximation-space quantities of a
(J, M) truncation and the predicted rates under polynomial decay.

Signals passed to the calculators are expressed in the eigenbasis of D² (for the direct generator
this is the canonical basis).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from .errors import DimensionMismatchError, InputValidationError
from .penalty import ridge_cutoff_index

logger = logging.getLogger("eio")

DEFAULT_RHO = 0.5
DEFAULT_CRITICAL_THRESHOLD = 0.1
PHASE_TRANSITION_FLAG = "phase-transition regime: use cutoff"


def _descending(values, label: str) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.ndim != 1:
        raise InputValidationError(f"{label} must be a vector")
    if np.any(v < 0.0) or not np.all(np.isfinite(v)):
        raise InputValidationError(f"{label} must be finite and nonnegative")
    if np.any(np.diff(v) > 0.0):
        raise InputValidationError(f"{label} must be sorted in descending order")
    return v


@dataclass(frozen=True)
class SpectralProfile:
    """
    Attributes:
        n_seq (np.ndarray): N_j, the eigenvalues of D² in descending order
        tail_seq (np.ndarray): 𝔫_m, the tail norms of the operator rows, descending
        w2_seq (np.ndarray): Smoothness weights w_j²
        s (float): Decay exponent of N_j
        beta (float): Smoothness exponent of w_j
        c_w (float): Scale of w_j²
        n1 (float): Scale of N_j
    """

    n_seq: np.ndarray
    tail_seq: np.ndarray
    w2_seq: np.ndarray
    s: float = 1.0
    beta: float = 1.0
    c_w: float = 1.0
    n1: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "n_seq", _descending(self.n_seq, "n_seq"))
        object.__setattr__(self, "tail_seq", _descending(self.tail_seq, "tail_seq"))
        w2 = np.asarray(self.w2_seq, dtype=float)
        if w2.shape != self.n_seq.shape:
            raise DimensionMismatchError(f"w2_seq has shape {w2.shape}, expected {self.n_seq.shape}")
        if np.any(w2 < 0.0):
            raise InputValidationError("w2_seq must be nonnegative")
        object.__setattr__(self, "w2_seq", w2)

    @classmethod
    def parametric(
        cls, p: int, q: Optional[int] = None, s: float = 1.0, beta: float = 1.0, c_w: float = 1.0, n1: float = 1.0
    ) -> "SpectralProfile":
        """N_j = N₁j^{−2s}, w_j² = C_w j^{2β} and 𝔫_m = N_m for m ≤ p, 0 beyond."""
        q = p if q is None else q
        j = np.arange(1, p + 1, dtype=float)
        n_seq = n1 * j ** (-2.0 * s)
        tail = np.zeros(q)
        tail[: min(p, q)] = n_seq[: min(p, q)]
        return cls(n_seq=n_seq, tail_seq=tail, w2_seq=c_w * j ** (2.0 * beta), s=s, beta=beta, c_w=c_w, n1=n1)

    @classmethod
    def from_operator(cls, a_star, w2_seq, s: float = 1.0, beta: float = 1.0, c_w: float = 1.0) -> "SpectralProfile":
        a_star = np.asarray(a_star, dtype=float)
        n_seq = linalg.eigvalsh(a_star.T @ a_star)[::-1].clip(min=0.0)
        tail = np.array([_row_tail(a_star, m) for m in range(a_star.shape[0])])
        return cls(n_seq=n_seq, tail_seq=tail, w2_seq=w2_seq, s=s, beta=beta, c_w=c_w, n1=float(n_seq[0]))

    @property
    def p(self) -> int:
        return self.n_seq.size

    def tail(self, m: int) -> float:
        """𝔫_m with 1-based m; 0 past the last row."""
        if m < 1:
            raise InputValidationError(f"tail index must be at least 1, got {m}")
        return float(self.tail_seq[m - 1]) if m <= self.tail_seq.size else 0.0


def _row_tail(a_star: np.ndarray, m: int) -> float:
    """‖A*ᵀ(I − P_m)A*‖ = ‖A*[m:]‖₂² with 0-based m rows kept."""
    rest = a_star[m:]
    if rest.size == 0:
        return 0.0
    return float(np.linalg.norm(rest, 2) ** 2)


@dataclass(frozen=True)
class RiskBreakdown:
    """
    Attributes:
        variance_term (float): Upper bound for the variance part
        bias_term (float): Upper bound for the bias part
        exact_variance (float): The sandwich trace the variance term bounds
        exact_bias (float): The squared bias the bias term bounds
        constants (dict): κ and the regularization used
        flags (list[str]): Regime notes, e.g. the phase-transition flag
    """

    variance_term: float
    bias_term: float
    exact_variance: float
    exact_bias: float
    constants: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    @property
    def total(self) -> float:
        return self.variance_term + self.bias_term

    @property
    def exact_total(self) -> float:
        return self.exact_variance + self.exact_bias

    def to_dict(self) -> dict:
        return {
            "variance_term": self.variance_term,
            "bias_term": self.bias_term,
            "total": self.total,
            "exact_variance": self.exact_variance,
            "exact_bias": self.exact_bias,
            "exact_total": self.exact_total,
            "constants": self.constants,
            "flags": list(self.flags),
        }


def _theta(profile: SpectralProfile, theta_star) -> np.ndarray:
    theta = np.asarray(theta_star, dtype=float)
    if theta.shape != (profile.p,):
        raise DimensionMismatchError(f"theta_star has shape {theta.shape}, expected ({profile.p},)")
    return theta


def ridge_risk_bound(profile: SpectralProfile, theta_star, g2: float, kappa: float) -> RiskBreakdown:
    """
    Variance κ⁴Σ_{j≤J}N_j⁻¹ + g⁻⁴Σ_{j>J}N_j with J = J_g, and bias max_j w_j⁻²/(κ⁻²g⁻²N_j + 1),
    of order w_J⁻² when w_j increases and w_jN_j decreases (otherwise flagged).
    """
    theta = _theta(profile, theta_star)
    n = profile.n_seq
    j_cut = ridge_cutoff_index(n, kappa, g2)
    positive = n > 0.0
    head = n[:j_cut]
    variance = kappa**4 * float(np.sum(1.0 / head[head > 0.0]))
    if g2 > 0.0:
        variance += float(np.sum(n[j_cut:])) / g2**2
    exact_variance = float(np.sum(n[positive] / (n[positive] / kappa**2 + g2) ** 2))

    flags = []
    if g2 > 0.0:
        shrink = 1.0 / (n / (kappa**2 * g2) + 1.0)
    else:
        shrink = np.where(positive, 0.0, 1.0)
    exact_bias = float(np.sum((shrink * theta) ** 2))

    w2 = profile.w2_seq
    if np.any((w2 == 0.0) & (shrink > 0.0)):
        bias = math.inf
    else:
        bias = float(np.max(np.where(shrink > 0.0, shrink / np.where(w2 > 0.0, w2, 1.0), 0.0)))
    w = np.sqrt(w2)
    if not (np.all(np.diff(w) >= 0.0) and np.all(np.diff(w * n) <= 0.0)):
        flags.append(PHASE_TRANSITION_FLAG)
        logger.info("Ridge bias premise fails; %s", PHASE_TRANSITION_FLAG)
    constants = {"kappa": kappa, "g2": g2, "J": j_cut}
    if j_cut >= 1 and w2[j_cut - 1] > 0.0:
        constants["w_J^-2"] = float(1.0 / w2[j_cut - 1])
    return RiskBreakdown(
        variance_term=variance,
        bias_term=bias,
        exact_variance=exact_variance,
        exact_bias=exact_bias,
        constants=constants,
        flags=flags,
    )


def cutoff_risk_bound(profile: SpectralProfile, theta_star, j: int, kappa: float) -> RiskBreakdown:
    """Variance κ⁴Σ_{j≤J}N_j⁻¹ and bias ‖(I − Π_J)θ*‖², both exact."""
    theta = _theta(profile, theta_star)
    if not 1 <= j <= profile.p:
        raise InputValidationError(f"cutoff J={j} outside 1..{profile.p}")
    head = profile.n_seq[:j]
    if np.any(head <= 0.0):
        raise InputValidationError(f"N_j must be positive up to the cutoff J={j}")
    variance = kappa**4 * float(np.sum(1.0 / head))
    bias = float(theta[j:] @ theta[j:])
    return RiskBreakdown(
        variance_term=variance,
        bias_term=bias,
        exact_variance=variance,
        exact_bias=bias,
        constants={"kappa": kappa, "J": j},
    )


@dataclass(frozen=True)
class AppspaceQuantities:
    """
    Attributes:
        n_seq (np.ndarray): N_1..N_J, N_j = λ_min of the leading j×j block of D²
        tail (float): 𝔫_{M+1}
        trace_exact (float): tr(D_{J,M}⁻²)
        trace_bound (Optional[float]): Σ_{j≤J}1/(N_j − 𝔫_{M+1}) when the premise holds
    """

    j: int
    m: int
    n_seq: np.ndarray
    tail: float
    trace_exact: float
    trace_bound: Optional[float]

    @property
    def n_j(self) -> float:
        return float(self.n_seq[-1])

    @property
    def applicable(self) -> bool:
        return bool(self.tail <= 0.5 * self.n_j)

    def to_dict(self) -> dict:
        return {
            "J": self.j,
            "M": self.m,
            "N_J": self.n_j,
            "tail": self.tail,
            "trace_exact": self.trace_exact,
            "trace_bound": self.trace_bound,
            "applicable": self.applicable,
        }


def appspace_quantities(a_star, j: int, m: int) -> AppspaceQuantities:
    a_star = np.asarray(a_star, dtype=float)
    q, p = a_star.shape
    if not 1 <= j <= p or not 1 <= m <= q:
        raise InputValidationError(f"(J, M)=({j}, {m}) outside 1..{p} x 1..{q}")
    d2 = a_star.T @ a_star
    n_seq = np.array([linalg.eigvalsh(d2[:k, :k])[0] for k in range(1, j + 1)])
    tail = _row_tail(a_star, m)
    reduced = a_star[:m, :j]
    eigs = linalg.eigvalsh(reduced.T @ reduced)
    trace_exact = float(np.sum(1.0 / eigs)) if np.all(eigs > 0.0) else math.inf
    premise = tail <= 0.5 * n_seq[-1]
    trace_bound = float(np.sum(1.0 / (n_seq - tail))) if premise else None
    if not premise:
        logger.info("Approximation-space premise fails: tail %.4g > N_J/2 = %.4g", tail, 0.5 * n_seq[-1])
    return AppspaceQuantities(j=j, m=m, n_seq=n_seq, tail=tail, trace_exact=trace_exact, trace_bound=trace_bound)


@dataclass(frozen=True)
class TruncationBiasBound:
    value: float
    applicable: bool

    def to_dict(self) -> dict:
        return {"value": self.value, "applicable": self.applicable}


def truncation_bias_bound(profile: SpectralProfile, theta_star, j: int, m: int, kappa: float) -> TruncationBiasBound:
    """‖(I − Π_J)θ*‖ + κ²𝔫_{M+1}/(2N_J)·‖θ*‖, valid when 𝔫_{M+1} ≤ N_J/2."""
    theta = _theta(profile, theta_star)
    if not 1 <= j <= profile.p:
        raise InputValidationError(f"cutoff J={j} outside 1..{profile.p}")
    n_j = float(profile.n_seq[j - 1])
    if n_j <= 0.0:
        raise InputValidationError(f"N_J must be positive, got {n_j}")
    tail = profile.tail(m + 1)
    value = float(np.linalg.norm(theta[j:]) + kappa**2 * tail / (2.0 * n_j) * np.linalg.norm(theta))
    return TruncationBiasBound(value=value, applicable=bool(tail <= 0.5 * n_j))


@dataclass(frozen=True)
class RatePrediction:
    j_opt: int
    m_opt: int
    risk_order: float
    j_exponent: float
    risk_exponent: float

    def to_dict(self) -> dict:
        return {
            "J": self.j_opt,
            "M": self.m_opt,
            "risk_order": self.risk_order,
            "j_exponent": self.j_exponent,
            "risk_exponent": self.risk_exponent,
        }


def rate_prediction(
    s: float,
    beta: float,
    c_w: float,
    n1: float,
    p: Optional[int] = None,
    rho: float = DEFAULT_RHO,
    profile: Optional[SpectralProfile] = None,
) -> RatePrediction:
    """
    J ≍ (N₁/C_w)^{1/(1+2β+2s)}, M the smallest m with 𝔫_{m+1} ≤ ρN_J, and the risk order
    C_w^{−(2s+1)/(1+2β+2s)}·N₁^{−2β/(1+2β+2s)}.
    """
    if s <= 0.5 or beta <= 0.0 or n1 <= 0.0 or c_w <= 0.0:
        raise InputValidationError("rate prediction needs s > 1/2, beta > 0, c_w > 0 and n1 > 0")
    if not 0.0 < rho <= DEFAULT_RHO:
        raise InputValidationError(f"rho must lie in (0, 1/2], got {rho}")
    denominator = 1.0 + 2.0 * beta + 2.0 * s
    j_opt = max(1, int(round((n1 / c_w) ** (1.0 / denominator))))
    if p is not None:
        j_opt = min(j_opt, p)
    n_j = n1 * j_opt ** (-2.0 * s)

    def tail(k: int) -> float:
        if profile is not None:
            return profile.tail(k)
        if p is not None and k > p:
            return 0.0
        return n1 * k ** (-2.0 * s)

    m_opt = 1
    while tail(m_opt + 1) > rho * n_j:
        m_opt += 1
    risk_exponent = -2.0 * beta / denominator
    risk_order = c_w ** (-(2.0 * s + 1.0) / denominator) * n1**risk_exponent
    return RatePrediction(
        j_opt=j_opt, m_opt=m_opt, risk_order=float(risk_order), j_exponent=1.0 / denominator, risk_exponent=risk_exponent
    )


@dataclass(frozen=True)
class CriticalDimension:
    ratio: float
    threshold: float

    @property
    def consistent(self) -> bool:
        return bool(self.ratio < self.threshold)

    def to_dict(self) -> dict:
        return {"ratio": self.ratio, "threshold": self.threshold, "consistent": self.consistent}


def critical_dimension_check(
    p: int, m: int, mu2: float, n_eff: float, threshold: float = DEFAULT_CRITICAL_THRESHOLD
) -> CriticalDimension:
    """pM/(μ²N); the consistent-estimation regime is flagged when the ratio is below `threshold`."""
    if mu2 <= 0.0 or n_eff <= 0.0:
        raise InputValidationError("critical dimension check needs mu2 > 0 and n_eff > 0")
    return CriticalDimension(ratio=p * m / (mu2 * n_eff), threshold=threshold)
