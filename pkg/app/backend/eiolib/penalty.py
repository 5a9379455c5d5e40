"""
Signal and operator penalties.

Every penalty here is diagonal: G² = diag(g_j²) and K_m² = diag(k_mj²). Truncation variants never
carry an infinite weight; they mark coordinates inactive through a boolean mask instead, and inactive
coordinates are pinned to zero.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, InfeasibleParameterError, InputValidationError
from .parameter import FullParameter, Observation
from .schur import frozen

logger = logging.getLogger("eio")


def _nonnegative(values, label: str) -> np.ndarray:
    v = np.array(values, dtype=float)
    if not np.all(np.isfinite(v)) or np.any(v < 0.0):
        raise InputValidationError(f"{label} must be finite and nonnegative")
    return frozen(v)


class SignalPenalty(ABC):
    """G² for the signal θ: finite weights plus an active-coordinate mask."""

    @abstractmethod
    def weights(self, p: int) -> np.ndarray:
        """g_j² on active coordinates, 0 on masked ones."""

    def mask(self, p: int) -> np.ndarray:
        return np.ones(p, dtype=bool)

    def is_zero(self) -> bool:
        return False

    @abstractmethod
    def describe(self) -> dict:
        pass


@dataclass(frozen=True)
class NoSignalPenalty(SignalPenalty):
    def weights(self, p: int) -> np.ndarray:
        return np.zeros(p)

    def is_zero(self) -> bool:
        return True

    def describe(self) -> dict:
        return {"kind": "none"}


@dataclass(frozen=True)
class RidgePenalty(SignalPenalty):
    g2: float

    def __post_init__(self):
        if not np.isfinite(self.g2) or self.g2 < 0.0:
            raise InputValidationError(f"ridge g2 must be finite and nonnegative, got {self.g2}")

    def weights(self, p: int) -> np.ndarray:
        return np.full(p, float(self.g2))

    def is_zero(self) -> bool:
        return self.g2 == 0.0

    def describe(self) -> dict:
        return {"kind": "ridge", "g2": self.g2}


@dataclass(frozen=True)
class DiagonalPenalty(SignalPenalty):
    g2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g2", _nonnegative(self.g2, "diagonal g2"))

    def weights(self, p: int) -> np.ndarray:
        if self.g2.shape != (p,):
            raise DimensionMismatchError(f"diagonal penalty has {self.g2.size} weights, expected {p}")
        return np.array(self.g2)

    def is_zero(self) -> bool:
        return not np.any(self.g2)

    def describe(self) -> dict:
        return {"kind": "diagonal", "g2": self.g2.tolist()}


@dataclass(frozen=True)
class RoughnessPenalty(SignalPenalty):
    """Sobolev-type weights g_j² = w²·j^{2β}, j = 1..p."""

    w2: float
    beta: float

    def __post_init__(self):
        if self.w2 < 0.0 or self.beta < 0.0:
            raise InputValidationError("roughness w2 and beta must be nonnegative")

    def weights(self, p: int) -> np.ndarray:
        return self.w2 * np.arange(1, p + 1, dtype=float) ** (2.0 * self.beta)

    def is_zero(self) -> bool:
        return self.w2 == 0.0

    def describe(self) -> dict:
        return {"kind": "roughness", "w2": self.w2, "beta": self.beta}


@dataclass(frozen=True)
class TruncationPenalty(SignalPenalty):
    """Keeps the leading `j` signal coordinates (1-based count), masks the rest."""

    j: int

    def __post_init__(self):
        if self.j < 1:
            raise InputValidationError(f"truncation index J must be at least 1, got {self.j}")

    def weights(self, p: int) -> np.ndarray:
        return np.zeros(p)

    def mask(self, p: int) -> np.ndarray:
        if self.j > p:
            raise InputValidationError(f"truncation index J={self.j} exceeds p={p}")
        return np.arange(p) < self.j

    def describe(self) -> dict:
        return {"kind": "truncation", "j": self.j}


class OperatorPenalty(ABC):
    """Per-row penalties K_m² for the operator rows A_m, stored as a q×p matrix of diagonal weights."""

    @abstractmethod
    def weights(self, q: int, p: int) -> np.ndarray:
        pass

    def row_mask(self, q: int) -> np.ndarray:
        return np.ones(q, dtype=bool)

    def is_zero(self) -> bool:
        return False

    @abstractmethod
    def describe(self) -> dict:
        pass


@dataclass(frozen=True)
class NoOperatorPenalty(OperatorPenalty):
    def weights(self, q: int, p: int) -> np.ndarray:
        return np.zeros((q, p))

    def is_zero(self) -> bool:
        return True

    def describe(self) -> dict:
        return {"kind": "none"}


@dataclass(frozen=True)
class ElementwisePenalty(OperatorPenalty):
    """‖A‖²_K = Σ k²_mj A²_mj."""

    k2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "k2", _nonnegative(self.k2, "elementwise k2"))

    def weights(self, q: int, p: int) -> np.ndarray:
        if self.k2.shape != (q, p):
            raise DimensionMismatchError(f"elementwise penalty has shape {self.k2.shape}, expected {(q, p)}")
        return np.array(self.k2)

    def is_zero(self) -> bool:
        return not np.any(self.k2)

    def describe(self) -> dict:
        return {"kind": "elementwise", "k2": self.k2.tolist()}


@dataclass(frozen=True)
class RowScalarPenalty(OperatorPenalty):
    """K_m² = k_m²·I_p."""

    k2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "k2", _nonnegative(np.atleast_1d(self.k2), "row k2"))

    def weights(self, q: int, p: int) -> np.ndarray:
        if self.k2.shape != (q,):
            raise DimensionMismatchError(f"row-scalar penalty has {self.k2.size} weights, expected {q}")
        return np.repeat(self.k2[:, None], p, axis=1)

    def is_zero(self) -> bool:
        return not np.any(self.k2)

    def describe(self) -> dict:
        return {"kind": "row_scalar", "k2": self.k2.tolist()}


@dataclass(frozen=True)
class RowTruncationPenalty(OperatorPenalty):
    """Keeps the leading `m` operator rows, masks the rest."""

    m: int

    def __post_init__(self):
        if self.m < 1:
            raise InputValidationError(f"row truncation index M must be at least 1, got {self.m}")

    def weights(self, q: int, p: int) -> np.ndarray:
        return np.zeros((q, p))

    def row_mask(self, q: int) -> np.ndarray:
        if self.m > q:
            raise InputValidationError(f"row truncation index M={self.m} exceeds q={q}")
        return np.arange(q) < self.m

    def describe(self) -> dict:
        return {"kind": "row_truncation", "m": self.m}


@dataclass(frozen=True)
class PenaltyConfig:
    """𝒢² = block{G², 0, K²}."""

    signal: SignalPenalty = field(default_factory=NoSignalPenalty)
    operator: OperatorPenalty = field(default_factory=NoOperatorPenalty)

    @classmethod
    def none(cls) -> "PenaltyConfig":
        return cls()

    @classmethod
    def truncation(cls, j: int, m: int) -> "PenaltyConfig":
        return cls(TruncationPenalty(j), RowTruncationPenalty(m))

    def is_zero(self) -> bool:
        return self.signal.is_zero() and self.operator.is_zero()

    def g2(self, p: int) -> np.ndarray:
        return self.signal.weights(p) * self.signal.mask(p)

    def theta_mask(self, p: int) -> np.ndarray:
        return self.signal.mask(p)

    def k2(self, q: int, p: int) -> np.ndarray:
        return self.operator.weights(q, p) * self.operator.row_mask(q)[:, None]

    def row_mask(self, q: int) -> np.ndarray:
        return self.operator.row_mask(q)

    def check_feasible(self, param: FullParameter):
        """Raise when a masked coordinate of `param` is nonzero."""
        theta_off = ~self.theta_mask(param.p)
        if np.any(param.theta[theta_off] != 0.0):
            first = int(np.flatnonzero(theta_off & (param.theta != 0.0))[0]) + 1
            raise InfeasibleParameterError(f"theta[{first}] is nonzero but truncated by the signal penalty")
        rows_off = ~self.row_mask(param.q)
        if np.any(param.a[rows_off] != 0.0):
            first = int(np.flatnonzero(rows_off & np.any(param.a != 0.0, axis=1))[0]) + 1
            raise InfeasibleParameterError(f"operator row {first} is nonzero but truncated by the operator penalty")

    def project(self, param: FullParameter) -> FullParameter:
        """Zero the masked coordinates."""
        theta = np.where(self.theta_mask(param.p), param.theta, 0.0)
        a = np.where(self.row_mask(param.q)[:, None], param.a, 0.0)
        return FullParameter(theta, param.z, a)

    def describe(self) -> dict:
        return {"signal": self.signal.describe(), "operator": self.operator.describe()}


def penalty_value(pen: PenaltyConfig, param: FullParameter) -> float:
    """½‖Gθ‖² + ½‖A‖²_K over the finite-penalty coordinates."""
    pen.check_feasible(param)
    signal = float(np.sum(pen.g2(param.p) * param.theta**2))
    operator = float(np.sum(pen.k2(param.q, param.p) * param.a**2))
    return 0.5 * (signal + operator)


@dataclass(frozen=True)
class TruncationReduction:
    """
    The (J, M) sub-problem of an observation together with the maps between the two problems.

    Attributes:
        observation (Observation): Reduced data (Z_M, Â_{J,M})
        j (int): Number of kept signal coordinates
        m (int): Number of kept image coordinates and operator rows
        p (int): Full signal dimension
        q (int): Full image dimension
    """

    observation: Observation
    j: int
    m: int
    p: int
    q: int

    def embed(self, param: FullParameter) -> FullParameter:
        """Zero-pad a reduced parameter back to (p, q)."""
        if (param.p, param.q) != (self.j, self.m):
            raise DimensionMismatchError(f"reduced parameter dims {(param.p, param.q)} != {(self.j, self.m)}")
        theta = np.zeros(self.p)
        theta[: self.j] = param.theta
        z = np.zeros(self.q)
        z[: self.m] = param.z
        a = np.zeros((self.q, self.p))
        a[: self.m, : self.j] = param.a
        return FullParameter(theta, z, a)

    def restrict(self, param: FullParameter) -> FullParameter:
        return FullParameter(param.theta[: self.j], param.z[: self.m], param.a[: self.m, : self.j])

    def restrict_theta(self, theta) -> np.ndarray:
        return np.asarray(theta, dtype=float)[: self.j]

    def embed_theta(self, theta) -> np.ndarray:
        full = np.zeros(self.p)
        full[: self.j] = theta
        return full


def reduce_truncation(obs: Observation, j: int, m: int) -> TruncationReduction:
    if not 1 <= j <= obs.p:
        raise InputValidationError(f"J={j} outside 1..{obs.p}")
    if not 1 <= m <= obs.q:
        raise InputValidationError(f"M={m} outside 1..{obs.q}")
    reduced = Observation(obs.z_obs[:m], obs.a_hat[:m, :j], obs.mu2)
    logger.debug("Reduced (p=%d, q=%d) to (J=%d, M=%d)", obs.p, obs.q, j, m)
    return TruncationReduction(observation=reduced, j=j, m=m, p=obs.p, q=obs.q)


def ridge_cutoff_index(eigs, kappa: float, g2: float) -> int:
    """J_g = max{j : N_j ≥ κ²g²}, or the number of positive N_j when g² = 0."""
    values = np.asarray(eigs, dtype=float)
    if values.ndim != 1:
        raise InputValidationError("eigenvalues must be a vector")
    if np.any(values < 0.0) or not np.all(np.isfinite(values)):
        raise InputValidationError("eigenvalues must be finite and nonnegative")
    if np.any(np.diff(values) > 0.0):
        raise InputValidationError("eigenvalues must be sorted in descending order")
    if g2 < 0.0:
        raise InputValidationError(f"g2 must be nonnegative, got {g2}")
    if g2 == 0.0:
        return int(np.count_nonzero(values > 0.0))
    return int(np.count_nonzero(values >= kappa**2 * g2))
