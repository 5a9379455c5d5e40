"""
Basis dictionaries on an interval, design densities and Gauss-Legendre expectations.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import legendre
from scipy import stats

from .errors import InputValidationError

logger = logging.getLogger("eio")

DEFAULT_QUADRATURE_NODES = 256
QUADRATURE_RTOL = 1e-8


def map_to_unit(x, lo: float, hi: float) -> np.ndarray:
    """Linearly map x ∈ [lo, hi] to ξ ∈ [−1, 1]."""
    return 2.0 * (np.asarray(x, dtype=float) - lo) / (hi - lo) - 1.0


def map_from_unit(xi, lo: float, hi: float) -> np.ndarray:
    return 0.5 * (np.asarray(xi, dtype=float) + 1.0) * (hi - lo) + lo


class BasisDictionary(ABC):
    """A finite family of functions evaluated column-wise: `evaluate(x)` has shape (len(x), size)."""

    size: int

    @abstractmethod
    def evaluate(self, x) -> np.ndarray:
        pass

    @abstractmethod
    def describe(self) -> dict:
        pass


@dataclass(frozen=True)
class LegendreBasis(BasisDictionary):
    """Legendre polynomials orthonormal in L²[lo, hi]."""

    size: int
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if self.size < 1:
            raise InputValidationError(f"basis size must be at least 1, got {self.size}")
        if not self.hi > self.lo:
            raise InputValidationError(f"basis interval [{self.lo}, {self.hi}] is empty")

    def evaluate(self, x) -> np.ndarray:
        xi = map_to_unit(np.atleast_1d(x), self.lo, self.hi)
        columns = [legendre.legval(xi, [0.0] * k + [1.0]) for k in range(self.size)]
        scale = np.sqrt((2.0 * np.arange(self.size) + 1.0) / (self.hi - self.lo))
        return np.stack(columns, axis=-1) * scale

    def describe(self) -> dict:
        return {"kind": "legendre", "size": self.size, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class CosineBasis(BasisDictionary):
    """1, √2 cos(πkx), orthonormal in L²[0, 1]."""

    size: int

    def __post_init__(self):
        if self.size < 1:
            raise InputValidationError(f"basis size must be at least 1, got {self.size}")

    def evaluate(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k = np.arange(self.size)
        values = np.sqrt(2.0) * np.cos(np.pi * x[:, None] * k[None, :])
        values[:, 0] = 1.0
        return values

    def describe(self) -> dict:
        return {"kind": "cosine", "size": self.size}


def make_basis(kind: str, size: int) -> BasisDictionary:
    if kind == "legendre":
        return LegendreBasis(size)
    if kind == "cosine":
        return CosineBasis(size)
    raise InputValidationError(f"unknown basis {kind!r}; expected 'legendre' or 'cosine'")


@dataclass(frozen=True)
class DesignDensity:
    """A design distribution on [0, 1]: uniform or Beta(a, b)."""

    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.a <= 0.0 or self.b <= 0.0:
            raise InputValidationError(f"design shape parameters must be positive, got a={self.a}, b={self.b}")

    @property
    def bounded(self) -> bool:
        return self.a >= 1.0 and self.b >= 1.0

    @property
    def distribution(self):
        return stats.beta(self.a, self.b)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.beta(self.a, self.b, size=n)

    def pdf(self, x) -> np.ndarray:
        return self.distribution.pdf(x)

    def describe(self) -> dict:
        return {"a": self.a, "b": self.b}


def gauss_legendre(nodes: int, lo: float = 0.0, hi: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    xi, weights = legendre.leggauss(nodes)
    return map_from_unit(xi, lo, hi), 0.5 * (hi - lo) * weights


@dataclass(frozen=True)
class QuadratureResult:
    value: np.ndarray
    error_estimate: float
    nodes: int

    def to_dict(self) -> dict:
        return {"error_estimate": self.error_estimate, "nodes": self.nodes}


def _tensor_expectation(integrand: Callable, dims: int, nodes: int) -> np.ndarray:
    x, w = gauss_legendre(nodes)
    grids = np.meshgrid(*([x] * dims), indexing="ij")
    weights = np.ones_like(grids[0])
    for axis_weights in np.meshgrid(*([w] * dims), indexing="ij"):
        weights = weights * axis_weights
    points = [g.ravel() for g in grids]
    values = integrand(*points)
    return np.tensordot(weights.ravel(), values, axes=(0, 0))


def expectation(integrand: Callable, dims: int = 1, nodes: int = DEFAULT_QUADRATURE_NODES) -> QuadratureResult:
    """
    ∫_{[0,1]^dims} integrand; the integrand maps `dims` flat node arrays to an array whose first axis
    runs over the nodes. The error estimate compares against half the nodes.
    """
    if nodes < 2:
        raise InputValidationError(f"quadrature needs at least 2 nodes, got {nodes}")
    value = _tensor_expectation(integrand, dims, nodes)
    coarse = _tensor_expectation(integrand, dims, max(nodes // 2, 1))
    if not np.all(np.isfinite(value)):
        raise InputValidationError("quadrature produced non-finite values; is the design density bounded?")
    error = float(np.max(np.abs(value - coarse))) if np.size(value) else 0.0
    if error > QUADRATURE_RTOL * (1.0 + float(np.max(np.abs(value)))):
        logger.warning("Quadrature self-check: %d vs %d nodes differ by %.3g", nodes, nodes // 2, error)
    return QuadratureResult(value=value, error_estimate=error, nodes=nodes)
