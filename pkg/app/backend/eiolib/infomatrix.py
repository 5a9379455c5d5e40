"""
The full information matrix 𝔽(υ) = −∇²L(υ) over the coordinates (θ, z, A), kept in block form.

The A-block is block-diagonal over the operator rows and each image coordinate z_m only couples to
its own row A_m, so the nuisance η = (z, A) can be eliminated one row at a time: a p×p Cholesky
factorization per row and a scalar pivot per image coordinate. Masked (truncated) coordinates are
excluded from every solve and come back as zeros.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import DimensionMismatchError, SingularBlockError
from .parameter import FullParameter
from .penalty import PenaltyConfig
from .schur import DEFAULT_PIVOT_TOL, SpdFactor, frozen, symmetrize

Z_CURVATURE = 2.0


@dataclass(frozen=True)
class InfoMatrix:
    """
    Labeled blocks of 𝔽 (or 𝔽_G = 𝔽 + 𝒢² when `penalized`).

    Attributes:
        theta_theta (np.ndarray): F_θθ = AᵀA (+G²), p×p
        theta_z (np.ndarray): F_θz = −Aᵀ, p×q
        a_blocks (np.ndarray): F_{A_mA_m} = θθᵀ + μ²I (+K_m²), stacked q×p×p
        theta_a (np.ndarray): F_{θA_m} = (A_mᵀθ − z_m)I + A_mθᵀ, stacked q×p×p (rows θ, columns A_m)
        z_a (np.ndarray): the only nonzero row of F_{zA_m}, which is −θᵀ, stacked q×p
        theta_mask (np.ndarray): Active signal coordinates
        row_mask (np.ndarray): Active operator rows
        mu2 (float): Operator-noise precision
        penalized (bool): Whether 𝒢² has been added
        provenance (str): Where the blocks were evaluated ("truth", "population" or "point")
    """

    theta_theta: np.ndarray
    theta_z: np.ndarray
    a_blocks: np.ndarray
    theta_a: np.ndarray
    z_a: np.ndarray
    theta_mask: np.ndarray
    row_mask: np.ndarray
    mu2: float
    penalized: bool = False
    provenance: str = "point"
    pivot_tol: float = DEFAULT_PIVOT_TOL

    def __post_init__(self):
        p = np.shape(self.theta_theta)[0]
        q = np.shape(self.theta_z)[1]
        shapes = {
            "theta_z": ((p, q), np.shape(self.theta_z)),
            "a_blocks": ((q, p, p), np.shape(self.a_blocks)),
            "theta_a": ((q, p, p), np.shape(self.theta_a)),
            "z_a": ((q, p), np.shape(self.z_a)),
        }
        for label, (expected, actual) in shapes.items():
            if tuple(actual) != expected:
                raise DimensionMismatchError(f"{label} has shape {actual}, expected {expected}")
        object.__setattr__(self, "theta_theta", frozen(symmetrize(self.theta_theta, "theta_theta")))
        for name in ("theta_z", "a_blocks", "theta_a", "z_a"):
            object.__setattr__(self, name, frozen(getattr(self, name)))
        theta_mask = np.array(self.theta_mask, dtype=bool)
        row_mask = np.array(self.row_mask, dtype=bool)
        theta_mask.setflags(write=False)
        row_mask.setflags(write=False)
        object.__setattr__(self, "theta_mask", theta_mask)
        object.__setattr__(self, "row_mask", row_mask)

    @classmethod
    def from_parameter(
        cls,
        param: FullParameter,
        mu2: float,
        pen: Optional[PenaltyConfig] = None,
        provenance: str = "point",
        pivot_tol: float = DEFAULT_PIVOT_TOL,
    ) -> "InfoMatrix":
        pen = pen or PenaltyConfig.none()
        p, q = param.p, param.q
        theta, a = param.theta, param.a
        residual = a @ theta - param.z
        eye = np.eye(p)

        theta_theta = a.T @ a + np.diag(pen.g2(p))
        a_blocks = np.outer(theta, theta)[None, :, :] + mu2 * eye[None, :, :] + pen.k2(q, p)[:, :, None] * eye[None]
        theta_a = residual[:, None, None] * eye[None, :, :] + a[:, :, None] * theta[None, None, :]
        z_a = np.tile(-theta, (q, 1))
        return cls(
            theta_theta=theta_theta,
            theta_z=-a.T,
            a_blocks=a_blocks,
            theta_a=theta_a,
            z_a=z_a,
            theta_mask=pen.theta_mask(p),
            row_mask=pen.row_mask(q),
            mu2=float(mu2),
            penalized=not pen.is_zero(),
            provenance=provenance,
            pivot_tol=pivot_tol,
        )

    @property
    def p(self) -> int:
        return self.theta_theta.shape[0]

    @property
    def q(self) -> int:
        return self.theta_z.shape[1]

    @property
    def dim(self) -> int:
        return self.p + self.q + self.p * self.q

    @property
    def theta_active(self) -> np.ndarray:
        return np.flatnonzero(self.theta_mask)

    def active_indices(self) -> np.ndarray:
        """Positions of the active coordinates in the canonical flat ordering (θ, z, A row-major)."""
        p, q = self.p, self.q
        rows = np.flatnonzero(self.row_mask)
        a_index = (p + q + rows[:, None] * p + np.arange(p)[None, :]).ravel()
        return np.concatenate([self.theta_active, p + np.arange(q), a_index])

    def dense(self) -> np.ndarray:
        p, q = self.p, self.q
        f = np.zeros((self.dim, self.dim))
        f[:p, :p] = self.theta_theta
        f[:p, p : p + q] = self.theta_z
        f[p : p + q, :p] = self.theta_z.T
        f[p : p + q, p : p + q] = Z_CURVATURE * np.eye(q)
        for m in range(q):
            s = p + q + m * p
            f[s : s + p, s : s + p] = self.a_blocks[m]
            f[:p, s : s + p] = self.theta_a[m]
            f[s : s + p, :p] = self.theta_a[m].T
            f[p + m, s : s + p] = self.z_a[m]
            f[s : s + p, p + m] = self.z_a[m]
        return f

    def active_dense(self) -> np.ndarray:
        index = self.active_indices()
        return self.dense()[np.ix_(index, index)]

    def matvec(self, u: FullParameter) -> FullParameter:
        """𝔽u over all coordinates, masks ignored."""
        theta = self.theta_theta @ u.theta + self.theta_z @ u.z + np.einsum("mij,mj->i", self.theta_a, u.a)
        z = self.theta_z.T @ u.theta + Z_CURVATURE * u.z + np.einsum("mj,mj->m", self.z_a, u.a)
        a = (
            np.einsum("mji,j->mi", self.theta_a, u.theta)
            + self.z_a * u.z[:, None]
            + np.einsum("mij,mj->mi", self.a_blocks, u.a)
        )
        return FullParameter(theta, z, a)

    def quadratic(self, u: FullParameter) -> float:
        return float(u.flat() @ self.matvec(u).flat())

    @cached_property
    def _row_elimination(self):
        factors = {}
        binv_c = np.zeros((self.q, self.p))
        pivots = np.full(self.q, Z_CURVATURE)
        for m in np.flatnonzero(self.row_mask):
            factors[m] = SpdFactor(self.a_blocks[m], f"a_row[{m + 1}]", self.pivot_tol)
            binv_c[m] = factors[m].solve(self.z_a[m])
            pivots[m] = Z_CURVATURE - self.z_a[m] @ binv_c[m]
            if pivots[m] <= self.pivot_tol * Z_CURVATURE:
                raise SingularBlockError(f"z[{m + 1}]", f"pivot {pivots[m]:.3g} after eliminating the operator row")
        return factors, binv_c, pivots

    def nuisance_solve(self, rhs_z, rhs_a) -> tuple[np.ndarray, np.ndarray]:
        """
        Solve 𝔽_ηη (x_z, x_A) = (rhs_z, rhs_A). Trailing axes of the right-hand sides are solved
        column by column; masked operator rows come back as zeros.
        """
        rz = np.asarray(rhs_z, dtype=float)
        ra = np.asarray(rhs_a, dtype=float)
        single = rz.ndim == 1
        if single:
            rz = rz[:, None]
            ra = ra[:, :, None]
        factors, binv_c, pivots = self._row_elimination
        x_z = rz / Z_CURVATURE
        x_a = np.zeros_like(ra)
        for m, factor in factors.items():
            binv_r = factor.solve(ra[m])
            x_z[m] = (rz[m] - self.z_a[m] @ binv_r) / pivots[m]
            x_a[m] = binv_r - np.outer(binv_c[m], x_z[m])
        if single:
            return x_z[:, 0], x_a[:, :, 0]
        return x_z, x_a

    def theta_eta(self, x_z, x_a) -> np.ndarray:
        """𝔽_θη x_η; trailing axes carried through."""
        x_a = np.where(self.row_mask.reshape((-1,) + (1,) * (np.ndim(x_a) - 1)), x_a, 0.0)
        return self.theta_z @ x_z + np.einsum("mij,mj...->i...", self.theta_a, x_a)

    def eta_theta(self, x_theta) -> tuple[np.ndarray, np.ndarray]:
        """𝔽_ηθ x_θ as (z-part, A-part); trailing axes carried through."""
        x_theta = np.asarray(x_theta, dtype=float)
        z = self.theta_z.T @ x_theta
        a = np.einsum("mji,j...->mi...", self.theta_a, x_theta)
        return z, a

    @cached_property
    def schur_theta(self) -> np.ndarray:
        """Φ_θθ = 𝔽_θθ − 𝔽_θη𝔽_ηη⁻¹𝔽_ηθ on the active signal coordinates."""
        active = self.theta_active
        columns = np.eye(self.p)[:, active]
        cz, ca = self.eta_theta(columns)
        yz, ya = self.nuisance_solve(cz, ca)
        correction = self.theta_eta(yz, ya)[active]
        return frozen(symmetrize(self.theta_theta[np.ix_(active, active)] - correction, "schur_theta"))

    @cached_property
    def _schur_factor(self) -> SpdFactor:
        return SpdFactor(self.schur_theta, "schur_theta", self.pivot_tol)

    def solve_schur(self, rhs_theta) -> np.ndarray:
        """Φ_θθ⁻¹ applied on the active signal coordinates, zero elsewhere."""
        rhs = np.asarray(rhs_theta, dtype=float)
        result = np.zeros_like(rhs)
        result[self.theta_active] = self._schur_factor.solve(rhs[self.theta_active])
        return result

    def solve(self, rhs: FullParameter) -> FullParameter:
        """𝔽⁻¹ rhs over the active coordinates by eliminating the nuisance first."""
        if (rhs.p, rhs.q) != (self.p, self.q):
            raise DimensionMismatchError(f"right-hand side dims {(rhs.p, rhs.q)} != {(self.p, self.q)}")
        return FullParameter(*self.solve_arrays(rhs.theta, rhs.z, rhs.a))

    def solve_arrays(self, rhs_theta, rhs_z, rhs_a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Same as `solve` on raw blocks; trailing axes of the right-hand sides are solved column by column."""
        rhs_theta = np.asarray(rhs_theta, dtype=float)
        rhs_z = np.asarray(rhs_z, dtype=float)
        rhs_a = np.asarray(rhs_a, dtype=float)
        rhs_a = np.where(self.row_mask.reshape((-1,) + (1,) * (rhs_a.ndim - 1)), rhs_a, 0.0)
        yz, ya = self.nuisance_solve(rhs_z, rhs_a)
        x_theta = self.solve_schur(rhs_theta - self.theta_eta(yz, ya))
        cz, ca = self.eta_theta(x_theta)
        x_z, x_a = self.nuisance_solve(rhs_z - cz, rhs_a - ca)
        return x_theta, x_z, x_a

    def nuisance_metric_norm(self, x_z, x_a) -> float:
        """‖𝒟_ηη x_η‖ with 𝒟_ηη² = block{I_q, μ²I_A}."""
        return float(np.sqrt(np.sum(np.asarray(x_z) ** 2) + self.mu2 * np.sum(np.asarray(x_a) ** 2)))

    def describe(self) -> dict:
        return {"p": self.p, "q": self.q, "mu2": self.mu2, "penalized": self.penalized, "provenance": self.provenance}
