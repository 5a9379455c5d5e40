"""
Block-symmetric matrix algebra: Schur complements, block inversion by Gauss elimination and
positive-definiteness certificates for two- and three-block matrices.
"""

import logging
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from scipy import linalg

from .errors import DimensionMismatchError, InputValidationError, SingularBlockError

logger = logging.getLogger("eio")

DEFAULT_PIVOT_TOL = 1e-12
ASYMMETRY_WARN_TOL = 1e-8
DEFAULT_CERTIFICATE_TOL = 1e-10
DEFAULT_KAPPA = 2.0

SchurSide = Literal["first", "second"]


def frozen(array) -> np.ndarray:
    result = np.array(array, dtype=float)
    result.setflags(write=False)
    return result


def symmetrize(matrix, label: str = "matrix") -> np.ndarray:
    """Return (M + Mᵀ)/2, warning when M is visibly asymmetric."""
    m = np.array(matrix, dtype=float)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"{label} must be a square matrix, got shape {m.shape}")
    if m.size == 0:
        return m
    if not np.all(np.isfinite(m)):
        raise InputValidationError(f"{label} has non-finite entries")
    asymmetry = float(np.max(np.abs(m - m.T)))
    if asymmetry > ASYMMETRY_WARN_TOL * max(1.0, float(np.max(np.abs(m)))):
        logger.warning("Symmetrizing %s with asymmetry %.3g", label, asymmetry)
    return 0.5 * (m + m.T)


class SpdFactor:
    """
    Cholesky factorization of a symmetric positive definite block.

    A pivot below `pivot_tol` times the largest diagonal entry counts as singular: the block is
    reported, never regularized.
    """

    def __init__(self, matrix: np.ndarray, label: str, pivot_tol: float = DEFAULT_PIVOT_TOL):
        self.label = label
        self.dim = matrix.shape[0]
        self._factor = None
        if self.dim == 0:
            return
        if not np.all(np.isfinite(matrix)):
            raise SingularBlockError(label, "non-finite entries")
        try:
            self._factor = linalg.cho_factor(matrix, lower=True, check_finite=False)
        except linalg.LinAlgError as exc:
            raise SingularBlockError(label, str(exc)) from exc
        pivots = np.diag(self._factor[0]) ** 2
        scale = float(np.max(np.abs(np.diag(matrix))))
        if scale <= 0.0 or float(pivots.min()) <= pivot_tol * scale:
            raise SingularBlockError(label, f"pivot {float(pivots.min()):.3g} below relative tolerance {pivot_tol:g}")

    def solve(self, rhs) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if self._factor is None:
            return np.zeros_like(rhs)
        return linalg.cho_solve(self._factor, rhs, check_finite=False)

    def inverse(self) -> np.ndarray:
        return self.solve(np.eye(self.dim))


def spd_solve(matrix: np.ndarray, rhs, label: str, pivot_tol: float = DEFAULT_PIVOT_TOL) -> np.ndarray:
    return SpdFactor(matrix, label, pivot_tol).solve(rhs)


def sym_sqrt(matrix: np.ndarray) -> np.ndarray:
    w, v = linalg.eigh(symmetrize(matrix))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def sym_inv_sqrt(matrix: np.ndarray, label: str = "matrix") -> np.ndarray:
    w, v = linalg.eigh(symmetrize(matrix, label))
    if w.size and w[0] <= 0.0:
        raise SingularBlockError(label, f"smallest eigenvalue {w[0]:.3g}")
    return (v / np.sqrt(w)) @ v.T


def op_norm(matrix) -> float:
    """Spectral norm: symmetric eigensolve when M is symmetric, largest singular value otherwise."""
    m = np.asarray(matrix, dtype=float)
    if m.size == 0:
        return 0.0
    if m.ndim == 2 and m.shape[0] == m.shape[1] and np.allclose(m, m.T, rtol=0.0, atol=1e-14):
        return float(np.max(np.abs(linalg.eigvalsh(m))))
    return float(linalg.norm(m, 2))


def min_eig(matrix) -> float:
    m = symmetrize(matrix)
    if m.size == 0:
        return float("inf")
    return float(linalg.eigvalsh(m)[0])


def _block(matrix, label: str) -> np.ndarray:
    return symmetrize(matrix, label)


def _cross(matrix, rows: int, cols: int, label: str) -> np.ndarray:
    m = np.array(matrix, dtype=float)
    if m.ndim < 2:
        m = m.reshape(rows, cols)
    if m.shape != (rows, cols):
        raise DimensionMismatchError(f"{label} has shape {m.shape}, expected {(rows, cols)}")
    return m


@dataclass(frozen=True)
class BlockSymMatrix2:
    """
    Symmetric matrix F = [[F_aa, F_ab], [F_ba, F_bb]] stored by its three distinct blocks.

    Attributes:
        f_aa (np.ndarray): Leading diagonal block (p×p)
        f_ab (np.ndarray): Cross block (p×q); F_ba is its transpose
        f_bb (np.ndarray): Trailing diagonal block (q×q)
    """

    f_aa: np.ndarray
    f_ab: np.ndarray
    f_bb: np.ndarray

    def __post_init__(self):
        f_aa = _block(self.f_aa, "f_aa")
        f_bb = _block(self.f_bb, "f_bb")
        f_ab = _cross(self.f_ab, f_aa.shape[0], f_bb.shape[0], "f_ab")
        object.__setattr__(self, "f_aa", frozen(f_aa))
        object.__setattr__(self, "f_bb", frozen(f_bb))
        object.__setattr__(self, "f_ab", frozen(f_ab))

    @classmethod
    def from_dense(cls, matrix, split: int) -> "BlockSymMatrix2":
        m = symmetrize(matrix, "F")
        if not 0 < split < m.shape[0]:
            raise InputValidationError(f"split {split} outside 1..{m.shape[0] - 1}")
        return cls(m[:split, :split], m[:split, split:], m[split:, split:])

    @property
    def dim_a(self) -> int:
        return self.f_aa.shape[0]

    @property
    def dim_b(self) -> int:
        return self.f_bb.shape[0]

    @property
    def f_ba(self) -> np.ndarray:
        return self.f_ab.T

    def dense(self) -> np.ndarray:
        return np.block([[self.f_aa, self.f_ab], [self.f_ba, self.f_bb]])

    def block_diagonal(self) -> np.ndarray:
        return linalg.block_diag(self.f_aa, self.f_bb)


@dataclass(frozen=True)
class BlockSymMatrix3:
    """Symmetric three-block matrix with diagonal blocks (x, y, t) and the upper cross blocks."""

    f_xx: np.ndarray
    f_yy: np.ndarray
    f_tt: np.ndarray
    f_xy: np.ndarray
    f_xt: np.ndarray
    f_yt: np.ndarray

    def __post_init__(self):
        f_xx = _block(self.f_xx, "f_xx")
        f_yy = _block(self.f_yy, "f_yy")
        f_tt = _block(self.f_tt, "f_tt")
        nx, ny, nt = f_xx.shape[0], f_yy.shape[0], f_tt.shape[0]
        for name, value in (("f_xx", f_xx), ("f_yy", f_yy), ("f_tt", f_tt)):
            object.__setattr__(self, name, frozen(value))
        object.__setattr__(self, "f_xy", frozen(_cross(self.f_xy, nx, ny, "f_xy")))
        object.__setattr__(self, "f_xt", frozen(_cross(self.f_xt, nx, nt, "f_xt")))
        object.__setattr__(self, "f_yt", frozen(_cross(self.f_yt, ny, nt, "f_yt")))

    def diagonal_blocks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.f_xx, self.f_yy, self.f_tt

    def dense(self) -> np.ndarray:
        return np.block(
            [
                [self.f_xx, self.f_xy, self.f_xt],
                [self.f_xy.T, self.f_yy, self.f_yt],
                [self.f_xt.T, self.f_yt.T, self.f_tt],
            ]
        )


def schur_complement(f: BlockSymMatrix2, which: SchurSide = "first", pivot_tol: float = DEFAULT_PIVOT_TOL) -> np.ndarray:
    """
    Φ_aa = F_aa − F_ab F_bb⁻¹ F_ba for which="first", Φ_bb = F_bb − F_ba F_aa⁻¹ F_ab for "second".
    """
    if which == "first":
        correction = f.f_ab @ SpdFactor(f.f_bb, "f_bb", pivot_tol).solve(f.f_ba)
        return frozen(symmetrize(f.f_aa - correction, "schur_aa"))
    if which == "second":
        correction = f.f_ba @ SpdFactor(f.f_aa, "f_aa", pivot_tol).solve(f.f_ab)
        return frozen(symmetrize(f.f_bb - correction, "schur_bb"))
    raise InputValidationError(f"which must be 'first' or 'second', got {which!r}")


def block_invert(f: BlockSymMatrix2, pivot_tol: float = DEFAULT_PIVOT_TOL) -> BlockSymMatrix2:
    """F⁻¹ from the factorization [I 0; −F_bb⁻¹F_ba I]·diag(Φ_aa⁻¹, F_bb⁻¹)·[I −F_abF_bb⁻¹; 0 I]."""
    fac_bb = SpdFactor(f.f_bb, "f_bb", pivot_tol)
    fbb_inv_fba = fac_bb.solve(f.f_ba)
    phi_aa = symmetrize(f.f_aa - f.f_ab @ fbb_inv_fba, "schur_aa")
    inv_aa = SpdFactor(phi_aa, "schur_aa", pivot_tol).inverse()
    inv_ab = -inv_aa @ fbb_inv_fba.T
    inv_bb = fac_bb.inverse() + fbb_inv_fba @ inv_aa @ fbb_inv_fba.T
    return BlockSymMatrix2(inv_aa, inv_ab, inv_bb)


def solve_first(f: BlockSymMatrix2, rhs_a, rhs_b, pivot_tol: float = DEFAULT_PIVOT_TOL) -> np.ndarray:
    """(F⁻¹w)_a = Φ_aa⁻¹(w_a − F_ab F_bb⁻¹ w_b), without forming F⁻¹."""
    reduced = np.asarray(rhs_a, dtype=float) - f.f_ab @ SpdFactor(f.f_bb, "f_bb", pivot_tol).solve(rhs_b)
    return SpdFactor(schur_complement(f, "first", pivot_tol), "schur_aa", pivot_tol).solve(reduced)


def _relative_residual(lhs: np.ndarray, rhs: np.ndarray) -> float:
    if lhs.size == 0:
        return 0.0
    return float(np.max(np.abs(lhs - rhs)) / max(1.0, float(np.max(np.abs(rhs)))))


@dataclass(frozen=True)
class SchurIdentityReport:
    first_inverse_residual: float
    second_inverse_residual: float
    cross_residual: float
    tol: float

    @property
    def max_residual(self) -> float:
        return max(self.first_inverse_residual, self.second_inverse_residual, self.cross_residual)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol

    def to_dict(self) -> dict:
        return {
            "first_inverse_residual": self.first_inverse_residual,
            "second_inverse_residual": self.second_inverse_residual,
            "cross_residual": self.cross_residual,
            "tol": self.tol,
            "passed": self.passed,
        }


def verify_schur_identities(
    f: BlockSymMatrix2, tol: float = DEFAULT_CERTIFICATE_TOL, pivot_tol: float = DEFAULT_PIVOT_TOL
) -> SchurIdentityReport:
    """
    Residuals of F_aa⁻¹ + F_aa⁻¹F_abΦ_bb⁻¹F_baF_aa⁻¹ ≡ Φ_aa⁻¹, its mirror for Φ_bb⁻¹, and
    Φ_aa⁻¹F_abF_bb⁻¹ ≡ F_aa⁻¹F_abΦ_bb⁻¹.
    """
    inv_faa = SpdFactor(f.f_aa, "f_aa", pivot_tol).inverse()
    inv_fbb = SpdFactor(f.f_bb, "f_bb", pivot_tol).inverse()
    inv_phi_aa = SpdFactor(schur_complement(f, "first", pivot_tol), "schur_aa", pivot_tol).inverse()
    inv_phi_bb = SpdFactor(schur_complement(f, "second", pivot_tol), "schur_bb", pivot_tol).inverse()

    first = inv_faa + inv_faa @ f.f_ab @ inv_phi_bb @ f.f_ba @ inv_faa
    second = inv_fbb + inv_fbb @ f.f_ba @ inv_phi_aa @ f.f_ab @ inv_fbb
    cross_lhs = inv_phi_aa @ f.f_ab @ inv_fbb
    cross_rhs = inv_faa @ f.f_ab @ inv_phi_bb
    return SchurIdentityReport(
        first_inverse_residual=_relative_residual(first, inv_phi_aa),
        second_inverse_residual=_relative_residual(second, inv_phi_bb),
        cross_residual=_relative_residual(cross_lhs, cross_rhs),
        tol=tol,
    )


@dataclass(frozen=True)
class NormDecomposition:
    """Both sides of the quadratic-form splittings of ‖F^{1/2}w‖² and ‖F^{-1/2}w‖²."""

    direct: float
    direct_split: float
    inverse: float
    inverse_split: float

    def residual(self) -> float:
        return max(
            abs(self.direct - self.direct_split) / max(1.0, abs(self.direct)),
            abs(self.inverse - self.inverse_split) / max(1.0, abs(self.inverse)),
        )


def norm_decomposition(f: BlockSymMatrix2, w_a, w_b, pivot_tol: float = DEFAULT_PIVOT_TOL) -> NormDecomposition:
    """
    ‖F^{1/2}w‖² = ‖Φ_aa^{1/2}a‖² + ‖F_bb^{1/2}(b + F_bb⁻¹F_ba a)‖² and
    ‖F^{-1/2}w‖² = ‖Φ_aa^{-1/2}(a − F_abF_bb⁻¹b)‖² + ‖F_bb^{-1/2}b‖².
    """
    a = np.asarray(w_a, dtype=float)
    b = np.asarray(w_b, dtype=float)
    w = np.concatenate([a, b])
    dense = f.dense()
    fac_bb = SpdFactor(f.f_bb, "f_bb", pivot_tol)
    phi_aa = schur_complement(f, "first", pivot_tol)

    shifted = b + fac_bb.solve(f.f_ba @ a)
    direct_split = float(a @ phi_aa @ a + shifted @ f.f_bb @ shifted)

    reduced = a - f.f_ab @ fac_bb.solve(b)
    inverse_split = float(reduced @ SpdFactor(phi_aa, "schur_aa", pivot_tol).solve(reduced) + b @ fac_bb.solve(b))
    inverse = float(w @ SpdFactor(symmetrize(dense, "F"), "F", pivot_tol).solve(w))
    return NormDecomposition(
        direct=float(w @ dense @ w), direct_split=direct_split, inverse=inverse, inverse_split=inverse_split
    )


@dataclass(frozen=True)
class SandwichReport:
    """
    Coupling ρ between the diagonal blocks and the eigenvalue margins of the sandwich bounds.

    Attributes:
        rho (float): ρ = ‖F_aa^{-1/2}F_abF_bb⁻¹F_baF_aa^{-1/2}‖^{1/2}
        applicable (bool): ρ < 1; the bounds are only claimed in that case
        margins (dict): min eigenvalues of F − (1−ρ)F₀, (1+ρ)F₀ − F, Φ_aa − (1−ρ²)F_aa, F_aa − Φ_aa
    """

    rho: float
    applicable: bool
    margins: dict
    tol: float

    @property
    def rho_squared(self) -> float:
        return self.rho**2

    @property
    def passed(self) -> bool:
        return self.applicable and all(value >= -self.tol for value in self.margins.values())

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "applicable": self.applicable,
            "margins": dict(self.margins),
            "passed": self.passed,
        }


def sandwich_bounds(
    f: BlockSymMatrix2, tol: float = DEFAULT_CERTIFICATE_TOL, pivot_tol: float = DEFAULT_PIVOT_TOL
) -> SandwichReport:
    inv_sqrt_aa = sym_inv_sqrt(f.f_aa, "f_aa")
    coupling = inv_sqrt_aa @ f.f_ab @ SpdFactor(f.f_bb, "f_bb", pivot_tol).solve(f.f_ba) @ inv_sqrt_aa
    rho = float(np.sqrt(max(op_norm(symmetrize(coupling, "coupling")), 0.0)))
    applicable = rho < 1.0
    if not applicable:
        logger.info("Sandwich bounds inapplicable: rho = %.4g", rho)

    dense = f.dense()
    f0 = f.block_diagonal()
    phi_aa = schur_complement(f, "first", pivot_tol)
    scale = max(1.0, op_norm(dense))
    margins = {
        "full_lower": min_eig(dense - (1.0 - rho) * f0) / scale,
        "full_upper": min_eig((1.0 + rho) * f0 - dense) / scale,
        "schur_lower": min_eig(phi_aa - (1.0 - rho**2) * f.f_aa) / scale,
        "schur_upper": min_eig(f.f_aa - phi_aa) / scale,
    }
    return SandwichReport(rho=rho, applicable=applicable, margins=margins, tol=tol)


@dataclass(frozen=True)
class ThreeBlockCertificate:
    """
    Result of a three-block lower bound check.

    Attributes:
        mode (str): "correlation" or "scaled"
        rho (dict): Pairwise couplings keyed "xy", "xt", "yt"
        pair_sums (dict): Sums of the two couplings touching each diagonal block
        applicable (bool): Whether the premise holds; no PSD claim is made otherwise
        min_margin (float): min eig(F − lower bound), scaled by max(1, ‖F‖)
        alpha (Optional[dict]): Scaled-mode cross norms
        beta (Optional[dict]): Scaled-mode diagonal constants
        reason (str): Why the premise failed, empty when applicable
    """

    mode: str
    rho: dict
    pair_sums: dict
    applicable: bool
    min_margin: float
    lower_bound: np.ndarray
    tol: float
    alpha: Optional[dict] = None
    beta: Optional[dict] = None
    reason: str = ""

    @property
    def certified(self) -> bool:
        return self.applicable and self.min_margin >= -self.tol

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "rho": dict(self.rho),
            "pair_sums": dict(self.pair_sums),
            "alpha": self.alpha,
            "beta": self.beta,
            "applicable": self.applicable,
            "certified": self.certified,
            "min_margin": self.min_margin,
            "reason": self.reason,
        }


def _pair_sums(rho: dict) -> dict:
    return {"x": rho["xy"] + rho["xt"], "y": rho["xy"] + rho["yt"], "t": rho["xt"] + rho["yt"]}


def _scaled(left: np.ndarray, middle: np.ndarray, right: np.ndarray, pivot_tol: float) -> np.ndarray:
    # left⁻¹ · middle · right⁻¹ for symmetric positive definite scales
    return SpdFactor(left, "scale", pivot_tol).solve(SpdFactor(right, "scale", pivot_tol).solve(middle.T).T)


def three_block_lower_bound(
    f: BlockSymMatrix3,
    mode: Literal["correlation", "scaled"] = "correlation",
    scale: Optional[tuple] = None,
    kappa: float = DEFAULT_KAPPA,
    tol: float = DEFAULT_CERTIFICATE_TOL,
    pivot_tol: float = DEFAULT_PIVOT_TOL,
) -> ThreeBlockCertificate:
    """
    Certify F ⪰ block-diag((1−ρ_xy−ρ_xt)F_xx, (1−ρ_xy−ρ_yt)F_yy, (1−ρ_xt−ρ_yt)F_tt) in correlation
    mode, or F ⪰ κ⁻²·block-diag(𝔻_x², 𝔻_y², 𝔻_t²) in scaled mode with 𝔻 = `scale`.
    """
    dense = f.dense()
    norm_scale = max(1.0, op_norm(dense))
    cross = {"xy": f.f_xy, "xt": f.f_xt, "yt": f.f_yt}
    pairs = {"xy": (0, 1), "xt": (0, 2), "yt": (1, 2)}
    diagonal = f.diagonal_blocks()

    if mode == "correlation":
        inv_sqrt = [sym_inv_sqrt(block, label) for block, label in zip(diagonal, ("f_xx", "f_yy", "f_tt"))]
        rho = {key: op_norm(inv_sqrt[i] @ cross[key] @ inv_sqrt[j]) for key, (i, j) in pairs.items()}
        sums = _pair_sums(rho)
        factors = (1.0 - sums["x"], 1.0 - sums["y"], 1.0 - sums["t"])
        lower = linalg.block_diag(*(c * block for c, block in zip(factors, diagonal)))
        applicable = max(sums.values()) <= 1.0
        reason = "" if applicable else f"coupling sum {max(sums.values()):.4g} exceeds 1"
        return ThreeBlockCertificate(
            mode=mode,
            rho=rho,
            pair_sums=sums,
            applicable=applicable,
            min_margin=min_eig(dense - lower) / norm_scale,
            lower_bound=lower,
            tol=tol,
            reason=reason,
        )

    if mode != "scaled":
        raise InputValidationError(f"mode must be 'correlation' or 'scaled', got {mode!r}")
    if scale is None or len(scale) != 3:
        raise InputValidationError("scaled mode needs the three diagonal scale blocks")
    scales = [symmetrize(d, "scale") for d in scale]
    for d, block in zip(scales, diagonal):
        if d.shape != block.shape:
            raise DimensionMismatchError(f"scale block shape {d.shape} does not match {block.shape}")

    alpha = {key: op_norm(_scaled(scales[i], cross[key], scales[j], pivot_tol)) for key, (i, j) in pairs.items()}
    beta_sq = [min_eig(_scaled(d, block, d, pivot_tol)) for d, block in zip(scales, diagonal)]
    beta = {name: float(np.sqrt(max(value, 0.0))) for name, value in zip("xyt", beta_sq)}
    lower = kappa**-2 * linalg.block_diag(*(d @ d for d in scales))
    margin = min_eig(dense - lower) / norm_scale

    if min(beta.values()) <= 0.0:
        return ThreeBlockCertificate(
            mode=mode,
            rho={key: float("inf") for key in pairs},
            pair_sums={name: float("inf") for name in "xyt"},
            applicable=False,
            min_margin=margin,
            lower_bound=lower,
            tol=tol,
            alpha=alpha,
            beta=beta,
            reason="a scaled diagonal block is not positive definite",
        )

    rho = {key: alpha[key] / (beta[key[0]] * beta[key[1]]) for key in pairs}
    sums = _pair_sums(rho)
    slack = {name: (1.0 - sums[name]) * beta[name] ** 2 - kappa**-2 for name in "xyt"}
    reason = ""
    if max(sums.values()) > 1.0:
        reason = f"coupling sum {max(sums.values()):.4g} exceeds 1"
    elif min(slack.values()) < 0.0:
        reason = f"diagonal dominance short by {-min(slack.values()):.4g}"
    return ThreeBlockCertificate(
        mode=mode,
        rho=rho,
        pair_sums=sums,
        applicable=not reason,
        min_margin=margin,
        lower_bound=lower,
        tol=tol,
        alpha=alpha,
        beta=beta,
        reason=reason,
    )
