import numpy as np
import pytest
from conftest import random_parameter

from eiolib.infomatrix import InfoMatrix
from eiolib.model import gradient, numerical_hessian
from eiolib.parameter import FullParameter, Observation
from eiolib.penalty import PenaltyConfig, RidgePenalty, RowScalarPenalty


def consistent_point(rng, p, q):
    """A point with z = Aθ, where 𝔽 is positive definite when A has full column rank."""
    param = random_parameter(rng, p, q)
    return param.with_values(z=param.a @ param.theta)


def test_dense_blocks_match_numerical_hessian(rng):
    p, q, mu2 = 2, 3, 5.0
    pen = PenaltyConfig(RidgePenalty(0.5), RowScalarPenalty([1.0, 0.0, 2.0]))
    param = random_parameter(rng, p, q)
    obs = Observation(rng.standard_normal(q), rng.standard_normal((q, p)), mu2)

    def flat_gradient(x):
        return gradient(obs, FullParameter.from_flat(x, p, q), pen).flat()

    numeric = -numerical_hessian(flat_gradient, param.flat())
    np.testing.assert_allclose(InfoMatrix.from_parameter(param, mu2, pen).dense(), numeric, atol=1e-5)


def test_matvec_and_quadratic_match_dense(rng):
    param = random_parameter(rng, 3, 4)
    info = InfoMatrix.from_parameter(param, 7.0)
    u = random_parameter(rng, 3, 4)
    np.testing.assert_allclose(info.matvec(u).flat(), info.dense() @ u.flat(), rtol=1e-10, atol=1e-10)
    assert info.quadratic(u) == pytest.approx(u.flat() @ info.dense() @ u.flat(), rel=1e-10)


def test_blockwise_solve_matches_dense_solve(rng):
    param = consistent_point(rng, 3, 5)
    info = InfoMatrix.from_parameter(param, 4.0)
    rhs = random_parameter(rng, 3, 5)
    np.testing.assert_allclose(
        info.solve(rhs).flat(), np.linalg.solve(info.dense(), rhs.flat()), rtol=1e-9, atol=1e-10
    )


def test_schur_theta_matches_dense_complement(rng):
    p = 3
    param = consistent_point(rng, p, 4)
    info = InfoMatrix.from_parameter(param, 9.0, PenaltyConfig(RidgePenalty(0.3)))
    dense = info.dense()
    expected = dense[:p, :p] - dense[:p, p:] @ np.linalg.solve(dense[p:, p:], dense[p:, :p])
    np.testing.assert_allclose(info.schur_theta, expected, rtol=1e-9, atol=1e-10)


def test_masked_solve_uses_active_coordinates_only(rng):
    pen = PenaltyConfig.truncation(2, 3)
    param = pen.project(random_parameter(rng, 3, 4))
    param = param.with_values(z=param.a @ param.theta)
    info = InfoMatrix.from_parameter(param, 6.0, pen)
    rhs = random_parameter(rng, 3, 4)
    solved = info.solve(rhs).flat()
    active = info.active_indices()
    np.testing.assert_allclose(
        solved[active], np.linalg.solve(info.active_dense(), rhs.flat()[active]), rtol=1e-9, atol=1e-10
    )
    inactive = np.setdiff1d(np.arange(info.dim), active)
    np.testing.assert_array_equal(solved[inactive], 0.0)
    assert info.schur_theta.shape == (2, 2)


def test_trailing_axes_are_solved_column_by_column(rng):
    p, q = 2, 3
    info = InfoMatrix.from_parameter(consistent_point(rng, p, q), 3.0)
    rhs_theta = rng.standard_normal((p, 2))
    rhs_z = rng.standard_normal((q, 2))
    rhs_a = rng.standard_normal((q, p, 2))
    x_theta, x_z, x_a = info.solve_arrays(rhs_theta, rhs_z, rhs_a)
    for k in range(2):
        single = info.solve(FullParameter(rhs_theta[:, k], rhs_z[:, k], rhs_a[:, :, k]))
        np.testing.assert_allclose(x_theta[:, k], single.theta, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(x_z[:, k], single.z, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(x_a[:, :, k], single.a, rtol=1e-12, atol=1e-12)


def test_nuisance_metric_norm():
    info = InfoMatrix.from_parameter(FullParameter.zeros(1, 2), 4.0)
    assert info.nuisance_metric_norm([3.0, 0.0], [[1.0], [1.0]]) == pytest.approx(np.sqrt(9.0 + 8.0))
