import numpy as np
import pytest
from conftest import random_spd

from eiolib.errors import DimensionMismatchError, SingularBlockError
from eiolib.schur import (
    BlockSymMatrix2,
    BlockSymMatrix3,
    SpdFactor,
    block_invert,
    norm_decomposition,
    sandwich_bounds,
    schur_complement,
    solve_first,
    sym_sqrt,
    symmetrize,
    three_block_lower_bound,
    verify_schur_identities,
)


@pytest.mark.parametrize("size,split", [(2, 1), (7, 3), (20, 12), (50, 25)])
def test_schur_identities_hold(rng, size, split):
    f = BlockSymMatrix2.from_dense(random_spd(rng, size), split)
    report = verify_schur_identities(f)
    assert report.passed, report.to_dict()


def test_schur_complement_matches_dense_formula(rng):
    dense = random_spd(rng, 6)
    f = BlockSymMatrix2.from_dense(dense, 2)
    expected_first = dense[:2, :2] - dense[:2, 2:] @ np.linalg.solve(dense[2:, 2:], dense[2:, :2])
    expected_second = dense[2:, 2:] - dense[2:, :2] @ np.linalg.solve(dense[:2, :2], dense[:2, 2:])
    np.testing.assert_allclose(schur_complement(f, "first"), expected_first, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(schur_complement(f, "second"), expected_second, rtol=1e-10, atol=1e-12)


def test_schur_complement_of_scalar_blocks():
    f = BlockSymMatrix2([[4.0]], [[2.0]], [[2.0]])
    np.testing.assert_allclose(schur_complement(f), [[2.0]])


def test_block_invert_matches_dense_inverse(rng):
    dense = random_spd(rng, 9)
    inverse = block_invert(BlockSymMatrix2.from_dense(dense, 4)).dense()
    np.testing.assert_allclose(inverse, np.linalg.inv(dense), rtol=1e-9, atol=1e-11)


def test_solve_first_is_leading_part_of_full_solve(rng):
    dense = random_spd(rng, 8)
    w = rng.standard_normal(8)
    f = BlockSymMatrix2.from_dense(dense, 3)
    np.testing.assert_allclose(solve_first(f, w[:3], w[3:]), np.linalg.solve(dense, w)[:3], rtol=1e-9, atol=1e-11)


def test_norm_decomposition_both_splittings(rng):
    f = BlockSymMatrix2.from_dense(random_spd(rng, 7), 3)
    w = rng.standard_normal(7)
    decomposition = norm_decomposition(f, w[:3], w[3:])
    assert decomposition.residual() < 1e-10
    np.testing.assert_allclose(decomposition.direct, w @ f.dense() @ w, rtol=1e-12)


def test_singular_block_is_reported_not_regularized():
    with pytest.raises(SingularBlockError) as info:
        SpdFactor(np.array([[1.0, 1.0], [1.0, 1.0]]), "f_bb")
    assert info.value.block == "f_bb"
    f = BlockSymMatrix2([[1.0]], [[0.0]], [[0.0]])
    with pytest.raises(SingularBlockError):
        schur_complement(f, "first")


def test_symmetrize_rejects_non_square():
    with pytest.raises(DimensionMismatchError):
        symmetrize(np.zeros((2, 3)))


def test_cross_block_shape_is_checked():
    with pytest.raises(DimensionMismatchError):
        BlockSymMatrix2(np.eye(2), np.zeros((3, 2)), np.eye(2))


def test_sandwich_bounds_for_weak_coupling(rng):
    a = random_spd(rng, 3, shift=5.0)
    b = random_spd(rng, 4, shift=5.0)
    f = BlockSymMatrix2(a, 0.1 * rng.standard_normal((3, 4)), b)
    report = sandwich_bounds(f)
    assert report.rho < 1.0
    assert report.passed, report.to_dict()


def _three_block(rng, coupling: float) -> BlockSymMatrix3:
    blocks = [random_spd(rng, n, shift=3.0) for n in (2, 3, 4)]
    return BlockSymMatrix3(
        blocks[0],
        blocks[1],
        blocks[2],
        coupling * rng.standard_normal((2, 3)),
        coupling * rng.standard_normal((2, 4)),
        coupling * rng.standard_normal((3, 4)),
    )


def test_three_block_correlation_certificate(rng):
    certificate = three_block_lower_bound(_three_block(rng, 0.05))
    assert certificate.applicable
    assert certificate.certified, certificate.to_dict()


def test_three_block_scaled_certificate(rng):
    f = _three_block(rng, 0.05)
    scale = tuple(sym_sqrt(block) for block in f.diagonal_blocks())
    certificate = three_block_lower_bound(f, mode="scaled", scale=scale, kappa=2.0)
    np.testing.assert_allclose(list(certificate.beta.values()), [1.0, 1.0, 1.0], rtol=1e-8)
    assert certificate.certified, certificate.to_dict()


def test_three_block_strong_coupling_makes_no_claim(rng):
    f = _three_block(rng, 10.0)
    certificate = three_block_lower_bound(f)
    assert not certificate.applicable
    assert not certificate.certified
    assert certificate.reason
