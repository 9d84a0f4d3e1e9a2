import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from powerdecay import (
    DecompositionMismatchError,
    InvalidArgumentError,
    NotPositiveDefiniteError,
    decompose_symmetric,
    from_given_transform,
)
from powerdecay.spectral import jacobi_eigh

NONSYM = dict(A=[[2, 1], [0, 3]], S=[[1, -1], [0, 1]], eigenvalues=[2, 3])


def spd(draw_vals, n, seed):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return Q @ np.diag(draw_vals) @ Q.T


spd_matrices = st.integers(2, 6).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(0.1, 10), min_size=n, max_size=n),
        st.integers(0, 2 ** 31)))


def test_examples_symmetric():
    M = decompose_symmetric([[2, 1], [1, 2]])
    np.testing.assert_allclose(M.distinct, [1, 3], atol=1e-14)
    np.testing.assert_allclose(M.projection(1), 0.5 * np.array([[1, -1], [-1, 1]]), atol=1e-14)
    np.testing.assert_allclose(M.projection(3), 0.5 * np.array([[1, 1], [1, 1]]), atol=1e-14)
    with pytest.raises(InvalidArgumentError):
        M.projection(7)
    D = decompose_symmetric(np.diag([1.0, 2.0, 5.0]))
    assert D.d == 3
    np.testing.assert_allclose(np.abs(D.S), np.eye(3), atol=1e-15)
    with pytest.raises(NotPositiveDefiniteError):
        decompose_symmetric([[1, 0], [0, -1]])
    with pytest.raises(InvalidArgumentError):
        decompose_symmetric([[1, 2], [0, 1]])


def test_complement_apply():
    M = decompose_symmetric([[2, 1], [1, 2]])
    e1 = np.array([1.0, -1.0])
    np.testing.assert_allclose(M.complement_apply(1, e1), 0, atol=1e-14)
    np.testing.assert_allclose(M.complement_apply(3, e1), e1, atol=1e-14)
    D = decompose_symmetric(np.diag([1.0, 2.0]))
    np.testing.assert_allclose(D.complement_apply(1, [3, 4]), [0, 4], atol=1e-14)


def test_given_transform():
    M = from_given_transform(**NONSYM)
    # by direct multiplication S^-1 E_j S; see the ledger for the corrected values
    np.testing.assert_allclose(M.projection(2), [[1, -1], [0, 0]], atol=1e-14)
    np.testing.assert_allclose(M.projection(3), [[0, 1], [0, 1]], atol=1e-14)
    assert not M.symmetric
    D = from_given_transform(np.diag([4.0, 1.0]), np.eye(2), [4, 1])
    np.testing.assert_allclose(D.projection(1), [[0, 0], [0, 1]], atol=0)
    np.testing.assert_allclose(D.projection(4), [[1, 0], [0, 0]], atol=0)
    with pytest.raises(DecompositionMismatchError) as exc:
        from_given_transform(NONSYM["A"], NONSYM["S"], [3, 2])
    assert exc.value.residual > 0
    with pytest.raises(InvalidArgumentError):
        from_given_transform(NONSYM["A"], [[1, 1], [1, 1]], [2, 3])


def test_jacobi_matches_lapack():
    rng = np.random.default_rng(0)
    B = rng.standard_normal((8, 8))
    A = B + B.T
    w, V = jacobi_eigh(A)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(A), atol=1e-12)
    np.testing.assert_allclose(V.T @ V, np.eye(8), atol=1e-13)
    np.testing.assert_allclose(A @ V, V * w, atol=1e-12)


def test_clustering_merges_repeated():
    M = decompose_symmetric(np.diag([1.0, 2.0, 2.0 + 1e-12, 5.0]))
    assert M.d == 3 and M.multiplicities == (1, 2, 1)


def _algebra(M):
    n = M.n
    R = M.projections
    assert np.linalg.norm(sum(R) - np.eye(n)) <= 1e-10
    for i, Ri in enumerate(R):
        for j, Rj in enumerate(R):
            target = Rj if i == j else 0 * Rj
            assert np.linalg.norm(Ri @ Rj - target) <= 1e-10
        assert np.linalg.norm(M.A @ Ri - M.distinct[i] * Ri) <= 1e-8 * M.norm


@given(spd_matrices)
def test_projection_algebra_symmetric(args):
    vals, seed = args
    _algebra(decompose_symmetric(spd(vals, len(vals), seed)))


@given(st.integers(0, 2 ** 31), st.lists(st.floats(0.5, 5), min_size=3, max_size=3))
def test_projection_algebra_transform(seed, vals):
    rng = np.random.default_rng(seed)
    S = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    A = np.linalg.solve(S, np.diag(vals) @ S)
    _algebra(from_given_transform(A, S, vals))


@given(spd_matrices, arrays(float, 6, elements=st.floats(-1e3, 1e3)))
def test_contraction(args, x):
    vals, seed = args
    M = decompose_symmetric(spd(vals, len(vals), seed))
    x = x[: M.n]
    for R in M.projections:
        assert np.linalg.norm(R @ x) <= np.linalg.norm(x) * (1 + 1e-12) + 1e-300


def test_contraction_thousand():
    M = decompose_symmetric(spd([1, 2, 2, 5], 4, 3))
    xs = np.random.default_rng(1).standard_normal((1000, 4))
    for R in M.projections:
        assert np.all(np.linalg.norm(xs @ R.T, axis=1) <= np.linalg.norm(xs, axis=1) * (1 + 1e-12))
