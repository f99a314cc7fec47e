import numpy as np
import pytest

from ssbmf import (ParameterError, RecoverConfig, RoundingError,
                   extend_from_anchors, gen_selection_matrix, gram,
                   jennrich_decompose, match_columns, mu_table, oracle_tensor,
                   round_boolean, tensor_recover)
from ssbmf.instance import GramMatrix, SelectionMatrix
from ssbmf.errors import RankDeficiencyError


def recover_via_oracle(W, seed=0):
    """Decompose the exact tensor and round, for tests that isolate the
    eigen stage from the bootstrapping stage."""
    T = oracle_tensor(W, materialize=True)
    vectors = jennrich_decompose(T, W.r, seed=seed)
    return np.stack([round_boolean(v) for v in vectors], axis=1)


def test_decompose_recovers_planted_columns():
    W = gen_selection_matrix(40, 8, 2, seed=1)
    dense = W.dense()
    block = recover_via_oracle(W)
    got = sorted(tuple(block[:, i]) for i in range(8))
    want = sorted(tuple(dense[:, j]) for j in range(8))
    assert got == want


def test_decompose_needs_materialized():
    W = gen_selection_matrix(10, 6, 2, seed=0)
    with pytest.raises(ParameterError):
        jennrich_decompose(oracle_tensor(W), 6)


def test_decompose_rank_deficient_raises():
    # duplicate a column by using only r-1 of the r indices
    rows = tuple((0, j % 4) if j % 4 else (1, 2) for j in range(1, 30))
    W = SelectionMatrix(m=29, r=6, k=2, rows=rows)
    T = oracle_tensor(W, materialize=True)
    with pytest.raises(RankDeficiencyError):
        jennrich_decompose(T, 6)


def test_round_boolean_examples():
    assert round_boolean([0.1, -0.9, 0.05, -0.95]).tolist() == [0, 1, 0, 1]
    assert round_boolean([2.0, 0.0, 2.0]).tolist() == [1, 0, 1]
    with pytest.raises(RoundingError):
        round_boolean([1.0, 0.5, 0.0])
    with pytest.raises(ParameterError):
        round_boolean([0.0, 0.0])


def test_round_boolean_sign_invariant():
    v = np.array([0.98, -0.02, 1.01, 0.0, 0.97])
    assert np.array_equal(round_boolean(v), round_boolean(-v))
    assert round_boolean(v).tolist() == [1, 0, 1, 0, 1]


def test_extend_from_anchors_exact():
    W = gen_selection_matrix(5000, 10, 2, seed=7)
    M = gram(W)
    table = mu_table(10, 2)
    anchors = list(range(40))
    block = W.dense()[anchors]
    W_hat = extend_from_anchors(block, anchors, M, table, 2)
    assert W_hat.rows == W.rows


def test_extend_rejects_rank_deficient_block():
    table = mu_table(6, 2)
    W = gen_selection_matrix(100, 6, 2, seed=1)
    M = gram(W)
    block = np.zeros((8, 6))
    block[:, 0] = 1
    block[:, 1] = 1
    with pytest.raises(RankDeficiencyError):
        extend_from_anchors(block, list(range(8)), M, table, 2)


def test_extend_needs_enough_anchors():
    table = mu_table(6, 2)
    M = gram(gen_selection_matrix(20, 6, 2, seed=1))
    with pytest.raises(ParameterError):
        extend_from_anchors(np.ones((3, 6)), [0, 1, 2], M, table, 2)


def test_match_columns_permutation():
    W = gen_selection_matrix(30, 6, 2, seed=2)
    dense = W.dense()
    perm = [3, 1, 5, 0, 2, 4]
    rows = tuple(tuple(sorted(perm.index(j) for j in row)) for row in W.rows)
    W_perm = SelectionMatrix(m=30, r=6, k=2, rows=rows)
    permutation, unmatched = match_columns(W_perm, W)
    assert unmatched is None
    ref = W.dense()
    for i, j in enumerate(permutation):
        assert np.array_equal(W_perm.dense()[:, i], ref[:, j])


def test_match_columns_reports_unmatched():
    W1 = SelectionMatrix(m=2, r=4, k=2, rows=((0, 1), (2, 3)))
    W2 = SelectionMatrix(m=2, r=4, k=2, rows=((0, 1), (1, 2)))
    permutation, unmatched = match_columns(W1, W2)
    assert permutation is None
    assert unmatched is not None and len(unmatched[0]) == len(unmatched[1])


def test_tensor_recover_end_to_end_small():
    W = gen_selection_matrix(3905, 8, 2, seed=3)
    M = gram(W)
    res = tensor_recover(M, 8, 2, RecoverConfig(mode="anchored", anchors=40,
                                                seed=3))
    assert res.success and res.residual == 0
    perm, unmatched = match_columns(res.W_hat, W)
    assert unmatched is None


def test_tensor_recover_failure_flag_on_garbage():
    # all-ones Gram matrix is inconsistent with any k-sparse factorization
    m = 64
    M = GramMatrix(m=m, bits=tuple((1 << m) - 1 for _ in range(m)))
    res = tensor_recover(M, 8, 2, RecoverConfig(mode="full"))
    assert not res.success
    assert res.W_hat is None
    assert res.failure


def test_tensor_recover_parameter_errors_raise():
    M = gram(gen_selection_matrix(20, 6, 2, seed=0))
    with pytest.raises(ParameterError):
        tensor_recover(M, 6, 9)
    with pytest.raises(ParameterError):
        tensor_recover(M, 6, 2, RecoverConfig(mode="spiral"))


def test_recovered_report_shape():
    W = gen_selection_matrix(3905, 8, 2, seed=5)
    M = gram(W)
    res = tensor_recover(M, 8, 2, RecoverConfig(mode="anchored", anchors=40,
                                                seed=5))
    report = res.report(include_timing=False)
    assert report["success"] is True
    assert report["residual"] == 0
    assert "seconds" not in report
    assert "seconds" in res.report()
