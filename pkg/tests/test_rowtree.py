import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcqw.errors import NonHermitianError, StructureError
from lcqw.linalg import random_hermitian, validate_hermitian
from lcqw.rowtree import build, node_query, update_entry

from conftest import Z


def oracle_tuple(m: np.ndarray, lam: float, j: int, level: int, index: int, depth: int):
    """Recompute a node from the matrix alone, by recursion over its subtree."""
    size = m.shape[0]
    if level == depth:
        return np.conj(m[j, index]), (lam - np.abs(m[j]).sum()) / size
    left = oracle_tuple(m, lam, j, level + 1, 2 * index, depth)
    right = oracle_tuple(m, lam, j, level + 1, 2 * index + 1, depth)
    if level == depth - 1:
        return abs(left[0]) + abs(right[0]), left[1] + right[1]
    return left[0] + right[0], left[1] + right[1]


def assert_matches_oracle(ds, rtol=1e-12):
    m, lam = ds.matrix(), ds.lam
    for j in range(ds.dim):
        for level in range(ds.depth + 1):
            for index in range(2**level):
                got = node_query(ds, j, level, index)
                want = oracle_tuple(m, lam, j, level, index, ds.depth)
                for g, w in zip(got, want):
                    assert abs(g - w) <= rtol * max(lam, 1.0)


def test_pauli_z_tree():
    ds = build(validate_hermitian(Z))
    assert ds.root(0) == (1.0, 0.0)
    assert node_query(ds, 0, 0, 0) == (1.0, 0.0)
    assert node_query(ds, 0, 1, 0) == (1 + 0j, 0.0)
    assert node_query(ds, 0, 1, 1) == (0j, 0.0)
    assert ds.depth == 1 and ds.nodes_per_tree == 3 and ds.total_nodes == 6


def test_four_column_row_root_is_row_sum():
    c = np.array([0.3, -0.2 + 0.1j, 0.05j, -0.4])
    m = np.zeros((4, 4), dtype=complex)
    m[0] = c
    m[:, 0] = c.conj()
    m[0, 0] = 0.3
    h = validate_hermitian(m)
    ds = build(h)
    sigma, slack = ds.root(0)
    assert sigma == pytest.approx(np.abs(c).sum(), rel=1e-15)
    assert slack == pytest.approx(h.lam - sigma, abs=1e-15)
    # level-1 nodes hold |c0|+|c1| and |c2|+|c3|
    assert node_query(ds, 0, 1, 0)[0] == pytest.approx(abs(c[0]) + abs(c[1]))
    assert node_query(ds, 0, 1, 1)[0] == pytest.approx(abs(c[2]) + abs(c[3]))


@pytest.mark.parametrize("n", [1, 2, 4, 8, 16])
def test_build_matches_recomputation(rng, n):
    ds = build(validate_hermitian(random_hermitian(n, rng)))
    assert_matches_oracle(ds)


def test_leaves_store_conjugates(rng):
    m = random_hermitian(4, rng)
    ds = build(validate_hermitian(m))
    assert node_query(ds, 1, 2, 3)[0] == np.conj(m[1, 3])


def test_node_query_out_of_range():
    ds = build(validate_hermitian(Z))
    for args in [(2, 0, 0), (0, 2, 0), (0, 1, 2), (-1, 0, 0)]:
        with pytest.raises(StructureError):
            node_query(ds, *args)


def test_dimension_must_be_power_of_two():
    with pytest.raises(StructureError):
        build(validate_hermitian(np.eye(3)))


def test_noop_update_touches_leaf_and_root():
    ds = build(validate_hermitian(Z))
    _, touched = update_entry(ds, 0, 0, 1.0)
    assert touched == 2
    assert ds.update_log[-1]["trees"] == [0]


def test_update_matches_rebuild():
    ds = build(validate_hermitian(Z))
    update_entry(ds, 0, 1, 1.0)
    fresh = build(validate_hermitian(np.array([[1, 1], [1, -1]], dtype=complex)))
    assert ds.root(0) == (2.0, fresh.lam - 2.0)
    for lv, (a, b) in enumerate(zip(ds.slacks, fresh.slacks)):
        assert np.array_equal(a, b), lv
    assert np.array_equal(ds.leaves, fresh.leaves)
    assert ds.update_log[-1]["trees"] == [0, 1]


def test_update_path_length_n8(rng):
    ds = build(validate_hermitian(random_hermitian(8, rng)))
    _, touched = update_entry(ds, 2, 5, 0.7 - 0.1j)
    assert touched == 4
    assert ds.matrix()[5, 2] == 0.7 + 0.1j


def test_complex_diagonal_update_rejected():
    ds = build(validate_hermitian(Z))
    with pytest.raises(NonHermitianError):
        update_entry(ds, 1, 1, 1j)


def test_update_out_of_range():
    ds = build(validate_hermitian(Z))
    with pytest.raises(StructureError):
        update_entry(ds, 0, 2, 1.0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), steps=st.integers(1, 30))
def test_random_updates_keep_every_node_consistent(seed, steps):
    rng = np.random.default_rng(seed)
    ds = build(validate_hermitian(random_hermitian(8, rng)))
    for _ in range(steps):
        j, k = rng.integers(8, size=2)
        v = rng.normal() + (1j * rng.normal() if j != k else 0)
        _, touched = update_entry(ds, int(j), int(k), v)
        assert touched == 4
    assert_matches_oracle(ds)
    fresh = build(validate_hermitian(ds.matrix()))
    assert fresh.lam == pytest.approx(ds.lam, rel=1e-14)
