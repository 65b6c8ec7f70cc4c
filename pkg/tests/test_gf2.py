from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modcoh.gf2 import (
    BitMatrix,
    IntEchelon,
    RowSpaceSolver,
    SubspaceBasis,
    equalizer_basis,
    intersect_subspaces,
    nullspace_basis,
    rank,
    row_reduce,
    solve_linear,
)


def naive_rank(rows: np.ndarray) -> int:
    """Gaussian elimination on a plain 0/1 array, written out longhand."""
    a = rows.copy() % 2
    r = 0
    for c in range(a.shape[1]):
        piv = next((i for i in range(r, a.shape[0]) if a[i, c]), None)
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        for i in range(a.shape[0]):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        r += 1
    return r


def all_vectors(n: int) -> np.ndarray:
    return np.array(list(itertools.product([0, 1], repeat=n)), dtype=np.uint8)


def span_set(space: SubspaceBasis) -> set[tuple]:
    basis = space.vectors()
    out = set()
    for coeffs in itertools.product([0, 1], repeat=space.dim):
        v = np.zeros(space.ambient_dim, dtype=np.uint8)
        for c, b in zip(coeffs, basis):
            if c:
                v ^= b
        out.add(tuple(int(x) for x in v))
    return out


matrices = st.integers(0, 9).flatmap(
    lambda r: st.integers(0, 70).flatmap(
        lambda c: st.lists(st.lists(st.integers(0, 1), min_size=c, max_size=c), min_size=r, max_size=r).map(
            lambda rows: np.array(rows, dtype=np.uint8).reshape(r, c)
        )
    )
)


def test_identity_and_zero():
    red, piv, rk = row_reduce(BitMatrix.identity(3))
    assert red == BitMatrix.identity(3) and piv == [0, 1, 2] and rk == 3
    z = BitMatrix.zeros(2, 4)
    red, piv, rk = row_reduce(z)
    assert red == z and piv == [] and rk == 0


def test_dependent_rows_rank_two():
    m = BitMatrix.from_strings(["1101", "0110", "1011"])
    assert rank(m) == 2 == naive_rank(m.to_dense())


def test_nullspace_examples():
    assert nullspace_basis(BitMatrix.identity(4)).dim == 0
    assert nullspace_basis(BitMatrix.zeros(3, 5)).dim == 5
    ns = nullspace_basis(BitMatrix.from_strings(["11"]))
    brute = {tuple(v) for v in all_vectors(2) if (v[0] + v[1]) % 2 == 0}
    assert span_set(ns) == brute


def test_equalizer_examples():
    a = BitMatrix.from_strings(["101", "011"])
    assert equalizer_basis(a, a).dim == 3
    assert equalizer_basis(BitMatrix.identity(3), BitMatrix.zeros(3, 3)).dim == 0
    with pytest.raises(ValueError):
        equalizer_basis(BitMatrix.zeros(2, 3), BitMatrix.zeros(3, 3))


def test_equalizer_random_against_scan():
    rng = np.random.default_rng(7)
    for _ in range(10):
        a = rng.integers(0, 2, (4, 6))
        b = rng.integers(0, 2, (4, 6))
        eq = equalizer_basis(BitMatrix.from_dense(a), BitMatrix.from_dense(b))
        brute = {tuple(int(x) for x in v) for v in all_vectors(6) if np.all((a @ v) % 2 == (b @ v) % 2)}
        assert span_set(eq) == brute


def test_intersections():
    full = SubspaceBasis.full(3)
    assert intersect_subspaces([full, full]) == full
    l1 = SubspaceBasis.span(BitMatrix.from_strings(["10"]))
    l2 = SubspaceBasis.span(BitMatrix.from_strings(["11"]))
    assert intersect_subspaces([l1, l2]).dim == 0
    assert intersect_subspaces([], ambient_dim=4).dim == 4
    with pytest.raises(ValueError):
        intersect_subspaces([l1, full])
    rng = np.random.default_rng(3)
    for _ in range(10):
        spaces = [SubspaceBasis.span(BitMatrix.from_dense(rng.integers(0, 2, (int(rng.integers(1, 6)), 6))))
                  for _ in range(3)]
        brute = set.intersection(*(span_set(s) for s in spaces))
        assert span_set(intersect_subspaces(spaces)) == brute


def test_solve_examples():
    rhs = np.array([1, 0, 1], dtype=np.uint8)
    assert np.array_equal(solve_linear(BitMatrix.identity(3), rhs), rhs)
    assert solve_linear(BitMatrix.zeros(2, 2), [1, 0]) is None
    x = solve_linear(BitMatrix.from_strings(["11", "01"]), [1, 1])
    assert list(x) == [0, 1]


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_rank_nullity_and_idempotence(dense):
    m = BitMatrix.from_dense(dense) if dense.size else BitMatrix(dense.shape[0], dense.shape[1])
    red, piv, rk = row_reduce(m)
    assert rk == naive_rank(dense) if dense.size else rk == 0
    assert piv == sorted(piv)
    red2, piv2, _ = row_reduce(red)
    assert red2 == red and piv2 == piv
    ns = nullspace_basis(m)
    assert ns.dim + rk == m.ncols
    for v in ns.vectors():
        assert not np.any((dense.astype(int) @ v.astype(int)) % 2) if dense.size else True


@settings(max_examples=40, deadline=None)
@given(matrices, st.integers(0, 2**32))
def test_equalizer_is_nullspace_of_sum(dense, seed):
    rng = np.random.default_rng(seed)
    other = rng.integers(0, 2, dense.shape).astype(np.uint8)
    a, b = BitMatrix(*dense.shape, None), BitMatrix(*dense.shape, None)
    if dense.size:
        a, b = BitMatrix.from_dense(dense), BitMatrix.from_dense(other)
    assert equalizer_basis(a, b) == nullspace_basis(a + b)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 2**10 - 1), min_size=1, max_size=8), st.integers(0, 2**10 - 1))
def test_row_space_solver(rows, target):
    solver = RowSpaceSolver(rows)
    combo = solver.solve(target)
    ech = IntEchelon()
    for r in rows:
        ech.add(r)
    assert (combo is not None) == ech.contains(target)
    if combo is not None:
        acc = 0
        for i, r in enumerate(rows):
            if combo >> i & 1:
                acc ^= r
        assert acc == target


def test_wide_matrix_words():
    rng = np.random.default_rng(11)
    dense = rng.integers(0, 2, (40, 200)).astype(np.uint8)
    m = BitMatrix.from_dense(dense)
    assert rank(m) == naive_rank(dense)
    assert np.array_equal(m.to_dense(), dense)
    assert np.array_equal(m.transpose().to_dense(), dense.T)
