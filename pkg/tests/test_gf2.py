from __future__ import annotations

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from clustertherm import gf2


def dense_rank(rows: list[int], n: int) -> int:
    """Gaussian elimination on a numpy 0/1 matrix."""
    m = np.array([[(r >> j) & 1 for j in range(n)] for r in rows], dtype=np.uint8).reshape(len(rows), n)
    rank = 0
    for col in range(n):
        pivot = next((i for i in range(rank, len(m)) if m[i, col]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for i in range(len(m)):
            if i != rank and m[i, col]:
                m[i] ^= m[rank]
        rank += 1
    return rank


rows = st.integers(1, 12).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(0, (1 << n) - 1), max_size=10)))


@given(rows)
def test_rank_matches_dense_elimination(data):
    n, rs = data
    assert gf2.rank(rs) == dense_rank(rs, n)


@given(rows)
def test_nullspace_is_orthogonal_and_complete(data):
    n, rs = data
    null = gf2.nullspace(rs, n)
    assert len(null) == n - gf2.rank(rs)
    for x in null:
        assert all(bin(r & x).count("1") % 2 == 0 for r in rs)
    assert gf2.rank(null) == len(null)


@given(rows)
def test_span_membership(data):
    n, rs = data
    basis = gf2.reduce_rows(rs)
    for r in rs:
        assert gf2.in_span(r, basis)
    acc = 0
    for r in rs[::2]:
        acc ^= r
    assert gf2.in_span(acc, basis)
