"""Linear algebra over GF(2) with rows packed into Python ints."""

from __future__ import annotations

from typing import Iterable


def reduce_rows(rows: Iterable[int]) -> list[tuple[int, int]]:
    """Echelon basis as ``(pivot_bit, row)`` pairs; pivots are each row's highest set bit."""
    basis: list[tuple[int, int]] = []
    for row in rows:
        for pivot, b in basis:
            if row >> pivot & 1:
                row ^= b
        if row:
            pivot = row.bit_length() - 1
            basis = [(p, b ^ row if b >> pivot & 1 else b) for p, b in basis]
            basis.append((pivot, row))
    return basis


def rank(rows: Iterable[int]) -> int:
    return len(reduce_rows(rows))


def in_span(vector: int, basis: list[tuple[int, int]]) -> bool:
    for pivot, b in basis:
        if vector >> pivot & 1:
            vector ^= b
    return vector == 0


def nullspace(rows: list[int], n_cols: int) -> list[int]:
    """Basis of ``{x : popcount(row & x) even for every row}`` over ``n_cols`` bits."""
    basis = reduce_rows(rows)
    pivots = {p for p, _ in basis}
    out = []
    for free in range(n_cols):
        if free in pivots:
            continue
        x = 1 << free
        for p, b in basis:
            if b >> free & 1:
                x |= 1 << p
        out.append(x)
    return out
