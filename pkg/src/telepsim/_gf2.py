"""Dense GF(2) linear algebra on uint8 numpy arrays."""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np


def row_reduce(mat: np.ndarray) -> Tuple[np.ndarray, list]:
    """Row-reduced echelon form and pivot column list."""
    a = (np.asarray(mat, dtype=np.uint8) & 1).copy()
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        hits = np.flatnonzero(a[r:, c]) + r
        if len(hits) == 0:
            continue
        if hits[0] != r:
            a[[r, hits[0]]] = a[[hits[0], r]]
        others = np.flatnonzero(a[:, c])
        others = others[others != r]
        a[others] ^= a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(mat: np.ndarray) -> int:
    if mat.size == 0:
        return 0
    return len(row_reduce(mat)[1])


def solve(mat: np.ndarray, rhs: np.ndarray) -> Optional[np.ndarray]:
    """One solution x of mat @ x = rhs over GF(2), or None.

    rhs may be a vector or a matrix of stacked column right-hand sides;
    the result has matching shape.
    """
    a = np.asarray(mat, dtype=np.uint8) & 1
    b = np.asarray(rhs, dtype=np.uint8) & 1
    single = b.ndim == 1
    if single:
        b = b[:, None]
    aug, pivots = row_reduce(np.hstack([a, b]))
    n = a.shape[1]
    x = np.zeros((n, b.shape[1]), dtype=np.uint8)
    for i, c in enumerate(pivots):
        if c >= n:
            return None  # pivot in the augmented part: inconsistent
        x[c] = aug[i, n:]
    return x[:, 0] if single else x


def nullspace(mat: np.ndarray) -> np.ndarray:
    """Basis of the kernel, one vector per row (possibly empty)."""
    a = np.asarray(mat, dtype=np.uint8) & 1
    rows, cols = a.shape
    red, pivots = row_reduce(a)
    free = [c for c in range(cols) if c not in pivots]
    out = np.zeros((len(free), cols), dtype=np.uint8)
    for k, f in enumerate(free):
        out[k, f] = 1
        for i, c in enumerate(pivots):
            out[k, c] = red[i, f]
    return out


def in_span(basis: np.ndarray, vec: np.ndarray) -> bool:
    """Whether vec lies in the row span of basis."""
    basis = np.asarray(basis, dtype=np.uint8) & 1
    if basis.size == 0:
        return not (np.asarray(vec) & 1).any()
    return solve(basis.T, vec) is not None


class SpanChecker:
    """Preprocessed row space for fast repeated membership tests."""

    def __init__(self, basis: np.ndarray):
        basis = np.asarray(basis, dtype=np.uint8) & 1
        red, pivots = row_reduce(basis) if basis.size else (basis, [])
        self.rows = red[: len(pivots)].copy()
        self.pivots = list(pivots)

    def contains(self, vec: np.ndarray) -> bool:
        v = (np.asarray(vec, dtype=np.uint8) & 1).copy()
        for row, p in zip(self.rows, self.pivots):
            if v[p]:
                v ^= row
        return not v.any()

    def reduce(self, vec: np.ndarray) -> np.ndarray:
        v = (np.asarray(vec, dtype=np.uint8) & 1).copy()
        for row, p in zip(self.rows, self.pivots):
            if v[p]:
                v ^= row
        return v

    def contains_many(self, vecs: np.ndarray) -> np.ndarray:
        v = (np.asarray(vecs, dtype=np.uint8) & 1).copy()
        for row, p in zip(self.rows, self.pivots):
            mask = v[:, p] == 1
            v[mask] ^= row
        return ~v.any(axis=1)
