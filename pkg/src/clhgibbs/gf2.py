"""Linear algebra over GF(2) on dense uint8 matrices."""

from __future__ import annotations

import numpy as np


def rref(a):
    """Row-reduce a copy of ``a`` mod 2.

    Returns (reduced matrix, list of pivot column indices).
    """
    m = np.array(a, dtype=np.uint8) % 2
    if m.ndim != 2:
        raise ValueError("expected a 2D matrix")
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        hit = np.nonzero(m[r:, c])[0]
        if hit.size == 0:
            continue
        k = r + hit[0]
        if k != r:
            m[[r, k]] = m[[k, r]]
        others = np.nonzero(m[:, c])[0]
        for j in others:
            if j != r:
                m[j] ^= m[r]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(a):
    _, pivots = rref(a)
    return len(pivots)


def nullspace(a):
    """Basis of {x : a @ x = 0 mod 2}, rows of the returned matrix."""
    a = np.atleast_2d(np.array(a, dtype=np.uint8) % 2)
    _, cols = a.shape
    red, pivots = rref(a)
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for r, p in enumerate(pivots):
            if red[r, f]:
                basis[i, p] = 1
    return basis


def solve(a, b):
    """One solution x of a @ x = b mod 2, or None if inconsistent."""
    a = np.atleast_2d(np.array(a, dtype=np.uint8) % 2)
    b = np.array(b, dtype=np.uint8) % 2
    rows, cols = a.shape
    aug = np.concatenate([a, b.reshape(rows, 1)], axis=1)
    red, pivots = rref(aug)
    # inconsistent iff a pivot lands in the augmented column
    if cols in pivots:
        return None
    x = np.zeros(cols, dtype=np.uint8)
    for r, p in enumerate(pivots):
        x[p] = red[r, cols]
    return x
