"""Small dense linear algebra over exact rationals or floats.

Exact mode clears denominators row by row and runs fraction-free (Bareiss)
elimination, so rank and determinant are decided exactly.  Float mode defers
to numpy; rank counts singular values above ``FLOAT_TOL * max(1, sigma_max)``.
"""

from __future__ import annotations

from math import lcm

import numpy as np
from gmpy2 import mpq

from .errors import NonInvertibleError
from .series.jet import EXACT, FLOAT_TOL, is_negligible


def _integer_rows(rows):
    """Scale each row by the lcm of its denominators; returns (rows, product of scales)."""
    out, scale = [], mpq(1)
    for row in rows:
        den = lcm(*(int(mpq(x).denominator) for x in row)) if row else 1
        out.append([mpq(x) * den for x in row])
        scale *= den
    return out, scale


def _bareiss(rows, ncols):
    """In-place fraction-free elimination; returns (rank, sign, pivot columns, last pivot)."""
    nrows = len(rows)
    prev = mpq(1)
    rank, sign, pivots = 0, 1, []
    for col in range(ncols):
        if rank == nrows:
            break
        p = next((r for r in range(rank, nrows) if rows[r][col] != 0), None)
        if p is None:
            continue
        if p != rank:
            rows[p], rows[rank] = rows[rank], rows[p]
            sign = -sign
        piv = rows[rank][col]
        for r in range(rank + 1, nrows):
            for c in range(col + 1, ncols):
                rows[r][c] = (piv * rows[r][c] - rows[r][col] * rows[rank][c]) / prev
            rows[r][col] = mpq(0)
        prev = piv
        pivots.append(col)
        rank += 1
    return rank, sign, pivots, prev


def rank(matrix, mode: str = EXACT) -> int:
    rows = [list(r) for r in matrix]
    if not rows or not rows[0]:
        return 0
    if mode == EXACT:
        rows, _ = _integer_rows(rows)
        return _bareiss(rows, len(rows[0]))[0]
    a = np.asarray(rows, dtype=float)
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0:
        return 0
    return int(np.sum(s > FLOAT_TOL * max(1.0, s[0])))


def det(matrix, mode: str = EXACT):
    n = len(matrix)
    if n == 0:
        return mpq(1) if mode == EXACT else 1.0
    if mode == EXACT:
        rows, scale = _integer_rows([list(r) for r in matrix])
        r, sign, _, last = _bareiss(rows, n)
        if r < n:
            return mpq(0)
        return sign * last / scale
    return float(np.linalg.det(np.asarray(matrix, dtype=float)))


def inverse(matrix, mode: str = EXACT):
    """Matrix inverse; raises :class:`NonInvertibleError` when singular."""
    n = len(matrix)
    if mode == EXACT:
        a = [[mpq(x) for x in row] + [mpq(int(i == j)) for j in range(n)]
             for i, row in enumerate(matrix)]
        for col in range(n):
            p = next((r for r in range(col, n) if a[r][col] != 0), None)
            if p is None:
                raise NonInvertibleError("singular linear part")
            a[col], a[p] = a[p], a[col]
            inv = 1 / a[col][col]
            a[col] = [x * inv for x in a[col]]
            for r in range(n):
                if r != col and a[r][col] != 0:
                    f = a[r][col]
                    a[r] = [x - f * y for x, y in zip(a[r], a[col])]
        return [row[n:] for row in a]
    m = np.asarray(matrix, dtype=float)
    if n and rank(matrix, mode) < n:
        raise NonInvertibleError("singular linear part")
    return np.linalg.inv(m).tolist() if n else []


def select_columns(matrix, count: int, mode: str = EXACT) -> list[int]:
    """Greedy column pivoting: pick ``count`` columns spanning the row space.

    Exact mode takes the first nonzero pivot (deterministic); float mode the
    largest in magnitude.  Returns fewer than ``count`` indices when the
    matrix is rank deficient.
    """
    rows = [list(r) for r in matrix]
    if not rows:
        return []
    ncols = len(rows[0])
    chosen: list[int] = []
    scale = max((abs(x) for r in rows for x in r), default=0)
    for r in range(len(rows)):
        if len(chosen) == count:
            break
        row = rows[r]
        candidates = [c for c in range(ncols)
                      if c not in chosen and not is_negligible(row[c], mode, scale)]
        if not candidates:
            continue
        if mode == EXACT:
            c = candidates[0]
        else:
            c = max(candidates, key=lambda j: abs(row[j]))
        chosen.append(c)
        piv = row[c]
        for r2 in range(r + 1, len(rows)):
            f = rows[r2][c] / piv
            if f:
                rows[r2] = [x - f * y for x, y in zip(rows[r2], row)]
    return chosen
