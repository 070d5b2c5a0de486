"""Exact integer linear algebra on stoichiometric matrices.

Kernels are computed by fraction-free Gauss-Jordan elimination over the
integers: columns are scanned left to right, the pivot is the remaining row
with the smallest nonzero entry in that column (lowest index on ties), and
every updated row is divided by the gcd of its entries.  Basis vectors have
content 1 and a positive first nonzero entry, so results are reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Literal, Sequence

import numpy as np

__all__ = [
    "KernelBasis",
    "integer_rows",
    "echelon_form",
    "rank",
    "right_kernel",
    "left_kernel",
    "same_conservation_class",
    "least_squares_solve",
]


@dataclass(frozen=True)
class KernelBasis:
    """Integer basis of ``{v : G v = 0}`` (right) or ``{v : v^T G = 0}`` (left)."""

    vectors: tuple[tuple[int, ...], ...]
    side: Literal["right", "left"]
    ambient_dim: int

    def __len__(self) -> int:
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def as_array(self) -> np.ndarray:
        """Basis vectors as the columns of a float ``(ambient_dim, k)`` array."""
        if not self.vectors:
            return np.zeros((self.ambient_dim, 0))
        return np.array(self.vectors, dtype=float).T


def integer_rows(G) -> list[list[int]]:
    """Rows of ``G`` as Python ints; integral floats are accepted."""
    rows = []
    for row in (np.asarray(G).tolist() if len(G) else []):
        out = []
        for v in row:
            if isinstance(v, float):
                if not v.is_integer():
                    raise TypeError(f"matrix entries must be integers, got {v!r}")
                v = int(v)
            elif not isinstance(v, int):
                raise TypeError(f"matrix entries must be integers, got {v!r}")
            out.append(v)
        rows.append(out)
    return rows


def _normalize(row: list[int]) -> list[int]:
    g = 0
    for v in row:
        g = gcd(g, v)
    if g > 1:
        row = [v // g for v in row]
    for v in row:
        if v:
            if v < 0:
                row = [-w for w in row]
            break
    return row


def echelon_form(rows: list[list[int]], n_cols: int) -> tuple[list[list[int]], list[int]]:
    """Reduced integer echelon form.

    Returns the nonzero reduced rows and their pivot columns.  Each pivot
    column is zero in every other row.
    """
    work = [list(r) for r in rows]
    reduced: list[list[int]] = []
    pivots: list[int] = []
    for col in range(n_cols):
        candidates = [i for i, r in enumerate(work) if r[col] != 0]
        if not candidates:
            continue
        p = min(candidates, key=lambda i: (abs(work[i][col]), i))
        prow = work.pop(p)
        pv = prow[col]
        for i, r in enumerate(work):
            f = r[col]
            if f:
                work[i] = _normalize([pv * a - f * b for a, b in zip(r, prow)])
        for i, r in enumerate(reduced):
            f = r[col]
            if f:
                reduced[i] = _normalize([pv * a - f * b for a, b in zip(r, prow)])
        reduced.append(_normalize(prow))
        pivots.append(col)
    return reduced, pivots


def rank(G) -> int:
    G = np.asarray(G)
    if G.size == 0:
        return 0
    return len(echelon_form(integer_rows(G), G.shape[1])[1])


def _kernel_vectors(rows: list[list[int]], n_cols: int) -> list[tuple[int, ...]]:
    reduced, pivots = echelon_form(rows, n_cols)
    free = [c for c in range(n_cols) if c not in set(pivots)]
    scale = 1
    for r, c in zip(reduced, pivots):
        scale = lcm(scale, abs(r[c]))
    basis = []
    for f in free:
        v = [0] * n_cols
        v[f] = scale
        for r, c in zip(reduced, pivots):
            # r[c]*v[c] + r[f]*v[f] = 0
            v[c] = -r[f] * scale // r[c]
        basis.append(tuple(_normalize(v)))
    return basis


def right_kernel(G) -> KernelBasis:
    """Exact integer basis of the right kernel of an integer matrix.

    >>> right_kernel([[1, -1], [1, -1]]).vectors
    ((1, 1),)
    """
    G = np.asarray(G)
    n = G.shape[1]
    return KernelBasis(tuple(_kernel_vectors(integer_rows(G), n)), "right", n)


def left_kernel(G) -> KernelBasis:
    """Exact integer basis of the left kernel (cycle space over the rows)."""
    G = np.asarray(G)
    m = G.shape[0]
    rows = integer_rows(G.T) if G.shape[1] else []
    return KernelBasis(tuple(_kernel_vectors(rows, m)), "left", m)


def same_conservation_class(G, x, y, tol: float = 1e-9, exact: bool = False) -> bool:
    """Whether ``x`` and ``y`` agree on every primitive conservation law.

    Float mode accepts ``|v.(x-y)| <= tol*(1 + |v|_1 * max(|x|_inf, |y|_inf))``
    for each right-kernel basis vector ``v``.  ``exact=True`` converts the
    points to Fractions and demands equality.
    """
    if len(x) != len(y):
        raise ValueError("points have different lengths")
    basis = right_kernel(G)
    if len(x) != basis.ambient_dim:
        raise ValueError(f"points have length {len(x)}, matrix has {basis.ambient_dim} columns")
    if exact:
        xs = [Fraction(v) for v in x]
        ys = [Fraction(v) for v in y]
        return all(sum(vi * (a - b) for vi, a, b in zip(v, xs, ys)) == 0 for v in basis)
    if tol < 0:
        raise ValueError("tol must be non-negative")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    size = max(np.max(np.abs(x), initial=0.0), np.max(np.abs(y), initial=0.0))
    for v in basis:
        v = np.asarray(v, dtype=float)
        if abs(v @ (x - y)) > tol * (1.0 + np.abs(v).sum() * size):
            return False
    return True


def least_squares_solve(G, b) -> tuple[np.ndarray, float]:
    """Minimum-norm least-squares solution of ``G alpha = b``.

    Uses an SVD-based solver (orthogonal factorization, no normal
    equations).  Returns ``(alpha, ||G alpha - b||_2)``.
    """
    G = np.asarray(G, dtype=float)
    b = np.asarray(b, dtype=float)
    if G.shape[0] != b.shape[0]:
        raise ValueError(f"matrix has {G.shape[0]} rows, right-hand side has {b.shape[0]}")
    alpha, *_ = np.linalg.lstsq(G, b, rcond=None)
    residual = float(np.linalg.norm(G @ alpha - b))
    return alpha, residual
