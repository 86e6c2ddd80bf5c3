"""Sinkhorn scaling to doubly stochastic form and maximum-product matching."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import ZeroPermanentError
from .matrix import nonneg_matrix

STRUCTURAL_ZERO = 1e-300


@dataclass(frozen=True)
class ScalingResult:
    """``scaled = diag(row_scale) @ M @ diag(col_scale)``.

    ``per(M) = exp(-log_scale_product) * per(scaled)``.
    """

    scaled: np.ndarray
    row_scale: np.ndarray
    col_scale: np.ndarray
    log_scale_product: float
    residual: float
    iterations: int
    converged: bool

    def to_dict(self) -> dict:
        return {
            "scaled": self.scaled.tolist(),
            "row_scale": self.row_scale.tolist(),
            "col_scale": self.col_scale.tolist(),
            "log_scale_product": self.log_scale_product,
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class MatchingResult:
    """A permutation (``sigma[i]`` is the column of row i) and its log product."""

    sigma: tuple[int, ...]
    log_product: float

    @property
    def product(self) -> float:
        return math.exp(self.log_product)

    def to_dict(self) -> dict:
        return {"sigma": list(self.sigma), "log_product": self.log_product}


def _support_matching(m) -> np.ndarray:
    # column matched to each row on the positive support, -1 where unmatched
    return maximum_bipartite_matching(csr_matrix(m > STRUCTURAL_ZERO), perm_type="column")


def support_has_perfect_matching(m) -> bool:
    """``per(m) > 0`` iff the positive support contains a perfect matching."""
    m = nonneg_matrix(m)
    return bool(np.all(_support_matching(m) >= 0))


def _residual(b: np.ndarray) -> float:
    return float(max(np.abs(b.sum(axis=1) - 1).max(), np.abs(b.sum(axis=0) - 1).max()))


def sinkhorn_scale(m, tol: float = 1e-8, max_iters: int = 100_000) -> ScalingResult:
    """Alternate row and column normalization until row/column sums are within ``tol`` of 1.

    Raises ZeroPermanentError when the support has no perfect matching.  On
    non-convergence the best-so-far result is returned with
    ``converged=False``.
    """
    m = nonneg_matrix(m)
    n = m.shape[0]
    if not support_has_perfect_matching(m):
        raise ZeroPermanentError("support has no perfect matching; per(M) = 0")

    log_r = np.zeros(n)
    log_c = np.zeros(n)
    b = m.copy()
    residual = _residual(b)
    it = 0
    while residual > tol and it < max_iters:
        it += 1
        rs = b.sum(axis=1)
        b /= rs[:, None]
        log_r -= np.log(rs)
        cs = b.sum(axis=0)
        b /= cs[None, :]
        log_c -= np.log(cs)
        residual = _residual(b)

    # rebuild from the scales so the factorization identity is exact to rounding
    row_scale, col_scale = np.exp(log_r), np.exp(log_c)
    scaled = m * row_scale[:, None] * col_scale[None, :]
    residual = _residual(scaled)
    for a in (scaled, row_scale, col_scale):
        a.setflags(write=False)
    return ScalingResult(
        scaled=scaled,
        row_scale=row_scale,
        col_scale=col_scale,
        log_scale_product=float(math.fsum(log_r) + math.fsum(log_c)),
        residual=residual,
        iterations=it,
        converged=residual <= tol,
    )


def _hungarian(cost: np.ndarray):
    """Min-cost assignment by shortest augmenting paths with potentials, O(n^3).

    Returns ``(col_of_row, u, v)`` with reduced costs ``cost - u[:, None] -
    v[None, :] >= 0`` and zero on the assignment.
    """
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    owner = np.zeros(n + 1, dtype=np.intp)  # owner[j]: 1-based row assigned to column j
    way = np.zeros(n + 1, dtype=np.intp)
    for i in range(1, n + 1):
        owner[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = owner[j0]
            free = ~used[1:]
            cur = cost[i0 - 1] - u[i0] - v[1:]
            upd = free & (cur < minv[1:])
            minv[1:][upd] = cur[upd]
            way[1:][upd] = j0
            masked = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(masked)) + 1
            delta = masked[j1 - 1]
            u[owner[used]] += delta
            v[used] -= delta
            minv[1:][free] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1
    col_of_row = np.empty(n, dtype=np.intp)
    col_of_row[owner[1:] - 1] = np.arange(n)
    return col_of_row, u[1:], v[1:]


def _lexicographic_tight_matching(tight: np.ndarray, col_of_row: np.ndarray) -> np.ndarray:
    # Among perfect matchings inside the tight-edge graph, move to the
    # lexicographically smallest one, row by row, via alternating paths.
    n = tight.shape[0]
    col = col_of_row.copy()
    row_of = np.empty(n, dtype=np.intp)
    row_of[col] = np.arange(n)
    adj = [np.flatnonzero(tight[i]) for i in range(n)]
    fixed = np.zeros(n, dtype=bool)
    for i in range(n):
        fixed[i] = True
        for j in adj[i]:
            if j >= col[i]:
                break
            r = row_of[j]
            if fixed[r]:
                continue
            # reroute row r to the column freed by i, avoiding fixed rows and column j
            target = col[i]
            parent = {}
            seen_cols = {j}
            queue = deque([r])
            found = None
            while queue and found is None:
                row = queue.popleft()
                for c in adj[row]:
                    if c in seen_cols:
                        continue
                    seen_cols.add(c)
                    parent[c] = row
                    if c == target:
                        found = c
                        break
                    nxt = row_of[c]
                    if not fixed[nxt]:
                        queue.append(nxt)
            if found is None:
                continue
            c = found
            while True:
                row = parent[c]
                prev = col[row]
                col[row] = c
                row_of[c] = row
                if row == r:
                    break
                c = prev
            col[i] = j
            row_of[j] = i
            break
    return col


def max_product_matching(m, tie_tol: float = 1e-12) -> MatchingResult:
    """Permutation maximizing ``prod_i m[i, sigma(i)]``.

    Solved as a min-cost assignment on ``-log m``; entries below 1e-300 are
    structural zeros.  Ties are broken towards the lexicographically smallest
    permutation.  If no positive permutation exists, ``log_product`` is
    ``-inf`` and ``sigma`` covers as much of the support as possible.
    """
    m = nonneg_matrix(m)
    n = m.shape[0]
    support = m > STRUCTURAL_ZERO
    if not support.any():
        return MatchingResult(sigma=tuple(range(n)), log_product=-math.inf)
    logs = np.where(support, np.log(np.where(support, m, 1.0)), 0.0)
    finite = -logs[support]
    span = float(finite.max() - finite.min())
    big = (n + 1) * (span + 1.0) + float(np.abs(finite).max())
    cost = np.where(support, -logs, big)

    col, u, v = _hungarian(cost)
    if not support[np.arange(n), col].all():
        return MatchingResult(sigma=tuple(int(c) for c in col), log_product=-math.inf)

    reduced = cost - u[:, None] - v[None, :]
    scale = max(1.0, float(np.abs(finite).max()))
    tight = support & (reduced <= tie_tol * scale)
    col = _lexicographic_tight_matching(tight, col)
    log_product = math.fsum(logs[np.arange(n), col])
    return MatchingResult(sigma=tuple(int(c) for c in col), log_product=float(log_product))
