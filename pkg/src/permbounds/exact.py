"""Exact permanents at desk scale.

Two independent evaluators: brute force over all permutations (n <= 9) and
Ryser inclusion-exclusion with Gray-code column updates (n <= 20).  They
serve as the ground-truth oracle for every other module.
"""

from __future__ import annotations

import functools
import itertools
import logging
import math

import numba
import numpy as np

from .errors import DimensionTooLargeError, NumericInstabilityError
from .matrix import nonneg_matrix

log = logging.getLogger(__name__)

NAIVE_MAX_N = 9
RYSER_MAX_N = 20
CLAMP_RELATIVE = 1e-12


@functools.lru_cache(maxsize=None)
def _all_permutations(n: int) -> np.ndarray:
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    perms.setflags(write=False)
    return perms


def permanent_naive(m) -> float:
    """Sum of ``prod_i m[i, sigma(i)]`` over all ``n!`` permutations."""
    m = nonneg_matrix(m)
    n = m.shape[0]
    if n > NAIVE_MAX_N:
        raise DimensionTooLargeError(f"permanent_naive supports n <= {NAIVE_MAX_N}, got {n}")
    perms = _all_permutations(n)
    terms = m[np.arange(n), perms].prod(axis=1)
    return float(math.fsum(terms))


@numba.njit(cache=True)
def _ryser_gray(a):
    # Nijenhuis-Wilf form of Ryser: Gray code over the first n-1 columns with
    # row offsets x_i = a[i, n-1] - rowsum_i / 2.  Returns (value, max |term|).
    n = a.shape[0]
    r = np.empty(n)
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += a[i, j]
        r[i] = a[i, n - 1] - 0.5 * s
    prod = 1.0
    for i in range(n):
        prod *= r[i]
    total = prod
    comp = 0.0
    maxterm = abs(prod)
    gray = 0
    sign = 1.0
    for k in range(1, 1 << (n - 1)):
        j = 0
        while not (k >> j) & 1:
            j += 1
        gray ^= 1 << j
        sign = -sign
        if (gray >> j) & 1:
            for i in range(n):
                r[i] += a[i, j]
        else:
            for i in range(n):
                r[i] -= a[i, j]
        prod = 1.0
        for i in range(n):
            prod *= r[i]
        term = sign * prod
        if abs(prod) > maxterm:
            maxterm = abs(prod)
        # Kahan-compensated accumulation
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    scale = 2.0 if (n - 1) % 2 == 0 else -2.0
    return scale * total, 2.0 * maxterm


def permanent_ryser(m, return_clamped: bool = False):
    """Ryser inclusion-exclusion permanent, O(2^n n).

    Alternating signs can push the result of a nonnegative matrix slightly
    below zero.  A negative result within ``1e-12`` of the largest
    intermediate term is clamped to 0 and logged; anything larger raises
    NumericInstabilityError.  With ``return_clamped`` the function returns
    ``(value, clamped)``.
    """
    m = nonneg_matrix(m)
    n = m.shape[0]
    if n > RYSER_MAX_N:
        raise DimensionTooLargeError(f"permanent_ryser supports n <= {RYSER_MAX_N}, got {n}")
    value, maxterm = _ryser_gray(np.ascontiguousarray(m))
    clamped = False
    if value < 0:
        if -value <= CLAMP_RELATIVE * maxterm:
            log.warning("Ryser result %.3e clamped to 0 (max term %.3e)", value, maxterm)
            value = 0.0
            clamped = True
        else:
            raise NumericInstabilityError(
                f"Ryser produced {value!r} for a nonnegative matrix (max term {maxterm!r})"
            )
    value = float(value)
    return (value, clamped) if return_clamped else value


permanent = permanent_ryser


def minor(m, i: int, j: int) -> np.ndarray:
    """``m`` with row ``i`` and column ``j`` deleted (0-based)."""
    m = np.asarray(m)
    return np.delete(np.delete(m, i, axis=0), j, axis=1)


def permanent_minor(m, i: int, j: int) -> float:
    """Permanent of ``m`` with row ``i`` and column ``j`` removed (0-based)."""
    m = nonneg_matrix(m)
    n = m.shape[0]
    if n < 2:
        raise ValueError("minors need n >= 2")
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"index ({i}, {j}) out of range for n={n}")
    return permanent_ryser(minor(m, i, j))


@numba.njit(cache=True)
def _minors_kernel(a, skip_zero):
    n = a.shape[0]
    out = np.zeros((n, n))
    sub = np.empty((n - 1, n - 1))
    for i in range(n):
        for j in range(n):
            if skip_zero and a[i, j] == 0.0:
                continue
            for r in range(n - 1):
                rr = r if r < i else r + 1
                for c in range(n - 1):
                    sub[r, c] = a[rr, c if c < j else c + 1]
            out[i, j] = _ryser_gray(sub)[0]
    return out


def permanent_minors(m, skip_zero: bool = True) -> np.ndarray:
    """Matrix of all ``(i, j)`` minor permanents.

    With ``skip_zero`` the minor is left at 0 wherever ``m[i, j] == 0``, which
    is all callers multiplying by ``m[i, j]`` need.  Tiny negative minors
    from Ryser cancellation are clamped to 0.
    """
    m = nonneg_matrix(m)
    n = m.shape[0]
    if n < 2:
        raise ValueError("minors need n >= 2")
    if n - 1 > RYSER_MAX_N:
        raise DimensionTooLargeError(f"minors support n <= {RYSER_MAX_N + 1}")
    out = _minors_kernel(np.ascontiguousarray(m), skip_zero)
    return np.maximum(out, 0.0)


def permanent_expansion_check(m, rtol: float = 1e-10) -> bool:
    """Check ``per(m) == sum_j m[0, j] * per(m[0, j])``.

    The left side uses Ryser, the minors use brute force, so the two sides
    share no code path.
    """
    m = nonneg_matrix(m)
    n = m.shape[0]
    if not 2 <= n <= NAIVE_MAX_N + 1:
        raise ValueError(f"expansion check supports 2 <= n <= {NAIVE_MAX_N + 1}")
    lhs = permanent_ryser(m)
    rhs = math.fsum(m[0, j] * permanent_naive(minor(m, 0, j)) for j in range(n))
    return abs(lhs - rhs) <= rtol * max(abs(lhs), abs(rhs), 1e-300)
