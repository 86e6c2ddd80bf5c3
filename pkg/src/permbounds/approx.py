"""Deterministic permanent approximation with a certified interval.

Pipeline: support check, Sinkhorn scaling to doubly stochastic form,
maximum-product matching, and a two-way case split on the matching product
against ``2^-n``.  Everything is carried in log space; ``lo``/``hi`` are
exponentiated at the end and the logs stay on the result for large n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import log_factorial, log_vdw_lower, p_zero
from .errors import ConvergenceError, NotStochasticError, ZeroPermanentError
from .matrix import is_doubly_stochastic, nonneg_matrix
from .scaling import (
    MatchingResult,
    ScalingResult,
    max_product_matching,
    sinkhorn_scale,
    support_has_perfect_matching,
)

ZERO = "zero"
LARGE_MATCHING = "large_matching"
SMALL_MATCHING = "small_matching"

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class ApproxResult:
    lo: float
    hi: float
    log_lo: float
    log_hi: float
    case: str
    matching: MatchingResult | None
    scaling: ScalingResult | None = None
    residual: float = 0.0
    small_n: bool = False  # n < 5: the formulas hold but the asymptotic claim is not the point

    @property
    def estimate(self) -> float:
        """Geometric mean of the interval."""
        if self.case == ZERO:
            return 0.0
        return math.exp(0.5 * (self.log_lo + self.log_hi))

    @property
    def guarantee_factor(self) -> float:
        if self.case == ZERO:
            return 1.0
        return math.exp(self.log_hi - self.log_lo)

    def to_dict(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "estimate": self.estimate,
            "guarantee_factor": self.guarantee_factor,
            "case": self.case,
            "residual": self.residual,
            "log_lo": self.log_lo,
            "log_hi": self.log_hi,
            "sigma": list(self.matching.sigma) if self.matching else None,
            "log_matching_product": self.matching.log_product if self.matching else None,
            "log_scale_product": self.scaling.log_scale_product if self.scaling else 0.0,
        }


def _zero_result(n: int) -> ApproxResult:
    return ApproxResult(
        lo=0.0, hi=0.0, log_lo=-math.inf, log_hi=-math.inf, case=ZERO, matching=None, small_n=n < 5
    )


def small_case_log_upper(n: int) -> float:
    """``ln 2^((q0 - 1) n)`` with ``q0 = 1/p_zero(n)``."""
    if n < 2:
        return 0.0
    q0 = 1.0 / p_zero(n)
    return (q0 - 1.0) * n * LOG2


def approximate_permanent_ds(b, tol: float = 1e-6) -> ApproxResult:
    """Certified interval for the permanent of a doubly stochastic matrix."""
    b = nonneg_matrix(b)
    n = b.shape[0]
    if not is_doubly_stochastic(b, tol):
        raise NotStochasticError("input must be doubly stochastic within tolerance")
    match = max_product_matching(b)
    if match.log_product == -math.inf:
        return _zero_result(n)
    log_pi = match.log_product
    log_lo = max(log_pi, log_vdw_lower(n))
    if log_pi >= -n * LOG2:
        case, log_hi = LARGE_MATCHING, 0.0
    else:
        # every permutation product is below 2^-n, so
        # per(B) <= 2^((q0-1)n) per(B^q0) <= 2^((q0-1)n)
        case, log_hi = SMALL_MATCHING, min(0.0, small_case_log_upper(n))
    log_lo = min(log_lo, log_hi)
    return ApproxResult(
        lo=math.exp(log_lo),
        hi=math.exp(log_hi),
        log_lo=log_lo,
        log_hi=log_hi,
        case=case,
        matching=match,
        small_n=n < 5,
    )


def approximate_permanent(m, tol: float = 1e-8, max_iters: int = 100_000) -> ApproxResult:
    """Certified interval for the permanent of an arbitrary nonnegative matrix.

    The doubly stochastic interval is unscaled by ``exp(-log_scale_product)``
    and widened by ``exp(+-n * residual)`` to absorb the Sinkhorn residual.
    Raises ConvergenceError if scaling does not reach ``tol``.
    """
    m = nonneg_matrix(m)
    n = m.shape[0]
    if not support_has_perfect_matching(m):
        return _zero_result(n)
    scaling = sinkhorn_scale(m, tol=tol, max_iters=max_iters)
    if not scaling.converged:
        raise ConvergenceError(
            f"Sinkhorn residual {scaling.residual:.3e} above tol {tol:.1e} "
            f"after {scaling.iterations} iterations",
            result=scaling,
        )
    ds = approximate_permanent_ds(scaling.scaled, tol=max(1e-6, 10 * tol))
    slack = n * scaling.residual
    log_lo = ds.log_lo - scaling.log_scale_product - slack
    log_hi = ds.log_hi - scaling.log_scale_product + slack
    return ApproxResult(
        lo=math.exp(log_lo),
        hi=math.exp(log_hi),
        log_lo=log_lo,
        log_hi=log_hi,
        case=ds.case,
        matching=ds.matching,
        scaling=scaling,
        residual=scaling.residual,
        small_n=n < 5,
    )


def worst_case_log_factor(n: int) -> tuple[float, float]:
    """``(log worst-case factor, log n^n/n!)`` for dimension n.

    The worst case is the larger of ``2^n`` (large matching) and
    ``(n^n/n!) 2^((q0-1)n)`` (small matching).
    """
    log_bare = n * math.log(n) - log_factorial(n)
    log_factor = max(n * LOG2, log_bare + small_case_log_upper(n))
    return log_factor, log_bare


def guarantee_curve(n_from: int, n_to: int) -> list[dict]:
    """Worst-case approximation factor against the bare ``n^n/n!`` per n."""
    if not 2 <= n_from <= n_to:
        raise ValueError("need 2 <= n_from <= n_to")
    rows = []
    for n in range(n_from, n_to + 1):
        log_factor, log_bare = worst_case_log_factor(n)
        rows.append(
            {
                "n": n,
                "log_factor": log_factor,
                "log_bare": log_bare,
                "log_improvement": log_bare - log_factor,
                "factor": math.exp(log_factor) if log_factor < 700 else math.inf,
            }
        )
    return rows
