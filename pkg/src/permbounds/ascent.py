"""Baum-Eagon ascent for ``Per(lambda^q)`` over row-stochastic matrices.

One step replaces each entry by its share of the row expansion of the
permanent of the entry-wise q-th power:

    new[i, j] = lam[i, j]^q * Per(lam^q with row i, col j removed) / Per(lam^q)

Rows of the result sum to 1 by the expansion identity, and the value
``Per(new^q)`` never drops below ``Per(lam^q)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionTooLargeError, NotStochasticError, ZeroPermanentError
from .exact import permanent_minors, permanent_ryser
from .matrix import elementwise_pow, is_stochastic, nonneg_matrix
from .scaling import support_has_perfect_matching

ASCENT_MAX_N = 14


def ascent_value(lam, q: float) -> float:
    """``Per(lam^q)``."""
    return permanent_ryser(elementwise_pow(lam, q))


def _check_step_input(lam, q):
    lam = nonneg_matrix(lam)
    if not 0 < q <= 1:
        raise ValueError(f"q must lie in (0, 1], got {q!r}")
    if lam.shape[0] > ASCENT_MAX_N:
        raise DimensionTooLargeError(f"ascent supports n <= {ASCENT_MAX_N}")
    if not is_stochastic(lam):
        raise NotStochasticError("ascent needs a row-stochastic matrix")
    if not support_has_perfect_matching(lam):
        raise ZeroPermanentError("Per(lambda^q) = 0: support has no perfect matching")
    return lam


def baum_eagon_step(lam, q: float) -> np.ndarray:
    """One ascent step; zero entries stay exactly zero."""
    lam = _check_step_input(lam, q)
    if lam.shape[0] == 1:
        return lam
    lq = elementwise_pow(lam, q)
    total = permanent_ryser(lq)
    if total == 0:
        raise ZeroPermanentError("Per(lambda^q) evaluated to 0")
    out = lq * permanent_minors(lq) / total
    out.setflags(write=False)
    return out


@dataclass
class AscentTrace:
    q: float
    iterates: list = field(default_factory=list)
    values: list = field(default_factory=list)
    converged: bool = False

    @property
    def steps(self) -> int:
        return len(self.iterates) - 1

    def to_rows(self) -> list[tuple[int, float]]:
        return list(enumerate(self.values))


def baum_eagon_iterate(lam0, q: float, max_iters: int = 100, stop_tol: float = 1e-12) -> AscentTrace:
    """Apply :func:`baum_eagon_step` until the value is flat (relative ``stop_tol``)."""
    lam = _check_step_input(lam0, q)
    trace = AscentTrace(q=q, iterates=[lam], values=[ascent_value(lam, q)])
    for _ in range(max_iters):
        lam = baum_eagon_step(lam, q)
        value = ascent_value(lam, q)
        prev = trace.values[-1]
        trace.iterates.append(lam)
        trace.values.append(value)
        if abs(value - prev) <= stop_tol * prev:
            trace.converged = True
            break
    return trace
