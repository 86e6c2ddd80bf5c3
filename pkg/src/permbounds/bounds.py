"""Closed-form permanent bounds for matrices with unit l_p rows.

Every factorial and power goes through log-gamma and sums of logs; values
are exponentiated only at the boundary.  ``log_*`` variants are exposed for
callers that need to stay in log space (large n).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import gammaln

from .errors import NotStochasticError, ZeroRowError
from .exact import RYSER_MAX_N, permanent_ryser
from .matrix import elementwise_pow, is_stochastic, nonneg_matrix

_EPS = np.finfo(float).eps

IDENTITY_OPTIMAL = "identity_optimal"
UNIFORM_OPTIMAL = "uniform_optimal"
OPEN_INTERVAL = "open_interval"


def _check_n(n, name="n"):
    if int(n) != n or n < 2:
        raise ValueError(f"{name} must be an integer >= 2, got {n!r}")


def _exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def log_factorial(n) -> float:
    return float(gammaln(n + 1.0))


def p_critical(n: int) -> float:
    """The p at which ``n!/n^(n/p) == 1``: ``n ln n / ln n!``."""
    _check_n(n)
    return n * math.log(n) / log_factorial(n)


def p_zero(n: int) -> float:
    """Largest p for which identity optimality is proven for dimension n."""
    _check_n(n)
    # (n ln n - (n-1) ln(n-1)) / ln n, rewritten to avoid cancellation
    return 1.0 + (n - 1) * math.log1p(1.0 / (n - 1)) / math.log(n)


def p_critical_r(r: int) -> float:
    _check_n(r, "r")
    return p_critical(r)


def p_zero_r(r: int) -> float:
    _check_n(r, "r")
    return p_zero(r)


def _check_q(q):
    if not 0 < q <= 1:
        raise ValueError(f"q must lie in (0, 1], got {q!r}")


def log_theta(k, q: float) -> float:
    """``ln theta(k) = ln k - q (k ln k - (k-1) ln(k-1))`` with theta(1) = 1.

    Results within a few ulps of 0 are snapped to exactly 0, so the
    threshold ``theta(n) = 1`` at ``p = p_zero(n)`` survives rounding.
    """
    _check_q(q)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return 0.0
    lk = math.log(k)
    # k ln k - (k-1) ln(k-1) = ln k + (k-1) ln(k/(k-1))
    entropy = lk + (k - 1) * math.log1p(1.0 / (k - 1))
    val = lk - q * entropy
    if abs(val) <= 8 * _EPS * (lk + q * entropy):
        return 0.0
    return val


def theta(k, q: float) -> float:
    """``k * ((k-1)^(k-1) / k^k)^q``, the ratio per(J_k)/per(J_{k-1})."""
    return math.exp(log_theta(k, q))


def _check_open_p(p):
    if not 1 < p < 2:
        raise ValueError(f"p must lie in the open interval (1, 2), got {p!r}")


def w_closed_form(k: int, p: float) -> float:
    """Maximum of P over the k-simplex: ``max(1, theta(k, 1/p))``."""
    _check_open_p(p)
    if k < 1:
        raise ValueError("k must be >= 1")
    return max(1.0, theta(k, 1.0 / p))


def log_per_uniform(n, p: float) -> float:
    """``ln per(n^(-1/p) J) = ln n! - (n/p) ln n``."""
    return log_factorial(n) - n / p * math.log(n)


def u_lower(n: int, p: float) -> float:
    """Trivial lower bound ``max(1, n!/n^(n/p))`` on the maximal permanent."""
    if n < 1 or not p >= 1:
        raise ValueError("need n >= 1 and p >= 1")
    return _exp(max(0.0, log_per_uniform(n, p)))


def log_u_upper_product(n: int, p: float) -> float:
    # log of prod_k max(1, theta(k)): only the positive logs contribute
    q = 1.0 / p
    return math.fsum(max(0.0, log_theta(k, q)) for k in range(1, n + 1))


def u_upper_product(n: int, p: float) -> float:
    """Product bound ``prod_{k<=n} max(1, theta(k, 1/p))``."""
    _check_open_p(p)
    if n < 1:
        raise ValueError("n must be >= 1")
    return _exp(log_u_upper_product(n, p))


def closed_form_factor(p: float) -> float:
    """``exp((p-1)/p * e^(1/(p-1)))``, the worst-case slack of the closed bound."""
    return _exp(log_closed_form_factor(p))


def log_closed_form_factor(p: float) -> float:
    _check_open_p(p)
    return (p - 1) / p * math.exp(1.0 / (p - 1))


def u_upper_closed(n: int, p: float) -> float:
    """Closed-form upper bound ``factor(p) * n!/n^(n/p)``.

    Quoted for ``p_zero(n) <= p < 2``; evaluated on all of (1, 2).  Use
    :func:`closed_form_in_range` to learn whether the claim covers ``p``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return _exp(log_closed_form_factor(p) + log_per_uniform(n, p))


def closed_form_in_range(n: int, p: float) -> bool:
    return n >= 2 and p_zero(n) <= p <= 2


def _log_k_star(q: float) -> int:
    # first k >= 2 with theta(k) >= 1, found by doubling + bisection; valid
    # because theta dips below 1 once and then increases without bound
    if log_theta(2, q) >= 0:
        return 2
    hi = 4
    while log_theta(hi, q) < 0:
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if log_theta(mid, q) < 0:
            lo = mid
        else:
            hi = mid
    return hi


def min_Jk_permanent(p: float, return_log: bool = False):
    """Minimum over k of ``per(J_k) = k!/k^(k/p)``.

    Returns ``(k_star, value)`` where ``k_star`` is the last k whose theta is
    below 1.  With ``return_log`` the value is returned as its logarithm,
    which stays finite when p is close to 1 and the value underflows.
    """
    _check_open_p(p)
    q = 1.0 / p
    k_star = _log_k_star(q) - 1
    logv = log_per_uniform(k_star, p)
    return (k_star, logv) if return_log else (k_star, math.exp(logv))


def vdw_lower(n: int) -> float:
    """``n!/n^n``, the minimum permanent of an n x n doubly stochastic matrix."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.exp(log_vdw_lower(n))


def log_vdw_lower(n: int) -> float:
    return log_factorial(n) - n * math.log(n)


def bregman_bound(m) -> float:
    """Bregman's bound ``prod_i (r_i!)^(1/r_i)`` for a 0-1 matrix."""
    m = nonneg_matrix(m)
    if not np.all((m == 0) | (m == 1)):
        raise ValueError("bregman_bound needs a zero-one matrix")
    r = m.sum(axis=1)
    if np.any(r == 0):
        raise ZeroRowError("zero row: permanent is 0 and the bound is undefined")
    return float(np.exp(np.sum(gammaln(r + 1.0) / r)))


def phi(x):
    """``Gamma(1/x + 1)^(-x)`` on [0, 1] with ``phi(0) = 0``.

    Accepts scalars or arrays.
    """
    x_arr = np.asarray(x, dtype=np.float64)
    if np.any((x_arr < 0) | (x_arr > 1)) or not np.all(np.isfinite(x_arr)):
        raise ValueError("phi is defined on [0, 1]")
    out = np.zeros_like(x_arr)
    pos = x_arr > 0
    xp = x_arr[pos]
    out[pos] = np.exp(-xp * gammaln(1.0 / xp + 1.0))
    return float(out) if out.ndim == 0 else out


def _stochastic_input(m):
    m = nonneg_matrix(m)
    if not is_stochastic(m):
        raise NotStochasticError("matrix rows must sum to 1")
    if m.shape[0] > RYSER_MAX_N:
        raise ValueError(f"n must be <= {RYSER_MAX_N}")
    return m


def minc_gen_value(m) -> float:
    """``per(phi(A))`` for a stochastic A; conjectured to be at most 1."""
    m = _stochastic_input(m)
    return permanent_ryser(phi(m))


def prop_value(m) -> float:
    """``per(A^(1/p_zero(n)))`` entry-wise, which is at most 1 for stochastic A."""
    m = _stochastic_input(m)
    n = m.shape[0]
    if n < 2:
        raise ValueError("prop_value needs n >= 2")
    return permanent_ryser(elementwise_pow(m, 1.0 / p_zero(n)))


@dataclass(frozen=True)
class BoundReport:
    """Lower and upper bounds on the maximal permanent over unit l_p rows.

    Outside (1, 2) the maximum is known exactly (1 at p = 1, the uniform
    value for p >= 2); ``upper_product`` then carries that value and
    ``upper_closed`` is ``inf``.
    """

    n: int
    p: float
    lower: float
    upper_product: float
    upper_closed: float
    regime: str
    closed_in_range: bool

    def to_dict(self) -> dict:
        return asdict(self)


def regime(n: int, p: float) -> str:
    if n < 2 or p <= p_zero(n):
        return IDENTITY_OPTIMAL
    if p >= 2:
        return UNIFORM_OPTIMAL
    return OPEN_INTERVAL


def bound_report(n: int, p: float) -> BoundReport:
    if n < 1 or not p >= 1:
        raise ValueError("need n >= 1 and p >= 1")
    lower = u_lower(n, p)
    if 1 < p < 2:
        upper_product = u_upper_product(n, p)
        upper_closed = u_upper_closed(n, p)
    else:
        upper_product = lower
        upper_closed = math.inf
    return BoundReport(
        n=n,
        p=p,
        lower=lower,
        upper_product=upper_product,
        upper_closed=upper_closed,
        regime=regime(n, p),
        closed_in_range=closed_form_in_range(n, p),
    )
