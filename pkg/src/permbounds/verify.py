"""Numerical verification harness for the permanent bounds.

Each ``check_*`` function returns a :class:`VerifyReport`.  Checks never
raise on a failed inequality; they report a margin (positive means the claim
holds with room to spare) and pass iff ``margin >= -tolerance``.  Reports of
open conjectures are marked ``informational`` and do not count as failures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import xlogy

from . import bounds
from .ascent import ascent_value, baum_eagon_step
from .exact import permanent_minors, permanent_ryser
from .matrix import lp_norm, simplex_point

BASIS = "basis"
UNIFORM = "uniform"
INTERIOR = "interior"


@dataclass(frozen=True)
class VerifyReport:
    check_name: str
    parameters: dict
    values: dict
    reference: dict
    margin: float
    tolerance: float = 0.0
    informational: bool = False
    notes: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return bool(self.margin >= -self.tolerance)

    @property
    def failed_proven(self) -> bool:
        return not self.passed and not self.informational

    def to_dict(self) -> dict:
        return {
            "check_name": self.check_name,
            "parameters": self.parameters,
            "values": self.values,
            "reference": self.reference,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "informational": self.informational,
            "notes": list(self.notes),
        }


# -- P(y) on the simplex ------------------------------------------------------


def _s_terms(y: np.ndarray, q: float) -> np.ndarray:
    # s_i = y_i^q prod_{j != i} (1 - y_j)^q, each term in log space
    k = y.size
    with np.errstate(divide="ignore"):
        log_y = np.log(y)
        log_1my = np.log1p(-np.minimum(y, 1.0))
    others = np.tile(log_1my, (k, 1))
    np.fill_diagonal(others, 0.0)
    return np.exp(q * (log_y + others.sum(axis=1)))


def P_of_y(y, q: float) -> float:
    """``P(y) = sum_i y_i^q prod_{j != i} (1 - y_j)^q`` on the simplex."""
    y = simplex_point(y)
    return math.fsum(_s_terms(y, q))


def _P_fast(y: np.ndarray, q: float) -> float:
    return float(_s_terms(y, q).sum())


def _grad_P(y: np.ndarray, q: float) -> np.ndarray:
    yc = np.clip(y, 1e-12, 1 - 1e-12)
    s = _s_terms(yc, q)
    total = s.sum()
    return q * s / yc - q * (total - s) / (1 - yc)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = np.count_nonzero(u - css / ind > 0)
    tau = css[rho - 1] / rho
    return np.maximum(v - tau, 0.0)


def _ascend_simplex(y, q, max_iters=500, halvings=40):
    val = _P_fast(y, q)
    for _ in range(max_iters):
        g = _grad_P(y, q)
        g = g - g.mean()
        step = 0.5
        for _ in range(halvings):
            cand = project_simplex(y + step * g)
            cv = _P_fast(cand, q)
            if cv > val:
                break
            step *= 0.5
        else:
            break
        gain = cv - val
        y, val = cand, cv
        if gain <= 1e-15 * max(1.0, val):
            break
    return y, val


def _one_var_point(x: float, k: int) -> np.ndarray:
    y = np.full(k, (1.0 - x) / (k - 1))
    y[0] = x
    return y


def maximize_P_simplex(k: int, q: float, restarts: int = 64, seed: int = 0, grid: int = 2001):
    """Numerically maximize P over the k-simplex.

    Candidates, in tie-break order: the basis vectors, the uniform vector,
    the best point of the one-parameter family ``(x, (1-x)/(k-1), ...)``,
    and ``restarts`` projected-gradient ascents from seeded random points.
    Returns ``(y, value)`` for the first candidate attaining the max.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    if k == 1:
        return np.ones(1), 1.0

    candidates = []
    for i in range(k):
        e = np.zeros(k)
        e[i] = 1.0
        candidates.append(e)
    candidates.append(np.full(k, 1.0 / k))

    xs = np.linspace(0.0, 1.0, grid)
    vals = np.array([_P_fast(_one_var_point(x, k), q) for x in xs])
    i_best = int(np.argmax(vals))
    lo, hi = xs[max(i_best - 1, 0)], xs[min(i_best + 1, grid - 1)]
    res = minimize_scalar(
        lambda x: -_P_fast(_one_var_point(x, k), q),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12},
    )
    x_best = res.x if -res.fun > vals[i_best] else xs[i_best]
    candidates.append(_one_var_point(x_best, k))

    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        y0 = rng.dirichlet(np.ones(k))
        candidates.append(_ascend_simplex(y0, q)[0])

    best_y, best_v = None, -math.inf
    for y in candidates:
        v = _P_fast(y, q)
        if v > best_v:
            best_y, best_v = y, v
    return best_y, P_of_y(best_y, q)


def classify_simplex_point(y, tol: float = 1e-4) -> tuple[str, float]:
    """Nearest of {basis vector, uniform vector} and its l_inf distance."""
    y = np.asarray(y, dtype=np.float64)
    k = y.size
    e = np.zeros(k)
    e[int(np.argmax(y))] = 1.0
    d_basis = float(np.abs(y - e).max())
    d_unif = float(np.abs(y - 1.0 / k).max())
    if d_basis <= d_unif:
        kind, d = BASIS, d_basis
    else:
        kind, d = UNIFORM, d_unif
    return (kind if d <= tol else INTERIOR), min(d_basis, d_unif)


def _clusters(values: np.ndarray, gap: float) -> list[np.ndarray]:
    order = np.sort(values)
    splits = np.flatnonzero(np.diff(order) > gap) + 1
    return np.split(order, splits)


def check_wkp(k: int, p: float, tol: float = 1e-5, restarts: int = 64, seed: int = 0) -> VerifyReport:
    """Numeric max of P over the simplex against ``max(1, theta(k, 1/p))``."""
    q = 1.0 / p
    y, value = maximize_P_simplex(k, q, restarts=restarts, seed=seed)
    ref = bounds.w_closed_form(k, p)
    kind, dist = classify_simplex_point(y)
    margins = [tol - abs(value - ref), 1e-4 - dist]
    notes = []
    values = {"numeric_w": value, "argmax_kind": kind, "argmax_distance": dist}

    if float(np.min(y)) > 1e-4:
        # interior maximizer: first-order structure
        s = _s_terms(y, q)
        stat = float(np.abs(s - y * value).max())
        values["stationarity_residual"] = stat
        margins.append(1e-6 - stat)
        groups = _clusters(y, 1e-5)
        values["distinct_values"] = len(groups)
        if len(groups) == 2:
            a, b = float(groups[0].mean()), float(groups[1].mean())
            values.update(a=a, b=b, count_b=int(groups[1].size))
            margins.append(min(1 - q - a, b - (1 - q)))
            margins.append(0.0 if groups[1].size == 1 else -1.0)
        elif len(groups) > 2:
            notes.append("more than two distinct coordinate values")
            margins.append(-1.0)

    return VerifyReport(
        check_name="wkp",
        parameters={"k": k, "p": p, "restarts": restarts, "seed": seed},
        values=values,
        reference={"w_closed_form": ref, "theta": bounds.theta(k, q)},
        margin=float(min(margins)),
        notes=tuple(notes),
    )


# -- endpoint grid checks ------------------------------------------------------


def log_theta_continuous(x, q: float):
    """``ln x - q (x ln x - (x-1) ln(x-1))`` on ``x >= 1`` (vectorized)."""
    x = np.asarray(x, dtype=np.float64)
    return np.log(x) - q * (xlogy(x, x) - xlogy(x - 1, x - 1))


def theta_stationary_point(q: float) -> float:
    """The unique ``x_q > 1`` with ``x ln(x/(x-1)) = 1/q``."""
    g = lambda x: x * math.log1p(1.0 / (x - 1.0)) - 1.0 / q  # noqa: E731
    lo, hi = 1.0 + 1e-12, 2.0
    while g(hi) > 0:
        hi *= 2
    return brentq(g, lo, hi, xtol=1e-14, rtol=1e-14)


def check_theta_endpoint(k: int, q: float, grid_points: int = 10_000) -> VerifyReport:
    """theta(x) on [1, k] peaks at an endpoint and is unimodal (down, then up)."""
    xs = np.linspace(1.0, float(k), grid_points)
    th = np.exp(log_theta_continuous(xs, q))
    end_max = max(th[0], th[-1])
    interior = float(th[1:-1].max()) if grid_points > 2 else -math.inf
    d = np.diff(th)
    sig = np.sign(np.where(np.abs(d) <= 1e-15 * np.abs(th[1:]), 0.0, d))
    nz = sig[sig != 0]
    sign_changes = int(np.count_nonzero(np.diff(nz) != 0))
    downs_then_ups = sign_changes == 0 or (sign_changes == 1 and nz[0] < 0)

    xq = theta_stationary_point(q)
    i_min = int(np.argmin(th))
    h = (k - 1.0) / (grid_points - 1)
    expected_min = min(xq, float(k))
    loc_err = abs(xs[i_min] - expected_min)
    margins = [end_max + 1e-12 - interior, 0.0 if downs_then_ups else -1.0, 2 * h - loc_err]
    return VerifyReport(
        check_name="theta",
        parameters={"k": k, "q": q, "grid_points": grid_points},
        values={"interior_max": interior, "sign_changes": sign_changes, "grid_argmin": float(xs[i_min])},
        reference={"endpoint_max": float(end_max), "x_q": xq},
        margin=float(min(margins)),
    )


def one_var_f(x, k: int, q: float):
    """``f(x) / (k-1)^((k-1)q)``: P restricted to ``(x, (1-x)/(k-1), ...)``."""
    x = np.asarray(x, dtype=np.float64)
    base = (k - 1) * q * math.log(k - 1)
    with np.errstate(divide="ignore"):
        t1 = np.exp(q * np.log(x) + (k - 1) * q * np.log(k - 2 + x) - base)
        t2 = (k - 1) * np.exp(2 * q * np.log1p(-x) + (k - 2) * q * np.log(k - 2 + x) - base)
    return t1 + t2


def one_var_h(x, k: int, q: float):
    """``(k-2+x) - (k-1)^(1/q) x^(1/q-1) (1-x)^(2-1/q)``, whose sign is that of f'."""
    x = np.asarray(x, dtype=np.float64)
    return (k - 2 + x) - (k - 1) ** (1 / q) * x ** (1 / q - 1) * (1 - x) ** (2 - 1 / q)


def check_one_var_endpoint(k: int, q: float, grid_points: int = 10_000) -> VerifyReport:
    """f on [1/k, 1] peaks at an endpoint; h is convex with ``h(1/k) = 0``."""
    if k < 3:
        raise ValueError("k must be >= 3")
    xs = np.linspace(1.0 / k, 1.0, grid_points)
    f = one_var_f(xs, k, q)
    end_max = max(f[0], f[-1])
    interior = float(f[1:-1].max())

    h = one_var_h(xs, k, q)
    second = h[2:] - 2 * h[1:-1] + h[:-2]
    slack = 64 * np.finfo(float).eps * (k - 1) ** (1 / q)
    convex_margin = float(second.min() + slack)
    h0 = float(one_var_h(1.0 / k, k, q))
    margins = [end_max + 1e-12 - interior, convex_margin, 1e-10 - abs(h0)]
    return VerifyReport(
        check_name="onevar",
        parameters={"k": k, "q": q, "grid_points": grid_points},
        values={"interior_max": interior, "min_second_difference": float(second.min()), "h_at_1_over_k": h0},
        reference={"endpoint_max": float(end_max), "h(1)": float(k - 1)},
        margin=float(min(margins)),
    )


# -- permanent over unit l_p rows ---------------------------------------------


def _normalize_rows(m: np.ndarray, p: float) -> np.ndarray:
    norms = np.array([lp_norm(r, p) for r in m])
    return m / norms[:, None]


def _ascend_omega(m, p, max_iters=300, halvings=40):
    val = permanent_ryser(m)
    for _ in range(max_iters):
        g = permanent_minors(m, skip_zero=False)
        step = 0.5
        for _ in range(halvings):
            cand = _normalize_rows(np.maximum(m + step * g, 0.0), p)
            cv = permanent_ryser(cand)
            if cv > val:
                break
            step *= 0.5
        else:
            break
        gain = cv - val
        m, val = cand, cv
        if gain <= 1e-14 * val:
            break
    return m, val


def maximize_permanent_omega(n: int, p: float, restarts: int = 64, seed: int = 0):
    """Heuristic max of the permanent over nonnegative matrices with unit l_p rows.

    Candidates: I, ``n^(-1/p) J`` and ``restarts`` projected-gradient ascents
    (gradient ``d per / d a_ij = per(minor ij)``).  Returns ``(matrix, value)``.
    """
    if not 2 <= n <= 4:
        raise ValueError("maximize_permanent_omega supports 2 <= n <= 4")
    candidates = [np.eye(n), np.full((n, n), n ** (-1.0 / p))]
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        m0 = _normalize_rows(rng.random((n, n)) + 1e-3, p)
        candidates.append(_ascend_omega(m0, p)[0])
    best, best_v = None, -math.inf
    for m in candidates:
        v = permanent_ryser(m)
        if v > best_v:
            best, best_v = m, v
    return best, best_v


def distance_to_permutation(m) -> float:
    """l_inf distance from m to the nearest permutation matrix (row-argmax based)."""
    m = np.asarray(m)
    n = m.shape[0]
    cols = np.argmax(m, axis=1)
    if len(set(cols.tolist())) < n:
        return math.inf
    return float(np.abs(m - np.eye(n)[cols]).max())


def check_conjecture(n: int, p: float, restarts: int = 64, seed: int = 0) -> VerifyReport:
    """Searched maximum over unit l_p rows against the bounds.

    Hard check where the answer is proven (``p <= p_zero(n)``: the max is 1 at
    a permutation matrix; ``p >= 2``: the max is the uniform value);
    informational sandwich check in between.
    """
    m, value = maximize_permanent_omega(n, p, restarts=restarts, seed=seed)
    lower = bounds.u_lower(n, p)
    regime = bounds.regime(n, p)
    values = {"searched_max": value, "distance_to_permutation": distance_to_permutation(m)}
    reference = {"u_lower": lower, "regime": regime}
    if regime == bounds.IDENTITY_OPTIMAL:
        dist = values["distance_to_permutation"]
        if bounds.log_per_uniform(n, p) >= -1e-12:
            # at p = p_c (n = 2, p = 2) the uniform matrix ties with I
            dist = min(dist, float(np.abs(m - n ** (-1.0 / p)).max()))
        margins = [1 + 1e-6 - value, 1e-3 - dist]
        informational = False
    elif regime == bounds.UNIFORM_OPTIMAL:
        margins = [lower + 1e-6 - value]
        informational = False
    else:
        upper = bounds.u_upper_product(n, p)
        reference["u_upper_product"] = upper
        margins = [upper + 1e-6 - value, value - (lower - 1e-6)]
        informational = True
    return VerifyReport(
        check_name="conjecture",
        parameters={"n": n, "p": p, "restarts": restarts, "seed": seed},
        values=values,
        reference=reference,
        margin=float(min(margins)),
        informational=informational,
    )


# -- randomized inequality checks ---------------------------------------------


def random_stochastic(n: int, rng: np.random.Generator) -> np.ndarray:
    """Row-stochastic matrix with independent Dirichlet(1) rows."""
    return rng.dirichlet(np.ones(n), size=n)


def _trial_matrices(n, trials, seed):
    rng = np.random.default_rng(seed)
    yield np.eye(n)
    for _ in range(trials - 1):
        yield random_stochastic(n, rng)


def check_proposition_random(n: int, trials: int = 1000, seed: int = 0, tol: float | None = None) -> VerifyReport:
    """``per(A^(1/p_zero(n))) <= 1`` for random stochastic A (trial 0 is I)."""
    if tol is None:
        tol = 1e-12 * n
    vals = [bounds.prop_value(a) for a in _trial_matrices(n, trials, seed)]
    return VerifyReport(
        check_name="prop",
        parameters={"n": n, "trials": trials, "seed": seed},
        values={"max_value": max(vals), "identity_value": vals[0]},
        reference={"bound": 1.0, "p_zero": bounds.p_zero(n)},
        margin=1.0 - max(vals),
        tolerance=tol,
    )


def check_baum_random(n: int, q: float, trials: int = 500, seed: int = 0, tol: float = 1e-11) -> VerifyReport:
    """One ascent step never lowers ``Per(lambda^q)`` (trial 0 is I)."""
    worst = math.inf
    flat_moves = 0.0
    for lam in _trial_matrices(n, trials, seed):
        v0 = ascent_value(lam, q)
        nxt = baum_eagon_step(lam, q)
        v1 = ascent_value(nxt, q)
        worst = min(worst, (v1 - v0) / v0)
        if abs(v1 - v0) <= 1e-12 * v0:
            flat_moves = max(flat_moves, float(np.abs(nxt - lam).max()))
    return VerifyReport(
        check_name="baum",
        parameters={"n": n, "q": q, "trials": trials, "seed": seed},
        values={"worst_relative_gain": worst, "max_move_when_flat": flat_moves},
        reference={"bound": 0.0},
        margin=min(worst, 1e-9 - flat_moves),
        tolerance=tol,
    )


def check_minc_random(n: int, trials: int = 1000, seed: int = 0) -> VerifyReport:
    """Probe ``per(phi(A)) <= 1``; an open conjecture, so informational only."""
    vals = [bounds.minc_gen_value(a) for a in _trial_matrices(n, trials, seed)]
    return VerifyReport(
        check_name="minc",
        parameters={"n": n, "trials": trials, "seed": seed},
        values={"max_value": max(vals)},
        reference={"bound": 1.0},
        margin=1.0 - max(vals),
        tolerance=1e-9,
        informational=True,
    )


# -- suites -------------------------------------------------------------------

WKP_P_VALUES = (1.05, 1.2, 1.4, None, 1.7, 1.9, 1.99)  # None -> p_zero(k)
GRID_Q_VALUES = (0.51, 0.6, 0.75, 0.9, 0.99)


def wkp_p_grid(k: int) -> list[float]:
    """The seven test exponents; p_zero(2) = 2 sits on the boundary and is pulled to 2 - 1e-6."""
    out = []
    for p in WKP_P_VALUES:
        if p is None:
            p = min(bounds.p_zero(k), 2.0 - 1e-6)
        out.append(p)
    return out


def conjecture_p_grid(n: int, points: int = 6) -> list[float]:
    """Exponents from 1.05 up to p_zero(n) (pulled inside 2 at n = 2)."""
    top = min(bounds.p_zero(n), 2.0)
    return [float(p) for p in np.linspace(1.05, top, points)]


def suite_tasks(name: str, seed: int = 0, restarts: int | None = None) -> list[tuple]:
    """``(function, args, kwargs)`` triples for a named suite, in report order."""
    tasks: list[tuple] = []
    wkp_restarts = 64 if restarts is None else restarts
    omega_restarts = 16 if restarts is None else restarts
    if name in ("wkp", "all"):
        for k in range(2, 7):
            for p in wkp_p_grid(k):
                tasks.append((check_wkp, (k, p), {"seed": seed, "restarts": wkp_restarts}))
    if name in ("theta", "all"):
        for k in range(2, 31):
            for q in GRID_Q_VALUES:
                tasks.append((check_theta_endpoint, (k, q), {}))
    if name in ("onevar", "all"):
        for k in range(3, 31):
            for q in GRID_Q_VALUES:
                tasks.append((check_one_var_endpoint, (k, q), {}))
    if name in ("prop", "all"):
        for n in range(2, 9):
            tasks.append((check_proposition_random, (n,), {"trials": 200, "seed": seed + n}))
    if name in ("baum", "all"):
        for n in range(2, 8):
            for q in (0.55, 0.6, 0.75, 0.9):
                tasks.append((check_baum_random, (n, q), {"trials": 25, "seed": seed + n}))
    if name in ("conjecture", "all"):
        for n in (2, 3):
            for p in conjecture_p_grid(n, 4) + [1.9]:
                tasks.append((check_conjecture, (n, p), {"restarts": omega_restarts, "seed": seed}))
    if name in ("minc", "all"):
        for n in range(2, 7):
            tasks.append((check_minc_random, (n,), {"trials": 200, "seed": seed + n}))
    if not tasks:
        raise ValueError(f"unknown suite {name!r}")
    return tasks


def _run_task(task):
    fn, args, kwargs = task
    return fn(*args, **kwargs)


def run_suite(name: str, seed: int = 0, jobs: int = 1, restarts: int | None = None) -> list[VerifyReport]:
    """Run a suite; with ``jobs > 1`` tasks run in worker processes, results keep task order."""
    tasks = suite_tasks(name, seed, restarts)
    if jobs <= 1:
        return [_run_task(t) for t in tasks]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_task, tasks))
