"""Matrix and vector domain helpers: validation, l_p norms, stochasticity, I/O.

Matrices are plain ``numpy.ndarray`` objects of dtype float64.  The
constructors below validate the invariants and hand back read-only copies,
so a matrix that passed validation cannot be mutated behind a caller's back.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    MatrixParseError,
    NegativeEntryError,
    NonSquareError,
    ZeroRowError,
    ZeroVectorError,
)

STOCHASTIC_TOL = 1e-9
UNIT_NORM_TOL = 1e-14
SIMPLEX_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


def nonneg_matrix(a) -> np.ndarray:
    """Validate ``a`` as a square matrix of finite nonnegative reals.

    Raises NonSquareError, NegativeEntryError or ValueError (non-finite).
    """
    try:
        m = np.asarray(a, dtype=np.float64)
    except ValueError as exc:  # ragged nested sequences
        raise NonSquareError(f"matrix rows are ragged: {exc}") from None
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise NonSquareError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    if np.any(m < 0):
        i, j = np.argwhere(m < 0)[0]
        raise NegativeEntryError(f"negative entry {float(m[i, j])!r} at ({i}, {j})")
    return _frozen(m)


def simplex_point(y, tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Validate ``y`` as a stochastic vector (nonnegative, sums to 1)."""
    v = np.asarray(y, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("a simplex point is a non-empty 1-d vector")
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise ValueError("simplex coordinates must be finite and nonnegative")
    if abs(v.sum() - 1.0) > tol:
        raise ValueError(f"simplex coordinates sum to {v.sum()!r}, not 1")
    return _frozen(v)


@dataclass(frozen=True)
class LpRowSpec:
    """An exponent p >= 1; q = 1/p is always derived, never stored."""

    p: float
    q: float = field(init=False, repr=False)

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1, got {self.p!r}")
        object.__setattr__(self, "q", 1.0 / self.p)


def identity(n: int) -> np.ndarray:
    return _frozen(np.eye(n))


def all_ones(n: int) -> np.ndarray:
    return _frozen(np.ones((n, n)))


def uniform_unit_rows(n: int, p: float) -> np.ndarray:
    """``n**(-1/p) * J``: the matrix with identical unit-l_p rows."""
    return _frozen(np.full((n, n), n ** (-1.0 / p)))


# -- parsing / serialization -------------------------------------------------


def parse_matrix(text: str, format: str = "csv") -> np.ndarray:
    """Parse CSV (one row per line, no header) or a JSON ``{"n", "rows"}`` object."""
    if format == "csv":
        rows = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError:
                raise MatrixParseError(f"line {lineno}: cannot parse {line!r}") from None
        declared = None
    elif format in ("structured", "object", "json"):
        try:
            obj = json.loads(text)
            rows = [[float(x) for x in row] for row in obj["rows"]]
            declared = obj.get("n")
        except (ValueError, KeyError, TypeError) as exc:
            raise MatrixParseError(f"malformed structured matrix: {exc}") from None
    else:
        raise ValueError(f"unknown matrix format {format!r}")

    if not rows:
        raise MatrixParseError("no matrix rows found")
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise NonSquareError(f"expected {n} columns in each of {n} rows")
    if declared is not None and declared != n:
        raise NonSquareError(f"declared n={declared} but found {n} rows")
    if any(not math.isfinite(x) for r in rows for x in r):
        raise MatrixParseError("non-finite value in matrix")
    return nonneg_matrix(rows)


def serialize_matrix(m: np.ndarray, format: str = "csv") -> str:
    """Inverse of :func:`parse_matrix`; floats use shortest round-trip repr."""
    m = np.asarray(m, dtype=np.float64)
    rows = [[float(x) for x in row] for row in m]
    if format == "csv":
        buf = io.StringIO()
        for row in rows:
            buf.write(",".join(repr(x) for x in row))
            buf.write("\n")
        return buf.getvalue()
    if format in ("structured", "object", "json"):
        return json.dumps({"n": len(rows), "rows": rows})
    raise ValueError(f"unknown matrix format {format!r}")


# -- norms --------------------------------------------------------------------


def lp_norm(v, p: float) -> float:
    """l_p norm with max-factoring, so huge or tiny entries do not overflow."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p!r}")
    a = np.abs(np.asarray(v, dtype=np.float64))
    if a.size == 0:
        return 0.0
    m = a.max()
    if m == 0.0:
        return 0.0
    if math.isinf(p):
        return float(m)
    if p == 1:
        return float(a.sum())
    return float(m * np.sum((a / m) ** p) ** (1.0 / p))


def normalize_rows_lp(m, p: float) -> tuple[np.ndarray, np.ndarray]:
    """Divide each row by its l_p norm. Returns ``(normalized, norms)``.

    ``per(m) == per(normalized) * prod(norms)`` by row-homogeneity.
    """
    m = nonneg_matrix(m)
    scales = np.array([lp_norm(row, p) for row in m])
    if np.any(scales == 0):
        raise ZeroRowError(f"row {int(np.argmin(scales))} is all zero")
    return _frozen(m / scales[:, None]), _frozen(scales)


def norm_ratio_check(v, p: float, p_prime: float, tol: float = 1e-12) -> tuple[float, bool]:
    """Return ``||v||_p / ||v||_p'`` and whether it lies in ``[1, n^(1/p - 1/p')]``."""
    if not 1 <= p < p_prime:
        raise ValueError("need 1 <= p < p_prime")
    v = np.asarray(v, dtype=np.float64)
    denom = lp_norm(v, p_prime)
    if denom == 0:
        raise ZeroVectorError("norm ratio of the zero vector is undefined")
    ratio = lp_norm(v, p) / denom
    inv_pp = 0.0 if math.isinf(p_prime) else 1.0 / p_prime
    upper = v.size ** (1.0 / p - inv_pp)
    return ratio, bool(1.0 - tol <= ratio <= upper + tol)


# -- stochasticity ------------------------------------------------------------


def is_stochastic(m, tol: float = STOCHASTIC_TOL) -> bool:
    m = np.asarray(m, dtype=np.float64)
    return bool(np.all(m >= 0) and np.all(np.abs(m.sum(axis=1) - 1.0) <= tol))


def is_doubly_stochastic(m, tol: float = STOCHASTIC_TOL) -> bool:
    m = np.asarray(m, dtype=np.float64)
    return is_stochastic(m, tol) and bool(np.all(np.abs(m.sum(axis=0) - 1.0) <= tol))


def elementwise_pow(m, q: float) -> np.ndarray:
    """Entry-wise ``a_ij ** q`` with ``0 ** q == 0`` for q > 0."""
    if not q > 0:
        raise ValueError(f"q must be positive, got {q!r}")
    return _frozen(np.power(nonneg_matrix(m), q))
