import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permbounds import ascent
from permbounds.errors import DimensionTooLargeError, NotStochasticError, ZeroPermanentError
from permbounds.matrix import is_stochastic


def dirichlet_rows(n, seed):
    return np.random.default_rng(seed).dirichlet(np.ones(n), size=n)


@given(st.integers(2, 6), st.integers(0, 10**6), st.floats(0.5, 0.99))
@settings(max_examples=60, deadline=None)
def test_step_is_stochastic_and_ascends(n, seed, q):
    lam = dirichlet_rows(n, seed)
    nxt = ascent.baum_eagon_step(lam, q)
    assert is_stochastic(nxt, 1e-12)
    v0, v1 = ascent.ascent_value(lam, q), ascent.ascent_value(nxt, q)
    assert v1 >= v0 * (1 - 1e-11)


def test_zeros_stay_zero():
    lam = np.array([[0.5, 0.5, 0.0], [0.2, 0.3, 0.5], [0.0, 0.4, 0.6]])
    nxt = ascent.baum_eagon_step(lam, 0.7)
    assert nxt[0, 2] == 0.0 and nxt[2, 0] == 0.0


@pytest.mark.parametrize("n", [2, 3, 5])
def test_fixed_points(n):
    for fixed in (np.eye(n), np.full((n, n), 1 / n)):
        assert np.abs(ascent.baum_eagon_step(fixed, 0.6) - fixed).max() <= 1e-12


def test_iterate_converges_and_is_monotone():
    trace = ascent.baum_eagon_iterate(dirichlet_rows(4, 7), 0.6, max_iters=500)
    vals = np.array(trace.values)
    assert np.all(np.diff(vals) >= -1e-11 * vals[:-1])
    assert trace.converged and trace.steps == len(vals) - 1
    assert trace.to_rows()[0] == (0, trace.values[0])


def test_input_checks():
    with pytest.raises(NotStochasticError):
        ascent.baum_eagon_step(np.ones((2, 2)), 0.6)
    with pytest.raises(ZeroPermanentError):
        ascent.baum_eagon_step([[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [0.5, 0.5, 0.0]], 0.6)
    with pytest.raises(ValueError):
        ascent.baum_eagon_step(np.eye(2), 1.5)
    with pytest.raises(DimensionTooLargeError):
        ascent.baum_eagon_step(np.eye(15), 0.6)
