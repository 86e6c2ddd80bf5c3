import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from permbounds import scaling
from permbounds.errors import ZeroPermanentError
from permbounds.exact import permanent_ryser
from permbounds.matrix import is_doubly_stochastic


def brute_best(m):
    # lexicographically smallest permutation among those with max product
    n = len(m)
    best, best_s = -math.inf, None
    for s in itertools.permutations(range(n)):
        v = math.prod(m[i][s[i]] for i in range(n))
        if v > best * (1 + 1e-12) or (best_s is None):
            best, best_s = v, s
    return best, best_s


def test_sinkhorn_positive():
    rng = np.random.default_rng(0)
    m = rng.random((5, 5)) + 0.01
    res = scaling.sinkhorn_scale(m, tol=1e-10)
    assert res.converged and res.residual <= 1e-10
    assert is_doubly_stochastic(res.scaled, 1e-9)
    rebuilt = res.row_scale[:, None] * m * res.col_scale[None, :]
    assert np.allclose(rebuilt, res.scaled, rtol=1e-12)
    # per(scaled) = per(m) * prod(scales)
    assert math.log(permanent_ryser(res.scaled)) == pytest.approx(
        math.log(permanent_ryser(m)) + res.log_scale_product, abs=1e-8
    )


def test_sinkhorn_ds_input_is_fixed():
    m = np.full((4, 4), 0.25)
    res = scaling.sinkhorn_scale(m)
    assert res.converged and np.allclose(res.scaled, m)
    assert res.log_scale_product == pytest.approx(0.0, abs=1e-14)


def test_sinkhorn_no_matching():
    with pytest.raises(ZeroPermanentError):
        scaling.sinkhorn_scale([[1.0, 1.0], [0.0, 0.0]])


def test_sinkhorn_reports_nonconvergence():
    # support with a perfect matching but not total support: converges slowly
    m = np.array([[1.0, 1.0], [0.0, 1.0]])
    res = scaling.sinkhorn_scale(m, tol=1e-14, max_iters=50)
    assert not res.converged
    assert res.iterations == 50


def test_support_matching():
    assert scaling.support_has_perfect_matching(np.eye(3))
    assert not scaling.support_has_perfect_matching([[1, 1, 0], [1, 1, 0], [1, 1, 0]])


@given(st.integers(1, 6).flatmap(lambda n: arrays(np.float64, (n, n), elements=st.sampled_from([0.0, 0.5, 1.0, 2.0, 3.0]))))
@settings(max_examples=150, deadline=None)
def test_matching_matches_brute_force(m):
    res = scaling.max_product_matching(m)
    best, sigma = brute_best(m.tolist())
    if best == 0:
        assert res.log_product == -math.inf
        return
    assert res.product == pytest.approx(best, rel=1e-12)
    assert res.sigma == sigma


@given(st.integers(2, 7).flatmap(lambda n: arrays(np.float64, (n, n), elements=st.floats(1e-3, 1e3))))
@settings(max_examples=60, deadline=None)
def test_matching_value_random(m):
    res = scaling.max_product_matching(m)
    best, _ = brute_best(m.tolist())
    assert res.product == pytest.approx(best, rel=1e-10)


def test_matching_ties_prefer_identity():
    res = scaling.max_product_matching(np.ones((4, 4)))
    assert res.sigma == (0, 1, 2, 3)
    assert res.to_dict()["sigma"] == [0, 1, 2, 3]
