import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permbounds import bounds, verify


def grid_max_P_k3(q, m=1414):
    # dense barycentric grid (~10^6 points) over the 3-simplex, fully vectorized
    i, j = np.meshgrid(np.arange(m + 1), np.arange(m + 1), indexing="ij")
    keep = i + j <= m
    y = np.stack([i[keep], j[keep], m - i[keep] - j[keep]]) / m
    c = (1 - y) ** q
    s = y**q * np.stack([c[1] * c[2], c[0] * c[2], c[0] * c[1]])
    return float(s.sum(axis=0).max())


def per_omega_2(p, m=2001):
    # each row (cos t, sin t) rescaled to unit l_p; per = a_s b_t + b_s a_t
    t = np.linspace(0, math.pi / 2, m)
    a, b = np.cos(t), np.sin(t)
    nrm = (a**p + b**p) ** (1 / p)
    a, b = a / nrm, b / nrm
    return float((a[:, None] * b[None, :] + b[:, None] * a[None, :]).max())


def test_P_small_values():
    # P((1/2, 1/2), 0.6) = 2 (1/2)^1.2
    assert verify.P_of_y([0.5, 0.5], 0.6) == pytest.approx(2 * 0.5**1.2, rel=1e-14)
    assert verify.P_of_y([1.0, 0.0, 0.0], 0.7) == 1.0


@pytest.mark.parametrize("p", [1.2, 1.6, 1.9, 1.99])
def test_simplex_max_against_grid(p):
    q = 1 / p
    _, v = verify.maximize_P_simplex(3, q, restarts=16)
    assert v >= grid_max_P_k3(q) - 1e-12
    assert v == pytest.approx(bounds.w_closed_form(3, p), abs=1e-9)


def test_project_simplex():
    y = verify.project_simplex(np.array([2.0, -1.0, 0.5]))
    assert y.sum() == pytest.approx(1.0) and np.all(y >= 0)
    assert np.allclose(verify.project_simplex(np.array([0.2, 0.3, 0.5])), [0.2, 0.3, 0.5])


def test_classify():
    assert verify.classify_simplex_point([1.0, 0.0])[0] == verify.BASIS
    assert verify.classify_simplex_point([1 / 3] * 3)[0] == verify.UNIFORM
    assert verify.classify_simplex_point([0.6, 0.3, 0.1])[0] == verify.INTERIOR


@pytest.mark.parametrize("k, p", [(2, 1.5), (4, 1.9), (5, 1.3), (6, 1.99)])
def test_check_wkp(k, p):
    r = verify.check_wkp(k, p, restarts=16)
    assert r.passed and not r.informational


@given(st.floats(0.51, 0.99))
def test_theta_stationary_point(q):
    x = verify.theta_stationary_point(q)
    assert x * math.log(x / (x - 1)) == pytest.approx(1 / q, rel=1e-10)


def test_grid_checks_spot():
    assert verify.check_theta_endpoint(10, 0.6).passed
    r = verify.check_one_var_endpoint(10, 0.6)
    assert r.passed and abs(r.values["h_at_1_over_k"]) < 1e-10
    with pytest.raises(ValueError):
        verify.check_one_var_endpoint(2, 0.6)


@given(st.integers(3, 12), st.floats(0.51, 0.99), st.floats(0.0, 1.0))
def test_one_var_f_is_P_on_the_family(k, q, t):
    x = 1 / k + t * (1 - 1 / k)
    y = np.r_[x, np.full(k - 1, (1 - x) / (k - 1))]
    assert verify.one_var_f(x, k, q) == pytest.approx(verify.P_of_y(y / y.sum(), q), rel=1e-10)


@pytest.mark.parametrize("p", [1.1, 1.5, 1.9])
def test_omega_search_n2_matches_grid(p):
    _, v = verify.maximize_permanent_omega(2, p, restarts=8)
    assert v == pytest.approx(max(1.0, per_omega_2(p)), abs=1e-6)


@pytest.mark.parametrize("n, p", [(2, 1.5), (3, 1.2), (3, 1.7), (3, 2.5)])
def test_check_conjecture_proven_regimes(n, p):
    r = verify.check_conjecture(n, p, restarts=8)
    assert r.passed and not r.informational


def test_check_conjecture_open_interval_is_informational():
    r = verify.check_conjecture(3, 1.9, restarts=8)
    assert r.informational
    assert r.reference["u_lower"] - 1e-6 <= r.values["searched_max"] <= r.reference["u_upper_product"] + 1e-6


def test_random_checks():
    assert verify.check_proposition_random(4, trials=50).passed
    assert verify.check_baum_random(3, 0.6, trials=20).passed
    r = verify.check_minc_random(3, trials=50)
    assert r.informational


def test_distance_to_permutation():
    assert verify.distance_to_permutation(np.eye(3)[[2, 0, 1]]) == 0.0
    assert verify.distance_to_permutation(np.ones((2, 2))) == math.inf


def test_wkp_p_grid_pulls_boundary():
    assert verify.wkp_p_grid(2)[3] == 2 - 1e-6
    assert verify.wkp_p_grid(3)[3] == bounds.p_zero(3)


def test_suite_is_deterministic_and_parallel_safe():
    a = verify.run_suite("prop", seed=5)
    b = verify.run_suite("prop", seed=5, jobs=2)
    assert [r.to_dict() for r in a] == [r.to_dict() for r in b]
    with pytest.raises(ValueError):
        verify.suite_tasks("nope")
