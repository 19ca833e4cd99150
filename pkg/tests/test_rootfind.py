import math

import pytest
from scipy.optimize import brentq

from bounded_mm.errors import InvalidParameter, SolverFailure
from bounded_mm.rootfind import SolverConfig, expand_bracket, newton_bisect


def _with_slope(f, df):
    return lambda x: (f(x), df(x))


@pytest.mark.parametrize("f, df, lo, hi", [
    (lambda x: x**3 - 2 * x - 5, lambda x: 3 * x**2 - 2, 2.0, 3.0),
    (lambda x: math.exp(x) - 10.0, math.exp, -5.0, 10.0),
    (lambda x: math.atan(x - 1.3), lambda x: 1 / (1 + (x - 1.3) ** 2), -50.0, 80.0),
    (lambda x: math.log(x) + x, lambda x: 1 / x + 1, 1e-6, 5.0),
])
def test_agrees_with_brent(f, df, lo, hi):
    want = brentq(f, lo, hi, xtol=1e-15, rtol=1e-15)
    assert newton_bisect(_with_slope(f, df), lo, hi) == pytest.approx(want, rel=1e-11, abs=1e-12)


def test_bad_slope_falls_back_to_bisection():
    f = lambda x: x - 0.3
    got = newton_bisect(lambda x: (f(x), math.nan), 0.0, 1.0)
    assert got == pytest.approx(0.3, abs=1e-11)


def test_endpoint_values_can_be_supplied():
    # f cannot be evaluated at the left end
    func = _with_slope(lambda x: math.log(x) - 1.0, lambda x: 1 / x)
    assert newton_bisect(func, 0.0, 10.0, f_lo=-math.inf) == pytest.approx(math.e, rel=1e-12)


def test_no_sign_change_fails():
    with pytest.raises(SolverFailure):
        newton_bisect(_with_slope(lambda x: x * x + 1, lambda x: 2 * x), -1.0, 1.0)


def test_empty_bracket_fails():
    with pytest.raises(SolverFailure):
        newton_bisect(_with_slope(lambda x: x, lambda x: 1.0), 1.0, 1.0)


def test_iteration_budget_is_enforced():
    cfg = SolverConfig(max_iter=2)
    with pytest.raises(SolverFailure):
        newton_bisect(lambda x: (x - 0.123456789, math.nan), 0.0, 1.0, cfg)


def test_expand_bracket_walks_until_sign_flips():
    x = expand_bracket(lambda x: x - 100.0, 0.0, 1.0, +1.0, want_positive=True)
    assert x > 100.0


def test_expand_bracket_gives_up():
    with pytest.raises(SolverFailure):
        expand_bracket(lambda x: -1.0, 0.0, 1.0, +1.0, True, SolverConfig(max_iter=5))


@pytest.mark.parametrize("kwargs", [
    {"rel_tol": 0.0}, {"abs_tol": -1.0}, {"max_iter": 0}, {"bracket_growth": 1.0},
])
def test_config_validation(kwargs):
    with pytest.raises(InvalidParameter):
        SolverConfig(**kwargs)


def test_config_round_trip():
    cfg = SolverConfig(1e-10, 1e-9, 50, 3.0)
    assert SolverConfig.from_dict(cfg.to_dict()) == cfg
