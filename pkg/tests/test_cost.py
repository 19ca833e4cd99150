import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bounded_mm.core import MarketState, wealth_from_state
from bounded_mm.cost import (
    LMSR,
    ExpUtilityCost,
    ImplicitCost,
    LogUtility2,
    QuadraticCost,
    cost,
    cost_function_from_dict,
    expected_utility,
    implicit_cost_solve,
    implicit_wealth_solve,
    initial_k,
    move_to_belief,
    own_price_slope,
    prices,
    trade,
)
from bounded_mm.errors import DomainViolation, MarketResolved, PriceOutOfRange, Unattainable
from bounded_mm.utility import Hara, Linear, LogShift, NegExp, risk_neutral_prices

PI3 = (0.2, 0.3, 0.5)


def _makers():
    return [
        LMSR(100.0, 3),
        QuadraticCost(50.0, 2),
        LogUtility2(50.0),
        ExpUtilityCost(0.02, PI3),
        ImplicitCost(LogShift(30.0), PI3, math.log(30.0)),
        ImplicitCost(Hara(2.0, 0.05, 1.0), (0.5, 0.5), initial_k(Hara(2.0, 0.05, 1.0), (0.5, 0.5), (0, 0))),
        ImplicitCost(Hara(0.5, 0.05, 1.0), (0.4, 0.6), initial_k(Hara(0.5, 0.05, 1.0), (0.4, 0.6), (0, 0))),
    ]


def _interior_q(cf, rng):
    # quadratic prices leave [0, 1] quickly; stay well inside
    scale = 20.0 if cf.kind == "quadratic" else 60.0
    scale = min(scale, cf.axis_saturation() / 4)
    return rng.uniform(-scale, scale, cf.n)


def test_lmsr_example():
    cf = LMSR(100.0, 2)
    assert cost(cf, (10.0, 0.0)) == pytest.approx(74.4397 - 69.3147, abs=1e-4)
    assert cf.raw_cost(np.array([10.0, 0.0])) == pytest.approx(74.4397, abs=1e-4)
    want = math.exp(0.1) / (math.exp(0.1) + 1)
    assert prices(cf, (10.0, 0.0)) == pytest.approx([want, 1 - want], abs=1e-15)
    assert want == pytest.approx(0.52498, abs=5e-6)


def test_log_utility_example():
    cf = LogUtility2(50.0)
    direct = -50 + 15 + 0.5 * math.sqrt(10000 + 900)
    assert cost(cf, (30.0, 0.0)) == pytest.approx(direct, abs=1e-12)
    assert direct == pytest.approx(17.2015, abs=5e-5)
    assert prices(cf, (30.0, 0.0))[0] == pytest.approx(0.5 + 30 / (2 * math.sqrt(10900)), abs=1e-14)
    assert prices(cf, (30.0, 0.0))[0] == pytest.approx(0.64367, abs=5e-6)


@pytest.mark.parametrize("cf", _makers(), ids=lambda c: c.label)
def test_zero_state_is_normalized_and_uniform_or_weighted(cf):
    assert cost(cf, np.zeros(cf.n)) == pytest.approx(0.0, abs=1e-12)
    view = cf.utility_view()
    expected = np.full(cf.n, 1 / cf.n) if view is None else view[1]
    assert prices(cf, np.zeros(cf.n)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("cf", _makers(), ids=lambda c: c.label)
def test_bundle_costs_its_size(cf):
    for a in (-7.5, 0.0, 3.25, 120.0):
        assert cost(cf, np.full(cf.n, a)) == pytest.approx(a, abs=1e-9)


@pytest.mark.parametrize("cf", _makers(), ids=lambda c: c.label)
def test_gradient_matches_finite_differences(cf, rng):
    for _ in range(50):
        q = _interior_q(cf, rng)
        p = prices(cf, q)
        assert abs(p.sum() - 1.0) <= 1e-10
        assert np.all((p >= 0) & (p <= 1))
        for i in range(cf.n):
            h = 1e-6 * max(1.0, abs(q[i]))
            up, dn = q.copy(), q.copy()
            up[i] += h
            dn[i] -= h
            fd = (cost(cf, up) - cost(cf, dn)) / (2 * h)
            assert p[i] == pytest.approx(fd, rel=1e-5, abs=1e-9)


@pytest.mark.parametrize("cf", _makers(), ids=lambda c: c.label)
def test_translation_leaves_prices_and_shifts_cost(cf, rng):
    for _ in range(30):
        q, a = _interior_q(cf, rng), rng.uniform(-100, 100)
        assert cost(cf, q + a) - cost(cf, q) == pytest.approx(a, abs=1e-9)
        assert np.max(np.abs(prices(cf, q + a) - prices(cf, q))) <= 1e-9


@pytest.mark.parametrize("cf", _makers(), ids=lambda c: c.label)
def test_own_price_slope_matches_difference_of_prices(cf, rng):
    for _ in range(20):
        q = _interior_q(cf, rng)
        i = int(rng.integers(cf.n))
        h = 1e-4 * max(1.0, abs(q[i]))
        up, dn = q.copy(), q.copy()
        up[i] += h
        dn[i] -= h
        fd = (prices(cf, up)[i] - prices(cf, dn)[i]) / (2 * h)
        assert own_price_slope(cf, q, i) == pytest.approx(fd, rel=1e-5)


@pytest.mark.parametrize("cf", _makers(), ids=lambda c: c.label)
def test_path_independence(cf, rng):
    s0 = MarketState.initial(cf.n)
    d1, d2 = _interior_q(cf, rng) / 2, _interior_q(cf, rng) / 2
    s1, r1 = trade(cf, s0, d1)
    _, r2 = trade(cf, s1, d2)
    _, direct = trade(cf, s0, d1 + d2)
    assert r1.payment + r2.payment == pytest.approx(direct.payment, abs=1e-9)


def test_trade_examples():
    cf = LMSR(100.0, 2)
    s0 = MarketState.initial(2)
    s1, rec = trade(cf, s0, (10.0, 0.0))
    assert rec.payment == pytest.approx(100 * math.log((math.exp(0.1) + 1) / 2), abs=1e-12)
    # 5.1250 is the difference of two four-decimal roundings
    assert rec.payment == pytest.approx(5.1250, abs=1e-4)
    s2, rec = trade(cf, s1, (0.0, 0.0))
    assert rec.payment == 0.0 and s2.quantities == s1.quantities
    _, rec = trade(cf, s1, (2.5, 2.5))
    assert rec.payment == pytest.approx(2.5, abs=1e-12)


def test_quadratic_rejects_prices_outside_unit_interval():
    cf = QuadraticCost(10.0, 2)
    s0 = MarketState.initial(2)
    s1, _ = trade(cf, s0, (5.0, 0.0))
    with pytest.raises(PriceOutOfRange):
        trade(cf, s1, (30.0, 0.0))
    assert s1.quantities == (5.0, 0.0) and len(s1.trade_log) == 1


def test_quadratic_cannot_move_to_extreme_belief():
    cf = QuadraticCost(10.0, 2)
    state, _ = move_to_belief(cf, MarketState.initial(2), (0.99, 0.01))
    assert prices(cf, state.q) == pytest.approx([0.99, 0.01], abs=1e-9)


def test_resolved_market_refuses_trades():
    state = MarketState(quantities=(0.0, 0.0), collected=0.0, resolved_outcome=1)
    with pytest.raises(MarketResolved):
        trade(LMSR(1.0, 2), state, (1.0, 0.0))


def test_move_to_belief_lmsr_closed_form():
    cf = LMSR(100.0, 2)
    _, rec = move_to_belief(cf, MarketState.initial(2), (0.9, 0.1))
    assert rec.delta == pytest.approx((100 * math.log(1.8), 100 * math.log(0.2)), abs=1e-9)
    assert rec.delta == pytest.approx((58.779, -160.944), abs=1e-3)


def test_exp_utility_moves_like_lmsr():
    lmsr, exp = LMSR(100.0, 2), ExpUtilityCost(0.01, (0.5, 0.5))
    _, a = move_to_belief(lmsr, MarketState.initial(2), (0.9, 0.1))
    _, b = move_to_belief(exp, MarketState.initial(2), (0.9, 0.1))
    assert a.delta == pytest.approx(b.delta, abs=1e-9)


@pytest.mark.parametrize("cf", _makers(), ids=lambda c: c.label)
def test_move_to_current_prices_is_a_null_trade(cf, rng):
    state, _ = trade(cf, MarketState.initial(cf.n), _interior_q(cf, rng) / 4)
    _, rec = move_to_belief(cf, state, prices(cf, state.q))
    assert rec.payment == pytest.approx(0.0, abs=1e-8)
    assert np.allclose(rec.prices_after, rec.prices_before, atol=1e-9)


@pytest.mark.parametrize("cf", _makers(), ids=lambda c: c.label)
def test_move_to_belief_is_profit_maximizing(cf, rng):
    n = cf.n
    belief = rng.dirichlet(np.ones(n)) * 0.6 + 0.4 / n
    state, rec = move_to_belief(cf, MarketState.initial(n), belief)
    delta = np.array(rec.delta)

    def profit(d):
        return float(np.dot(belief, d)) - (cost(cf, d) - cost(cf, np.zeros(n)))

    best = profit(delta)
    for _ in range(40):
        step = rng.normal(size=n) * rng.choice([1e-2, 1.0])
        try:
            assert profit(delta + step) <= best + 1e-9
        except PriceOutOfRange:
            pass


def test_linear_maker_cannot_move():
    cf = ImplicitCost(Linear(1.0), (0.5, 0.5), 0.0)
    with pytest.raises(Unattainable):
        move_to_belief(cf, MarketState.initial(2), (0.6, 0.4))


@pytest.mark.parametrize("u, pi, m0, expected", [
    (LogShift(50.0), (0.5, 0.5), (0.0, 0.0), math.log(50.0)),
    (NegExp(0.3), (0.2, 0.8), (0.0, 0.0), -1.0),
    (Linear(1.0), (0.5, 0.5), (1.0, 3.0), 1.0),
])
def test_initial_k(u, pi, m0, expected):
    assert initial_k(u, pi, m0) == pytest.approx(expected, abs=1e-15)


def test_initial_k_outside_domain():
    with pytest.raises(DomainViolation):
        initial_k(LogShift(1.0), (0.5, 0.5), (-2.0, 0.0))


def test_implicit_solver_matches_closed_forms(rng):
    b, alpha = 50.0, 0.03
    pi = np.array([0.1, 0.6, 0.3])
    for _ in range(100):
        q2 = rng.uniform(-200, 200, 2)
        want = -b + q2.sum() / 2 + math.sqrt(4 * b * b + (q2[0] - q2[1]) ** 2) / 2
        assert implicit_cost_solve(LogShift(b), (0.5, 0.5), math.log(b), q2) == pytest.approx(want, abs=1e-9)
        q3 = rng.uniform(-200, 200, 3)
        want = math.log(np.dot(pi, np.exp(alpha * q3))) / alpha
        assert implicit_cost_solve(NegExp(alpha), pi, -1.0, q3) == pytest.approx(want, abs=1e-9)


def test_implicit_solver_on_bundle():
    u = Hara(3.0, 0.1, 2.0)
    k = initial_k(u, PI3, (0, 0, 0))
    assert implicit_cost_solve(u, PI3, k, (4.5, 4.5, 4.5)) == pytest.approx(4.5, abs=1e-12)


def test_implicit_solver_keeps_precision_far_from_origin():
    # the smallest wealth entry stays accurate even when C itself is huge
    u = LogShift(10.0)
    c, wealth = implicit_wealth_solve(u, (0.5, 0.5), math.log(10.0), (1e9, 1e9 - 5.0))
    small = implicit_wealth_solve(u, (0.5, 0.5), math.log(10.0), (5.0, 0.0))[1]
    assert wealth == pytest.approx(small, abs=1e-12)
    assert c == pytest.approx(1e9 + small[0], rel=1e-15)


def test_implicit_solver_refuses_unreachable_level():
    with pytest.raises(DomainViolation):
        implicit_cost_solve(NegExp(1.0), (0.5, 0.5), 0.5, (0.0, 0.0))


@pytest.mark.parametrize("cf", [c for c in _makers() if c.utility_view() is not None],
                         ids=lambda c: c.label)
def test_expected_utility_stays_at_level(cf, rng):
    u, pi, level = cf.utility_view()
    state = MarketState.initial(cf.n)
    for _ in range(20):
        state, _ = trade(cf, state, _interior_q(cf, rng) - state.q)
        assert expected_utility(cf, state.q) == pytest.approx(level, abs=1e-9)


@pytest.mark.parametrize("cf", [c for c in _makers() if c.kind == "implicit"], ids=lambda c: c.label)
def test_implicit_prices_are_risk_neutral(cf, rng):
    state = MarketState.initial(cf.n)
    for _ in range(20):
        state, _ = trade(cf, state, _interior_q(cf, rng) - state.q)
        wealth = wealth_from_state(state)
        want = risk_neutral_prices(cf.utility, cf.weights, wealth)
        assert np.max(np.abs(prices(cf, state.q) - want)) <= 1e-9


@pytest.mark.parametrize("cf", _makers(), ids=lambda c: c.label)
def test_descriptor_round_trip(cf):
    assert cost_function_from_dict(cf.to_dict()) == cf


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1e4, 1e4), min_size=2, max_size=6))
def test_lmsr_is_stable_for_large_quantities(q):
    p = prices(LMSR(1.0, len(q)), q)
    assert np.all(np.isfinite(p)) and abs(p.sum() - 1.0) <= 1e-12
