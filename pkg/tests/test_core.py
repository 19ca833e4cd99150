import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bounded_mm.core import (
    MarketState,
    decode_float,
    encode_float,
    validate_prob_vector,
    wealth_from_state,
)
from bounded_mm.cost import LMSR, ImplicitCost, trade
from bounded_mm.errors import (
    MalformedDocument,
    NegativeEntry,
    NotNormalized,
    VersionMismatch,
    ZeroEntryInStrictMode,
)
from bounded_mm.makers import MarketMakerSpec, initial_state, replay, state_load, state_save
from bounded_mm.utility import Hara


def test_uniform_vector_is_valid_strictly():
    assert np.allclose(validate_prob_vector([0.5, 0.5], strict=True), [0.5, 0.5])


@pytest.mark.parametrize("vec, err, strict", [
    ([0.7, 0.4], NotNormalized, False),
    ([1.2, -0.2], NegativeEntry, False),
    ([1.0, 0.0], ZeroEntryInStrictMode, True),
])
def test_bad_vectors_are_rejected(vec, err, strict):
    with pytest.raises(err):
        validate_prob_vector(vec, strict=strict)


def test_zero_entry_ok_when_not_strict():
    validate_prob_vector([1.0, 0.0])


def test_normalization_tolerance_is_absolute_1e9():
    validate_prob_vector([0.5, 0.5 + 5e-10])
    with pytest.raises(NotNormalized):
        validate_prob_vector([0.5, 0.5 + 5e-9])


@pytest.mark.parametrize("q, collected, expected", [
    ((0.0, 0.0), 0.0, (0.0, 0.0)),
    ((10.0, 0.0), 74.4397, (64.4397, 74.4397)),
    ((5.0, 5.0), 5.0, (0.0, 0.0)),
])
def test_wealth_from_state(q, collected, expected):
    state = MarketState(quantities=q, collected=collected)
    assert np.allclose(wealth_from_state(state), expected, atol=1e-12)


def test_wealth_plus_quantities_is_collected(rng):
    q = tuple(rng.normal(size=4))
    state = MarketState(quantities=q, collected=3.25)
    assert np.allclose(wealth_from_state(state) + state.q, 3.25, atol=0, rtol=1e-15)


@given(st.floats(allow_nan=False))
def test_float_text_round_trip_is_exact(x):
    assert decode_float(encode_float(x)) == x


def test_decode_rejects_numbers():
    with pytest.raises(MalformedDocument):
        decode_float(1.5)


def _random_trades(cf, rng, count, scale=40.0):
    state = MarketState.initial(cf.n)
    for _ in range(count):
        state, _ = trade(cf, state, rng.uniform(-scale, scale, cf.n))
    return state


@pytest.mark.parametrize("spec", [
    MarketMakerSpec.from_cost(LMSR(100.0, 2)),
    MarketMakerSpec.from_utility(Hara(2.0, 0.01, 1.0), (0.2, 0.3, 0.5)),
])
def test_save_load_and_replay_after_many_trades(spec, rng):
    from bounded_mm.makers import build_cost_function

    cf = build_cost_function(spec)
    state = _random_trades(cf, rng, 100)
    loaded, loaded_spec = state_load(state_save(state, spec))
    assert loaded == state
    assert loaded_spec.to_dict() == spec.to_dict()
    again = replay(cf, loaded.trade_log, k=state.k)
    assert again.quantities == state.quantities
    assert again.collected == state.collected


def test_fresh_state_round_trip():
    spec = MarketMakerSpec.from_cost(LMSR(100.0, 2))
    state = initial_state(spec)
    assert state_load(state_save(state, spec)) == (state, spec)


def test_truncated_document_is_malformed():
    spec = MarketMakerSpec.from_cost(LMSR(100.0, 2))
    doc = state_save(initial_state(spec), spec)
    with pytest.raises(MalformedDocument):
        state_load(doc[: len(doc) // 2])


def test_wrong_version_is_refused():
    spec = MarketMakerSpec.from_cost(LMSR(100.0, 2))
    doc = json.loads(state_save(initial_state(spec), spec))
    doc["version"] = 99
    with pytest.raises(VersionMismatch):
        state_load(json.dumps(doc))


def test_missing_field_is_malformed():
    spec = MarketMakerSpec.from_cost(LMSR(100.0, 2))
    doc = json.loads(state_save(initial_state(spec), spec))
    del doc["quantities"]
    with pytest.raises(MalformedDocument):
        state_load(json.dumps(doc))


def test_reals_are_stored_as_strings():
    cf = LMSR(100.0, 2)
    state, _ = trade(cf, MarketState.initial(2), (0.1, 0.0))
    doc = json.loads(state_save(state, MarketMakerSpec.from_cost(cf)))
    assert all(isinstance(x, str) for x in doc["quantities"])
    assert float(doc["collected"]) == state.collected


def test_trade_returns_new_state_and_leaves_old_untouched():
    cf = LMSR(100.0, 2)
    s0 = MarketState.initial(2)
    s1, rec = trade(cf, s0, (10.0, 0.0))
    assert s0.quantities == (0.0, 0.0) and s0.trade_log == ()
    assert s1.quantities == (10.0, 0.0)
    assert rec.seq == 0
    s2, rec2 = trade(cf, s1, (1.0, 1.0))
    assert rec2.seq == 1
    assert math.isclose(rec2.payment, 1.0, rel_tol=1e-12)


def test_implicit_state_carries_level():
    u = Hara(2.0, 0.01, 1.0)
    spec = MarketMakerSpec.from_utility(u, (0.5, 0.5))
    state = initial_state(spec)
    assert math.isclose(state.k, float(u.value(0.0)))
    cf = ImplicitCost(u, (0.5, 0.5), state.k)
    assert cf.cost((0.0, 0.0)) == pytest.approx(0.0, abs=1e-12)
