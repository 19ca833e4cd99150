"""Maker specifications and the JSON state document."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import (
    MarketState,
    TradeRecord,
    decode_float,
    decode_vector,
    encode_float,
    encode_vector,
    uniform,
    validate_prob_vector,
)
from .cost import CostFunction, ImplicitCost, cost_function_from_dict, initial_k, trade
from .errors import InvalidParameter, MalformedDocument, MarketError, VersionMismatch
from .scoring import ScoringRule
from .translate import cost_from_scoring
from .utility import Utility, utility_from_dict

FAMILIES = ("utility", "scoring", "cost")
STATE_VERSION = 1


@dataclass(frozen=True)
class MarketMakerSpec:
    """Which formulation a maker is given in, plus its parameters."""

    family: str
    n: int
    utility: Optional[Utility] = None
    weights: Optional[tuple] = None
    scoring: Optional[ScoringRule] = None
    cost: Optional[CostFunction] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidParameter(f"unknown maker family {self.family!r}")
        if self.n < 2:
            raise InvalidParameter("need at least 2 outcomes")
        if self.family == "utility":
            if self.utility is None:
                raise InvalidParameter("utility maker needs a utility")
            w = self.weights if self.weights is not None else uniform(self.n)
            w = validate_prob_vector(w, strict=True)
            if w.size != self.n:
                raise InvalidParameter("weights length differs from n")
            object.__setattr__(self, "weights", tuple(float(x) for x in w))
        elif self.family == "scoring":
            if self.scoring is None:
                raise InvalidParameter("scoring maker needs a scoring rule")
            if self.scoring.n is not None and self.scoring.n != self.n:
                raise InvalidParameter("scoring rule length differs from n")
        elif self.cost is None:
            raise InvalidParameter("cost maker needs a cost function")
        elif self.cost.n != self.n:
            raise InvalidParameter("cost function length differs from n")

    @classmethod
    def from_utility(cls, u: Utility, weights) -> "MarketMakerSpec":
        return cls("utility", len(weights), utility=u, weights=tuple(weights))

    @classmethod
    def from_scoring(cls, s: ScoringRule, n: Optional[int] = None) -> "MarketMakerSpec":
        n = n or s.n
        if n is None:
            raise InvalidParameter("number of outcomes needed")
        return cls("scoring", n, scoring=s)

    @classmethod
    def from_cost(cls, cf: CostFunction) -> "MarketMakerSpec":
        return cls("cost", cf.n, cost=cf)

    @property
    def label(self) -> str:
        if self.family == "utility":
            return f"utility({self.utility!r}, weights={list(self.weights)})"
        if self.family == "scoring":
            return f"scoring({self.scoring!r})"
        return self.cost.label

    def to_dict(self) -> dict:
        d = {"family": self.family, "n": self.n}
        if self.family == "utility":
            d["utility"] = self.utility.to_dict()
            d["weights"] = encode_vector(self.weights)
        elif self.family == "scoring":
            d["scoring"] = self.scoring.to_dict()
        else:
            d["cost"] = self.cost.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MarketMakerSpec":
        fam = d["family"]
        n = int(d["n"])
        if fam == "utility":
            return cls(fam, n, utility=utility_from_dict(d["utility"]),
                       weights=decode_vector(d["weights"]))
        if fam == "scoring":
            return cls(fam, n, scoring=ScoringRule.from_dict(d["scoring"]))
        return cls(fam, n, cost=cost_function_from_dict(d["cost"]))


def build_cost_function(spec: MarketMakerSpec) -> CostFunction:
    """Runnable cost function for any maker family.

    Utility makers start from zero wealth, so their level is k = u(0).
    """
    if spec.family == "cost":
        return spec.cost
    if spec.family == "scoring":
        return cost_from_scoring(spec.scoring, spec.n)
    w = np.array(spec.weights)
    return ImplicitCost(spec.utility, spec.weights, initial_k(spec.utility, w, np.zeros(spec.n)))


def initial_state(spec: MarketMakerSpec) -> MarketState:
    cf = build_cost_function(spec)
    view = cf.utility_view()
    return MarketState.initial(spec.n, k=view[2] if view is not None else None)


# -- state document ----------------------------------------------------------

def state_to_dict(state: MarketState, spec: MarketMakerSpec) -> dict:
    return {
        "version": STATE_VERSION,
        "spec": spec.to_dict(),
        "quantities": encode_vector(state.quantities),
        "collected": encode_float(state.collected),
        "k": encode_float(state.k),
        "trade_log": [t.to_dict() for t in state.trade_log],
        "resolved_outcome": state.resolved_outcome,
    }


def state_save(state: MarketState, spec: MarketMakerSpec) -> str:
    return json.dumps(state_to_dict(state, spec), indent=2)


def state_load(document: str) -> Tuple[MarketState, MarketMakerSpec]:
    try:
        d = json.loads(document)
    except (json.JSONDecodeError, TypeError) as exc:
        raise MalformedDocument(f"not a JSON document: {exc}") from exc
    if not isinstance(d, dict):
        raise MalformedDocument("state document must be a JSON object")
    if "version" not in d:
        raise MalformedDocument("missing version")
    if d["version"] != STATE_VERSION:
        raise VersionMismatch(f"document version {d['version']!r}, expected {STATE_VERSION}")
    try:
        spec = MarketMakerSpec.from_dict(d["spec"])
        resolved = d.get("resolved_outcome")
        state = MarketState(
            quantities=decode_vector(d["quantities"]),
            collected=decode_float(d["collected"]),
            k=decode_float(d["k"]),
            trade_log=tuple(TradeRecord.from_dict(t) for t in d["trade_log"]),
            resolved_outcome=None if resolved is None else int(resolved),
        )
    except MalformedDocument:
        raise
    except (KeyError, TypeError, ValueError, MarketError) as exc:
        raise MalformedDocument(f"bad state document: {exc!r}") from exc
    if len(state.quantities) != spec.n:
        raise MalformedDocument("quantity vector length differs from the maker's outcomes")
    return state, spec


def replay(cf: CostFunction, trade_log, n: Optional[int] = None,
           k: Optional[float] = None) -> MarketState:
    """Re-apply a trade log from the empty market."""
    state = MarketState.initial(n or cf.n, k=k)
    for rec in trade_log:
        state, _ = trade(cf, state, rec.delta)
    return state
