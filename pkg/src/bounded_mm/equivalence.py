"""Numerical verification that two makers behave identically.

Two makers are behaviourally equivalent when every trader, moving prices to
the same targets from matched starting points, receives the same payoff in
every outcome.  Scoring-rule makers are run directly as market scoring rules
(payoff ``s(r_new) - s(r_old)``); utility and cost makers are run through their
cost functions (payoff ``delta_q - delta_C``).  The two routes share no code.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .core import MarketState, as_quantities
from .cost import CostFunction, move_to_belief
from .errors import DimensionMismatch
from .makers import MarketMakerSpec, build_cost_function
from .scoring import msr_payment
from .translate import (  # noqa: F401  (re-exported)
    beta_to_gamma,
    cost_from_scoring,
    gamma_to_beta,
    scoring_from_utility,
    scoring_scale,
    utility_from_scoring,
)


@dataclass(frozen=True)
class EquivalenceReport:
    pair: str
    samples: int
    max_price_discrepancy: float
    max_profit_discrepancy: float
    cost_offset: Optional[float]
    cost_offset_spread: Optional[float]
    tol: float
    verdict: bool

    def to_json(self) -> str:
        d = asdict(self)
        d["verdict"] = "pass" if self.verdict else "fail"
        return json.dumps(d)


class _CostRunner:
    def __init__(self, cf: CostFunction):
        self.cf = cf
        self.state = MarketState.initial(cf.n)

    def prices(self):
        return self.cf.prices(self.state.q)

    def move(self, r):
        self.state, rec = move_to_belief(self.cf, self.state, r)
        return np.array(rec.delta) - rec.payment, np.array(rec.prices_after)


class _ScoringRunner:
    def __init__(self, spec: MarketMakerSpec):
        self.rule = spec.scoring
        self.estimate = self.rule.base_estimate(spec.n)

    def prices(self):
        return self.estimate

    def move(self, r):
        profit = msr_payment(self.rule, self.estimate, r)
        self.estimate = np.array(r)
        return profit, self.estimate


def _runner(spec: MarketMakerSpec):
    if spec.family == "scoring":
        return _ScoringRunner(spec)
    return _CostRunner(build_cost_function(spec))


def interior_targets(rng: np.random.Generator, n: int, count: int, floor: float = 0.01) -> np.ndarray:
    """Uniform draws from the simplex shrunk so every entry is at least ``floor``."""
    return floor + (1.0 - n * floor) * rng.dirichlet(np.ones(n), size=count)


def verify_behavioral_equivalence(a: MarketMakerSpec, b: MarketMakerSpec, samples: int = 100,
                                  tol: float = 1e-8, trades_per_sample: int = 3,
                                  seed: int = 0) -> EquivalenceReport:
    """Compare trader payoffs and prices of two makers on random trade sequences."""
    if a.n != b.n:
        raise DimensionMismatch(f"makers have {a.n} and {b.n} outcomes")
    rng = np.random.default_rng(seed)
    max_price = 0.0
    max_profit = 0.0
    offsets = []
    for _ in range(samples):
        ra, rb = _runner(a), _runner(b)
        max_price = max(max_price, float(np.max(np.abs(ra.prices() - rb.prices()))))
        for r in interior_targets(rng, a.n, trades_per_sample):
            pa, prices_a = ra.move(r)
            pb, prices_b = rb.move(r)
            max_profit = max(max_profit, float(np.max(np.abs(pa - pb))))
            max_price = max(max_price, float(np.max(np.abs(prices_a - prices_b))))
            if isinstance(ra, _CostRunner) and isinstance(rb, _CostRunner):
                q = ra.state.q
                offsets.append(ra.cf.raw_cost(q) - rb.cf.raw_cost(q))
    offset = spread = None
    if offsets:
        offset = float(np.mean(offsets))
        spread = float(np.max(offsets) - np.min(offsets))
    verdict = max_price <= tol and max_profit <= tol
    return EquivalenceReport(f"{a.label} vs {b.label}", samples, max_price, max_profit,
                             offset, spread, tol, bool(verdict))


@dataclass(frozen=True)
class PriceFunctionComparison:
    max_price_discrepancy: float
    cost_offset: float
    cost_offset_spread: float


def compare_price_functions(a: CostFunction, b: CostFunction, samples: int = 500,
                            spread: float = 100.0, seed: int = 0) -> PriceFunctionComparison:
    """Prices and raw-cost differences of two cost functions at random states."""
    if a.n != b.n:
        raise DimensionMismatch("cost functions differ in number of outcomes")
    rng = np.random.default_rng(seed)
    worst = 0.0
    diffs = []
    for _ in range(samples):
        q = as_quantities(rng.uniform(-spread, spread, a.n))
        worst = max(worst, float(np.max(np.abs(a.prices(q) - b.prices(q)))))
        diffs.append(a.raw_cost(q) - b.raw_cost(q))
    diffs = np.array(diffs)
    return PriceFunctionComparison(worst, float(diffs.mean()), float(diffs.max() - diffs.min()))
