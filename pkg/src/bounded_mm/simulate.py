"""Seeded trader-population simulation against a single maker.

Each round every trader, in a fixed order, draws a noisy belief around the
true outcome probabilities and trades the market to it.  The maker's
realized loss under each hypothetical outcome is then compared with its
worst-case bound.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .analysis import loss_against_bound
from .core import MarketState, encode_float, encode_vector, validate_prob_vector
from .cost import CostFunction, move_to_belief
from .errors import InvalidParameter, Unattainable
from .makers import MarketMakerSpec, build_cost_function, initial_state
from .utility import softmax_weighted


@dataclass(frozen=True)
class SimConfig:
    maker: MarketMakerSpec
    n_traders: int
    truth: tuple
    sigma: float = 0.0
    seed: int = 0
    rounds: int = 1
    floor: float = 0.01

    def __post_init__(self):
        truth = validate_prob_vector(self.truth, strict=True)
        object.__setattr__(self, "truth", tuple(float(x) for x in truth))
        if truth.size != self.maker.n:
            raise InvalidParameter("truth vector length differs from the maker's outcomes")
        if self.n_traders < 0 or self.rounds < 0:
            raise InvalidParameter("trader and round counts must be non-negative")
        if not self.sigma >= 0:
            raise InvalidParameter("sigma must be non-negative")
        if self.seed < 0:
            raise InvalidParameter("seed must be unsigned")
        if not 0 <= self.floor * truth.size < 1:
            raise InvalidParameter("belief floor too large for this many outcomes")

    def to_dict(self) -> dict:
        return {"maker": self.maker.to_dict(), "n_traders": self.n_traders,
                "truth": encode_vector(self.truth), "sigma": encode_float(self.sigma),
                "seed": self.seed, "rounds": self.rounds, "floor": encode_float(self.floor)}

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        return cls(MarketMakerSpec.from_dict(d["maker"]), int(d["n_traders"]),
                   tuple(float(x) for x in d["truth"]), float(d.get("sigma", 0.0)),
                   int(d.get("seed", 0)), int(d.get("rounds", 1)), float(d.get("floor", 0.01)))


@dataclass(frozen=True)
class SimResult:
    final_prices: Tuple[float, ...]
    realized_loss_per_outcome: Tuple[float, ...]
    worst_case_bound: float
    trader_pnl: Tuple[Tuple[float, ...], ...]
    trader_payments: Tuple[float, ...]
    collected: float
    trades: int
    skipped: int

    def to_dict(self) -> dict:
        return {
            "final_prices": encode_vector(self.final_prices),
            "realized_loss_per_outcome": encode_vector(self.realized_loss_per_outcome),
            "worst_case_bound": encode_float(self.worst_case_bound),
            "trader_pnl": [encode_vector(v) for v in self.trader_pnl],
            "trader_payments": encode_vector(self.trader_payments),
            "collected": encode_float(self.collected),
            "trades": self.trades,
            "skipped": self.skipped,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def clamp_to_floor(r: np.ndarray, floor: float) -> np.ndarray:
    """Closest-in-spirit probability vector with every entry at least ``floor``.

    Entries below the floor are pinned to it and the remaining mass is shared
    proportionally among the others; repeated until nothing is below.
    """
    r = np.asarray(r, dtype=float)
    pinned = np.zeros(r.size, dtype=bool)
    out = r.copy()
    for _ in range(r.size):
        low = (out < floor) & ~pinned
        if not low.any():
            break
        pinned |= low
        free_mass = 1.0 - floor * pinned.sum()
        out = np.where(pinned, floor, r * free_mass / r[~pinned].sum())
    return out / out.sum()


def draw_belief(rng: np.random.Generator, truth: np.ndarray, sigma: float, floor: float) -> np.ndarray:
    noisy = softmax_weighted(np.log(truth) + sigma * rng.standard_normal(truth.size))
    return clamp_to_floor(noisy, floor)


def simulate(cfg: SimConfig, bound: Optional[float] = None,
             cf: Optional[CostFunction] = None) -> SimResult:
    """Run the population; ``bound`` and ``cf`` may be passed to reuse work."""
    cf = cf or build_cost_function(cfg.maker)
    state: MarketState = initial_state(cfg.maker)
    rng = np.random.default_rng(cfg.seed)
    truth = np.array(cfg.truth)
    n = truth.size
    shares = np.zeros((cfg.n_traders, n))
    paid = np.zeros(cfg.n_traders)
    skipped = trades = 0
    for _ in range(cfg.rounds):
        for trader in range(cfg.n_traders):
            belief = draw_belief(rng, truth, cfg.sigma, cfg.floor)
            try:
                state, rec = move_to_belief(cf, state, belief)
            except Unattainable:
                skipped += 1
                continue
            shares[trader] += rec.delta
            paid[trader] += rec.payment
            trades += 1
    if bound is None:
        bound = loss_against_bound(cf)
    pnl = shares - paid[:, None]
    q = state.q
    return SimResult(
        final_prices=tuple(float(x) for x in cf.prices(q)),
        realized_loss_per_outcome=tuple(float(x) for x in q - state.collected),
        worst_case_bound=float(bound),
        trader_pnl=tuple(tuple(float(x) for x in row) for row in pnl),
        trader_payments=tuple(float(x) for x in paid),
        collected=float(state.collected),
        trades=trades,
        skipped=skipped,
    )
